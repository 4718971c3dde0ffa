#include "fockbound/boundary.hpp"

#include <doctest.h>

#include <random>

using namespace fockbound;

namespace {

using CE = ComplexElement;

const Weights kSkew(std::vector<double>{0.3, 0.7});

CE x_of(const Phase& lam) { return CE::peripheral(lam); }
CE r(const Word& w) { return CE::r_word(w); }
CE rs(const Word& w) { return CE::r_word_star(w); }

// Choi-Effros product computed densely and independently of the library:
// (P^* z)(J, I) = sum_i w_i z(iJ, iI) on a deep truncation, iterated a fixed
// number of times. Entries on words of length <= kCompare are exact.
constexpr int kOracleDepth = 8;
constexpr int kOracleSteps = 3;
constexpr int kCompare = 3;

struct Oracle {
  TruncationParams p{2, kOracleDepth};
  std::vector<Word> words = enumerate_basis(p);
  std::vector<std::vector<Eigen::Index>> prepend = [this] {
    std::vector<std::vector<Eigen::Index>> t(static_cast<std::size_t>(p.n));
    for (int i = 1; i <= p.n; ++i) {
      for (const auto& w : words) {
        t[static_cast<std::size_t>(i - 1)].push_back(
            static_cast<int>(w.size()) == p.depth ? -1 : static_cast<Eigen::Index>(index_of(p, concat(Word{i}, w))));
      }
    }
    return t;
  }();

  DenseMatrix ucp(const Weights& w, const DenseMatrix& z) const {
    DenseMatrix out = DenseMatrix::Zero(z.rows(), z.cols());
    for (std::size_t col = 0; col < words.size(); ++col) {
      if (static_cast<int>(words[col].size()) == p.depth) continue;
      for (std::size_t row = 0; row < words.size(); ++row) {
        if (static_cast<int>(words[row].size()) == p.depth) continue;
        Complex acc = 0.0;
        for (int i = 1; i <= p.n; ++i) {
          const auto& pre = prepend[static_cast<std::size_t>(i - 1)];
          acc += w(i) * z(pre[row], pre[col]);
        }
        out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = acc;
      }
    }
    return out;
  }

  DenseMatrix product(const Weights& w, const CE& x, const Phase& lam, const CE& y, const Phase& mu) const {
    const SparseMatrix xy = realize(p, x).matrix() * realize(p, y).matrix();
    DenseMatrix z(xy);
    const Complex factor = (lam * mu).inverse().to_complex();
    for (int k = 0; k < kOracleSteps; ++k) z = factor * ucp(w, z);
    return z;
  }

  double distance(const DenseMatrix& a, const CE& b) const {
    const auto block = static_cast<Eigen::Index>(basis_dimension(p.n, kCompare));
    const DenseMatrix d = a - realize(p, b).dense();
    return d.topLeftCorner(block, block).cwiseAbs().maxCoeff();
  }
};

const Oracle& oracle() {
  static const Oracle o;
  return o;
}

struct Member {
  Phase lambda;
  CE element;
};

std::vector<Member> sample_family() {
  std::vector<Member> out;
  const Phase lambdas[] = {Phase{}, Phase::root(4, 1), Phase::root(8, 3)};
  const std::pair<Word, Word> parts[] = {{{}, {}}, {Word{1}, {}}, {{}, Word{2}}, {Word{1}, Word{1}},
                                         {Word{2, 1}, Word{1}}, {Word{1}, Word{1, 2}}};
  for (const auto& lam : lambdas) {
    for (const auto& [i, j] : parts) out.push_back({lam, x_of(lam) * f_element(kSkew, i, j)});
  }
  return out;
}

}  // namespace

TEST_CASE("f elements match the dense product") {
  const Word words[] = {Word{}, Word{1}, Word{2}, Word{1, 2}, Word{2, 2}};
  for (const auto& i : words) {
    for (const auto& j : words) {
      const auto z = oracle().product(kSkew, r(i), Phase{}, rs(j), Phase{});
      CHECK(oracle().distance(z, f_element(kSkew, i, j)) < 1e-12);
    }
  }
  // r_1 o r_1^* = r_1 r_1^* + w_1 p
  CHECK(f_element(kSkew, Word{1}, Word{1}).max_coeff_diff(r(Word{1}) * rs(Word{1}) + CE::vacuum() * Complex(0.3)) <
        1e-15);
}

TEST_CASE("closed forms reduce on simple inputs") {
  const Phase lam = Phase::root(8, 3);
  // r_1 o x_lambda = r_1 x_lambda: the correction p x_lambda l_1 vanishes
  CHECK(closed_form_product(ProductKind::LeftMul, x_of(lam), lam, Word{1}, kSkew)
            .max_coeff_diff(r(Word{1}) * x_of(lam)) < 1e-15);
  CHECK(closed_form_product(ProductKind::RightMul, CE::identity(), Phase{}, Word{2}, kSkew) == r(Word{2}));
  CHECK(closed_form_product(ProductKind::Sandwich, CE::identity(), Phase{}, Word{2}, kSkew, Word{2}) ==
        CE::identity());
  CHECK_THROWS_AS(closed_form_product(ProductKind::LeftMul, CE::identity(), Phase{}, Word{}, kSkew),
                  ValidationError);
  CHECK(parse_product_kind("star_right_mul") == ProductKind::StarRightMul);
  CHECK(to_string(ProductKind::Sandwich) == "sandwich");
  CHECK_THROWS_AS(parse_product_kind("both"), ValidationError);
}

TEST_CASE("closed forms agree with the dense product") {
  const auto& o = oracle();
  const Word words[] = {Word{1}, Word{2}, Word{1, 2}};
  for (const auto& m : sample_family()) {
    for (const auto& i : words) {
      CHECK(o.distance(o.product(kSkew, m.element, m.lambda, r(i), Phase{}),
                       closed_form_product(ProductKind::RightMul, m.element, m.lambda, i, kSkew)) < 1e-12);
      CHECK(o.distance(o.product(kSkew, rs(i), Phase{}, m.element, m.lambda),
                       closed_form_product(ProductKind::StarLeftMul, m.element, m.lambda, i, kSkew)) < 1e-12);
      CHECK(o.distance(o.product(kSkew, r(i), Phase{}, m.element, m.lambda),
                       closed_form_product(ProductKind::LeftMul, m.element, m.lambda, i, kSkew)) < 1e-12);
      CHECK(o.distance(o.product(kSkew, m.element, m.lambda, rs(i), Phase{}),
                       closed_form_product(ProductKind::StarRightMul, m.element, m.lambda, i, kSkew)) < 1e-12);
      const Word j{2};
      CHECK(o.distance(o.product(kSkew, rs(j), Phase{}, m.element * r(i), m.lambda),
                       closed_form_product(ProductKind::Sandwich, m.element, m.lambda, i, kSkew, j)) < 1e-12);
    }
  }
}

TEST_CASE("the correction terms carry conj(lambda)^t") {
  const auto& o = oracle();
  const Phase lam = Phase::root(4, 1);
  const CE x = x_of(lam) * rs(Word{1});  // in the lambda eigenspace
  const auto z = o.product(kSkew, r(Word{1}), Phase{}, x, lam);
  const CE phased = closed_form_product(ProductKind::LeftMul, x, lam, Word{1}, kSkew);
  const CE unphased = r(Word{1}) * x + CE::vacuum() * x * CE::l_word(Word{1}) * Complex(0.3);
  CHECK(o.distance(z, phased) < 1e-12);
  CHECK(o.distance(z, unphased) > 0.1);
  const TruncationParams small(2, 5);
  CHECK(trust_distance(realize(small, phased), realize(small, r(Word{1}) * x + CE::vacuum() * Complex(0.0, -0.3))) <
        1e-15);
}

TEST_CASE("numeric closed forms and iterated products") {
  const TruncationParams p(2, 7);
  const UcpMap m(kSkew, p);
  for (const auto& mem : sample_family()) {
    const auto x = realize(p, mem.element);
    const auto lam = UnitEigenvalue::from_phase(mem.lambda);
    for (auto kind : {ProductKind::RightMul, ProductKind::StarLeftMul, ProductKind::LeftMul,
                      ProductKind::StarRightMul, ProductKind::Sandwich}) {
      const Word i{2, 1};
      const Word j{1};
      const auto it = iterated_product(m, kind, x, lam, i, j);
      CHECK(it.steps <= 3);
      CHECK(trust_distance(it.value, closed_form_product(kind, x, lam, i, kSkew, j)) < 1e-9);
      CHECK(trust_distance(it.value, realize(p, closed_form_product(kind, mem.element, mem.lambda, i, kSkew, j))) <
            1e-9);
    }
  }
}

TEST_CASE("vacuum-state identities") {
  const Weights w(std::vector<double>{0.25, 0.75});
  const TruncationParams p(2, 6);
  const UcpMap m(w, p);
  const auto one = UnitEigenvalue::root(1, 0);
  const auto rep = phi_identity_check(m, realize(p, r(Word{1})), one, Word{1});
  CHECK(std::abs(rep.star_lhs - Complex(0.25)) < 1e-14);
  CHECK(rep.error < 1e-12);

  double worst = 0.0;
  double worst_unphased = 0.0;
  for (int s = 0; s < 4; ++s) {
    const Phase lam = Phase::root(4, s);
    for (const auto& i : enumerate_basis(TruncationParams(2, 2))) {
      for (const auto& j : enumerate_basis(TruncationParams(2, 2))) {
        const auto x = realize(p, x_of(lam) * f_element(w, i, j));
        for (const auto& jj : enumerate_basis(TruncationParams(2, 2))) {
          if (jj.empty()) continue;
          const auto r2 = phi_identity_check(m, x, UnitEigenvalue::from_phase(lam), jj);
          worst = std::max(worst, r2.error);
          worst_unphased = std::max(worst_unphased, r2.unphased_error);
        }
      }
    }
  }
  CHECK(worst < 1e-12);
  CHECK(worst_unphased > 0.1);
}

TEST_CASE("compressions of scalars") {
  const TruncationParams p(2, 6);
  const auto c = Complex(0.5, 2.0) * TruncatedOperator::identity(p);
  for (const auto& i : enumerate_basis(TruncationParams(2, 2))) {
    for (const auto& j : enumerate_basis(TruncationParams(2, 2))) {
      if (i.size() != j.size()) continue;
      CHECK(delta_compression_check(c, i, j).max_residual() < 1e-14);
    }
  }
  CHECK(scalar_coefficient_residual(c) < 1e-15);
  const auto xi = make_peripheral_unitary(p, UnitEigenvalue::root(4, 1));
  CHECK(delta_compression_check(xi, Word{1}, Word{1}).delta_residual > 0.5);
  CHECK(scalar_coefficient_residual(xi) > 0.5);
  const auto r1s = realize(p, rs(Word{1}));
  CHECK(delta_compression_check(r1s, Word{1}, Word{1}).vacuum_residual == doctest::Approx(1.0));
  CHECK_THROWS_AS(delta_compression_check(c, Word{1}, Word{}), ValidationError);
}

TEST_CASE("eigenspace factorization") {
  const TruncationParams p(2, 7);
  const UcpMap m(kSkew, p);
  for (const auto& mem : sample_family()) {
    const auto lam = UnitEigenvalue::from_phase(mem.lambda);
    const auto f = eigenspace_factorize(m, realize(p, mem.element), lam);
    CHECK(f.fixed_point_residual < 1e-10);
    CHECK(f.eigen_residual < 1e-10);
    const CE a = x_of(mem.lambda.inverse()) * mem.element;
    CHECK(trust_distance(f.a, realize(p, a)) < 1e-12);
  }
  const auto mixed = make_peripheral_unitary(p, UnitEigenvalue::root(4, 1)) + TruncatedOperator::identity(p);
  CHECK_THROWS_AS(eigenspace_factorize(m, mixed, UnitEigenvalue::root(4, 1)), ValidationError);

  const auto a = realize(p, f_element(kSkew, Word{1}, {}));
  const auto b = realize(p, f_element(kSkew, {}, Word{1, 2}));
  const auto rep = eigen_product_check(m, a, b, UnitEigenvalue::root(4, 1), UnitEigenvalue::root(8, 5));
  CHECK(rep.residual < 1e-9);
}

TEST_CASE("commutant probe") {
  const TruncationParams p(2, 6);
  SUBCASE("scalars only") {
    const PeripheralSpanBasis basis(kSkew, {{Phase{}, Word{}, Word{}}});
    const auto rep = commutant_probe(basis, p);
    CHECK(rep.nullspace_dimension == 1);
    CHECK(rep.identity_distance.has_value());
    CHECK(*rep.identity_distance < 1e-12);
  }
  SUBCASE("identity and x_{-1}") {
    const PeripheralSpanBasis basis(kSkew, {{Phase{}, Word{}, Word{}}, {Phase::root(2, 1), Word{}, Word{}}});
    // x_{-1} fails to commute with r_1
    const auto rep = commutant_probe(basis, p, ProbeMode::Generators);
    CHECK(rep.nullspace_dimension == 1);
    CHECK(*rep.identity_distance < 1e-8);
    // but the span itself is commutative, so its center is all of it
    CHECK(commutant_probe(basis, p, ProbeMode::Center).nullspace_dimension == 2);
  }
  SUBCASE("default span basis") {
    const PeripheralSpanBasis basis(kSkew, 4, 1);
    CHECK(basis.identity_index().has_value());
    for (auto mode : {ProbeMode::Generators, ProbeMode::Center}) {
      const auto rep = commutant_probe(basis, p, mode);
      CHECK(rep.nullspace_dimension == 1);
      CHECK(*rep.identity_distance < 1e-8);
      REQUIRE(rep.gap_ratio.has_value());
      CHECK(*rep.gap_ratio < 1e-6);
      CHECK(std::is_sorted(rep.singular_values.rbegin(), rep.singular_values.rend()));
    }
  }
  SUBCASE("degenerate threshold") {
    const PeripheralSpanBasis basis(kSkew, {{Phase{}, Word{}, Word{}}, {Phase::root(2, 1), Word{}, Word{}}});
    const auto rep = commutant_probe(basis, p, ProbeMode::Generators, 1.0);
    CHECK(rep.nullspace_dimension == 0);
    CHECK_FALSE(rep.warnings.empty());
  }
  SUBCASE("dependent basis") {
    const PeripheralSpanBasis basis(kSkew, {{Phase{}, Word{}, Word{}}, {Phase{}, Word{}, Word{}}});
    CHECK_THROWS_AS(commutant_probe(basis, p), BasisError);
  }
  CHECK(parse_probe_mode("center") == ProbeMode::Center);
  CHECK_THROWS_AS(parse_probe_mode("everything"), ValidationError);
}

TEST_CASE("conditional expectation") {
  const TruncationParams p(2, 7);
  const UcpMap m(kSkew, p);
  const CE a = x_of(Phase::root(4, 1)) + r(Word{1});
  CHECK(conditional_expectation(kSkew, a, 4, 4).max_coeff_diff(r(Word{1})) < 1e-15);
  const CE f = f_element(kSkew, Word{2}, Word{1, 1});
  CHECK(conditional_expectation(kSkew, f, 4, 4).max_coeff_diff(f) < 1e-15);
  CHECK(conditional_expectation(kSkew, x_of(Phase::root(2, 1)) * r(Word{2}), 4, 4).is_zero());
  CHECK(conditional_expectation(kSkew, CE::identity(), 4, 4) == CE::identity());

  const CE mixed = a + x_of(Phase::root(2, 1)) * f * Complex(0.0, 1.0) + f;
  const CE e = conditional_expectation(kSkew, mixed, 4, 4);
  CHECK(conditional_expectation(kSkew, e, 4, 4).max_coeff_diff(e) < 1e-14);
  const auto numeric = conditional_expectation(m, realize(p, mixed), 4, 4);
  CHECK(trust_distance(numeric, realize(p, e)) < 1e-12);
  CHECK_THROWS_AS(conditional_expectation(m, realize(p, mixed), 4, 6), ValidationError);

  const CE fi = fourier_component_symbolic(kSkew, mixed, Phase::root(4, 1), 4);
  CHECK(fi.max_coeff_diff(x_of(Phase::root(4, 1))) < 1e-14);
}

TEST_CASE("bimodule inner product") {
  using PE = PeripheralElement<Complex>;
  const auto tag = [](const CE& x, const Phase& lam) { return EigenTagged<Complex>(kSkew, x, lam); };
  const Phase li = Phase::root(4, 1);
  const Phase lm = Phase::root(4, 2);
  const PE xi{tag(x_of(li), li)};
  const PE xm{tag(x_of(lm), lm)};
  CHECK(bimodule_inner_product(kSkew, xi, xi, 4, 4).max_coeff_diff(CE::identity()) < 1e-14);
  CHECK(bimodule_inner_product(kSkew, xi, xm, 4, 4).is_zero());
  const PE r1{tag(r(Word{1}), Phase{})};
  const PE r2{tag(r(Word{2}), Phase{})};
  CHECK(bimodule_inner_product(kSkew, r1, r2, 4, 4).max_coeff_diff(r(Word{1}) * rs(Word{2})) < 1e-14);

  const TruncationParams p(2, 7);
  const UcpMap m(kSkew, p);
  const std::vector<NumericComponent> nx{{realize(p, x_of(li) * r(Word{1})), UnitEigenvalue::from_phase(li)},
                                         {realize(p, r(Word{2})), UnitEigenvalue::root(1, 0)}};
  const PE sx{tag(x_of(li) * r(Word{1}), li), tag(r(Word{2}), Phase{})};
  const auto numeric = bimodule_inner_product(m, nx, nx, 4, 4);
  CHECK(trust_distance(numeric, realize(p, bimodule_inner_product(kSkew, sx, sx, 4, 4))) < 1e-10);
}

TEST_CASE("basis independence") {
  std::mt19937_64 rng(31);
  const TruncationParams p(2, 6);
  for (int t = 0; t < 3; ++t) {
    const DenseMatrix u = random_unitary(2, rng);
    CHECK((u * u.adjoint() - DenseMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-13);
    const auto x = realize(p, r(Word{1, 2}) * rs(Word{2}) + CE::vacuum());
    CHECK(intertwine_check(u, kSkew, x) < 1e-12);
    const Phase li = Phase::root(4, 1);
    const auto y = realize(p, x_of(li) * f_element(kSkew, Word{1}, {}));
    const auto z = realize(p, f_element(kSkew, {}, Word{2}));
    const auto rep = intertwine_check(u, kSkew, y, UnitEigenvalue::from_phase(li), z, UnitEigenvalue::root(1, 0));
    CHECK(rep.ucp_residual < 1e-12);
    CHECK(rep.product_residual < 1e-9);
  }
}
