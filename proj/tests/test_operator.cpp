#include "fockbound/boundary.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace fockbound;

namespace {

TruncatedOperator random_generator_op(std::mt19937_64& rng, const TruncationParams& p) {
  std::uniform_int_distribution<int> kind(0, 5);
  std::uniform_int_distribution<int> letter(1, p.n);
  switch (kind(rng)) {
    case 0: return make_left_creation(p, letter(rng));
    case 1: return adjoint_op(make_left_creation(p, letter(rng)));
    case 2: return make_right_creation(p, letter(rng));
    case 3: return adjoint_op(make_right_creation(p, letter(rng)));
    case 4: return make_vacuum_projection(p);
    default: return make_peripheral_unitary(p, UnitEigenvalue::root(8, letter(rng)));
  }
}

DenseMatrix random_dense(std::mt19937_64& rng, Eigen::Index n, double density) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution keep(density);
  DenseMatrix m = DenseMatrix::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      if (keep(rng)) m(r, c) = {u(rng), u(rng)};
    }
  }
  return m;
}

}  // namespace

TEST_CASE("generators match their definitions") {
  const TruncationParams p(2, 3);
  const auto l1 = make_left_creation(p, 1);
  const auto r2 = make_right_creation(p, 2);
  CHECK(coefficient(l1, Word{2}, Word{1, 2}).value == Complex(1.0));
  CHECK(coefficient(r2, Word{1}, Word{1, 2}).value == Complex(1.0));
  CHECK(coefficient(r2, Word{1}, Word{2, 1}).value == Complex(0.0));
  CHECK(coefficient(r2, Word{}, Word{2}).value == Complex(1.0));
  CHECK(vacuum_state(make_vacuum_projection(p)) == Complex(1.0));
  const auto x = make_peripheral_unitary(p, UnitEigenvalue::root(4, 1));
  CHECK(std::abs(coefficient(x, Word{1, 2}, Word{1, 2}).value - Complex(-1.0)) < 1e-15);
  CHECK_THROWS_AS(coefficient(l1, Word{1, 1, 1, 1}, Word{}), RangeError);
  CHECK_THROWS_AS(make_left_creation(p, 3), RangeError);
}

TEST_CASE("coefficients outside the trust block are flagged") {
  const TruncationParams p(2, 4);
  const auto l1 = make_left_creation(p, 1);
  const auto n = compose(adjoint_op(l1), l1);  // l_1^* l_1 = 1, truncated at the top degree
  CHECK(n.trust() == 3);
  const auto top = coefficient(n, Word{2, 2, 2, 2}, Word{2, 2, 2, 2});
  CHECK_FALSE(top.trusted);
  CHECK(top.value == Complex(0.0));
  const auto inner = coefficient(n, Word{2, 2, 2}, Word{2, 2, 2});
  CHECK(inner.trusted);
  CHECK(inner.value == Complex(1.0));
  CHECK(trust_distance(n, TruncatedOperator::identity(p)) < 1e-15);
}

TEST_CASE("trusted entries do not depend on the depth") {
  std::mt19937_64 rng_shallow(3);
  std::mt19937_64 rng_deep(3);
  const TruncationParams shallow(2, 5);
  const TruncationParams deep(2, 7);
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<int> len(1, 6);
    const int l = len(rng_shallow);
    len(rng_deep);
    auto a = random_generator_op(rng_shallow, shallow);
    auto b = random_generator_op(rng_deep, deep);
    bool exhausted = false;
    for (int k = 1; k < l; ++k) {
      const auto ga = random_generator_op(rng_shallow, shallow);
      const auto gb = random_generator_op(rng_deep, deep);
      try {
        a = compose(a, ga);
      } catch (const TrustError&) {
        exhausted = true;
        break;
      }
      b = compose(b, gb);
    }
    if (exhausted) continue;
    CHECK(depth_distance(a, b) < 1e-14);
  }
}

TEST_CASE("sparse kernels agree with the dense references") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const DenseMatrix x = random_dense(rng, 40, 0.1);
    const DenseMatrix y = random_dense(rng, 40, 0.1);
    const SparseMatrix xs = x.sparseView();
    const SparseMatrix ys = y.sparseView();
    const DenseMatrix got(kernels::compose(xs, ys));
    CHECK((got - reference::compose(x, y)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((got - x * y).cwiseAbs().maxCoeff() < 1e-13);
  }
  const TruncationParams p(3, 4);
  const auto tables = basis_tables(p);
  const Weights w(std::vector<double>{0.2, 0.3, 0.5});
  const UcpMap m(w, p);
  const auto dim = static_cast<Eigen::Index>(p.dim());
  const std::size_t below_top = tables->count_up_to(p.depth - 1);
  for (int t = 0; t < 5; ++t) {
    const DenseMatrix x = random_dense(rng, dim, 0.05);
    const SparseMatrix xs = x.sparseView();
    const DenseMatrix got(kernels::ucp_apply(*tables, m.coupling(), xs));
    const DenseMatrix want = m.apply_reference(x);
    const auto b = static_cast<Eigen::Index>(below_top);
    CHECK((got.topLeftCorner(b, b) - want.topLeftCorner(b, b)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(kernels::max_abs_diff(got.sparseView(), want.sparseView(), below_top) < 1e-13);
  }
}

TEST_CASE("composition matches the symbolic product on the trust block") {
  const TruncationParams p(2, 6);
  const auto x = ComplexElement::r_word(Word{1, 2}) * ComplexElement::peripheral(Phase::root(8, 1));
  const auto y = ComplexElement::l_word_star(Word{2}) + ComplexElement::vacuum();
  const auto xy = compose(realize(p, x), realize(p, y));
  const auto yx = compose(realize(p, y), realize(p, x));
  CHECK(xy.trust() == p.depth);
  CHECK(yx.trust() == p.depth - 1);
  CHECK(trust_distance(xy, realize(p, x * y)) < 1e-15);
  CHECK(trust_distance(yx, realize(p, y * x)) < 1e-15);
  CHECK(trust_distance(realize(p, x + y), realize(p, x) + realize(p, y)) < 1e-15);
  CHECK(trust_distance(adjoint_op(realize(p, x)), realize(p, x.adjoint())) < 1e-15);
}

TEST_CASE("peripheral and second-quantized unitaries are unitary") {
  const TruncationParams p(2, 6);
  for (int k = 0; k < 8; ++k) {
    const auto x = make_peripheral_unitary(p, UnitEigenvalue::root(8, k));
    const DenseMatrix d = x.dense();
    CHECK((d * d.adjoint() - DenseMatrix::Identity(d.rows(), d.cols())).cwiseAbs().maxCoeff() < 1e-14);
  }
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    const DenseMatrix u = random_unitary(2, rng);
    const auto g = make_second_quantization(p, u);
    const DenseMatrix d = g.dense();
    CHECK((d * d.adjoint() - DenseMatrix::Identity(d.rows(), d.cols())).cwiseAbs().maxCoeff() < 1e-12);
    // Gamma_U l_xi Gamma_U^* = l_{U xi}
    Eigen::VectorXcd xi(2);
    xi << Complex(0.6, 0.0), Complex(0.0, 0.8);
    const auto lhs = compose(compose(g, make_left_creation_along(p, xi)), adjoint_op(g));
    CHECK(trust_distance(lhs, make_left_creation_along(p, u * xi)) < 1e-12);
    // Gamma_U commutes with x_lambda
    const auto xl = make_peripheral_unitary(p, UnitEigenvalue::root(4, 1));
    CHECK(trust_distance(compose(g, xl), compose(xl, g)) < 1e-12);
  }
  DenseMatrix bad(2, 2);
  bad << 1, 1, 0, 1;
  CHECK_THROWS_AS(make_second_quantization(p, bad), ValidationError);
}

TEST_CASE("write_csv lists the trusted nonzero entries") {
  const TruncationParams p(2, 3);
  const auto x = make_right_creation(p, 1);
  const auto path = std::filesystem::temp_directory_path() / "fockbound_test_operator.csv";
  write_csv(x, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "row_word,col_word,re,im");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 7);  // one per word of length <= 2
  std::filesystem::remove(path);
}
