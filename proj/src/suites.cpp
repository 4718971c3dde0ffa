#include "fockbound/suites.hpp"

#include "fockbound/xspec.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <random>

namespace fockbound {

namespace {

using nlohmann::json;

std::string fmt(const char* label, int v) { return std::string(label) + "=" + std::to_string(v); }

std::vector<Word> words_up_to(int n, int k) { return enumerate_basis(TruncationParams(n, k)); }

std::vector<Word> nonempty_words(int n, int k) {
  auto all = words_up_to(n, k);
  all.erase(all.begin());
  return all;
}

struct FamilyMember {
  Phase lambda;
  Word i;
  Word j;
  ComplexElement elem;  // x_lambda (r_I o r_J^*)
};

/// x_lambda (r_I o r_J^*) for every order-th root lambda and |I|, |J| <= k.
std::vector<FamilyMember> test_family(const Weights& w, int order, int k) {
  const auto words = words_up_to(w.size(), k);
  std::vector<std::tuple<Word, Word, ComplexElement>> fs;
  for (const auto& i : words) {
    for (const auto& j : words) fs.emplace_back(i, j, f_element(w, i, j));
  }
  std::vector<FamilyMember> out;
  for (int s = 0; s < order; ++s) {
    const Phase lam = Phase::root(order, s);
    for (const auto& [i, j, f] : fs) {
      out.push_back({lam, i, j, multiply(ComplexElement::peripheral(lam), f)});
    }
  }
  return out;
}

/// <x Omega, Omega> read off the normal form: only shapes without creations
/// or annihilations survive on the vacuum.
Complex vacuum_expectation(const ComplexElement& x) {
  Complex acc{0.0, 0.0};
  for (const auto& [s, c] : x.terms()) {
    if (s.lc.empty() && s.rc.empty() && s.ra.empty() && s.la.empty()) acc += c;
  }
  return acc;
}

SymbolicProduct<Complex> symbolic_iterated(const Weights& w, ProductKind kind,
                                           const EigenTagged<Complex>& x, const Word& i,
                                           const Word& j, int max_iter) {
  using T = EigenTagged<Complex>;
  const auto r = T::trusted(ComplexElement::r_word(i), Phase{});
  const auto rs = T::trusted(ComplexElement::r_word_star(i), Phase{});
  switch (kind) {
    case ProductKind::RightMul: return choi_effros_symbolic(w, x, r, max_iter);
    case ProductKind::StarLeftMul: return choi_effros_symbolic(w, rs, x, max_iter);
    case ProductKind::LeftMul: return choi_effros_symbolic(w, r, x, max_iter);
    case ProductKind::StarRightMul: return choi_effros_symbolic(w, x, rs, max_iter);
    case ProductKind::Sandwich: {
      const auto rjs = T::trusted(ComplexElement::r_word_star(j), Phase{});
      const auto inner = choi_effros_symbolic(w, rjs, x, max_iter);
      auto outer = choi_effros_symbolic(w, T::trusted(inner.value, x.lambda()), r, max_iter);
      outer.steps = std::max(outer.steps, inner.steps);
      return outer;
    }
  }
  throw ValidationError("unknown product kind");
}

Complex random_coeff(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double re = u(rng);
  return {re, u(rng)};
}

/// Random peripheral element: 1 to 3 components c x_lambda (r_I o r_J^*).
PeripheralElement<Complex> random_peripheral(const Weights& w, int q, const std::vector<Word>& words,
                                             std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_int_distribution<int> root(0, q - 1);
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  PeripheralElement<Complex> out;
  const int terms = count(rng);
  for (int t = 0; t < terms; ++t) {
    const Phase lam = Phase::root(q, root(rng));
    const Word& i = words[pick(rng)];
    const Word& j = words[pick(rng)];
    const Complex c = random_coeff(rng);
    auto e = multiply(ComplexElement::peripheral(lam), f_element(w, i, j)) * c;
    out.push_back(EigenTagged<Complex>::trusted(std::move(e), lam));
  }
  return out;
}

/// Runs body(i) for i < count across threads. Results land in per-index
/// slots, so the merge order does not depend on scheduling. The first
/// exception by index is rethrown.
template <class R, class F>
std::vector<R> parallel_map(std::size_t count, F&& body) {
  std::vector<R> out(count);
  std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = body(k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

double realized_gap(const TruncationParams& p, const ComplexElement& a, const ComplexElement& b) {
  return trust_norm(realize(p, a - b));
}

}  // namespace

Check Check::below(std::string name, double value, double threshold, std::string detail) {
  return {std::move(name), value, threshold, Bound::Below, value < threshold, std::move(detail)};
}

Check Check::at_most(std::string name, double value, double threshold, std::string detail) {
  return {std::move(name), value, threshold, Bound::AtMost, value <= threshold, std::move(detail)};
}

Check Check::at_least(std::string name, double value, double threshold, std::string detail) {
  return {std::move(name), value, threshold, Bound::AtLeast, value >= threshold, std::move(detail)};
}

Check Check::equal(std::string name, double value, double expected, std::string detail) {
  return {std::move(name), value, expected, Bound::Equal, value == expected, std::move(detail)};
}

bool SuiteResult::passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

SuiteResult suite_relations(const RunConfig& c) {
  SuiteResult out{"relations", "Toeplitz relations of the creation operators", {}, {}, 0.0};
  const double tol = c.tol.relation_tol;
  for (int n : c.suite.relation_alphabets) {
    const TruncationParams p(n, c.suite.shallow_depth);
    const auto id = make_identity(p);
    const auto zero = TruncatedOperator::zero(p);
    const auto vac = make_vacuum_projection(p);
    std::vector<TruncatedOperator> l, r, ls, rs;
    for (int i = 1; i <= n; ++i) {
      l.push_back(make_left_creation(p, i));
      r.push_back(make_right_creation(p, i));
      ls.push_back(adjoint_op(l.back()));
      rs.push_back(adjoint_op(r.back()));
    }
    double rr = 0, ll = 0, rl = 0, lr = 0, comm = 0, annih = 0, create = 0;
    for (int i = 0; i < n; ++i) {
      annih = std::max({annih, trust_distance(ls[i] * vac, zero), trust_distance(rs[i] * vac, zero)});
      create = std::max(create, trust_distance(l[i] * vac, r[i] * vac));
      for (int j = 0; j < n; ++j) {
        const auto& delta = i == j ? id : zero;
        const auto& dvac = i == j ? vac : zero;
        rr = std::max(rr, trust_distance(rs[i] * r[j], delta));
        ll = std::max(ll, trust_distance(ls[i] * l[j], delta));
        rl = std::max(rl, trust_distance(rs[i] * l[j], l[j] * rs[i] + dvac));
        lr = std::max(lr, trust_distance(ls[i] * r[j], r[j] * ls[i] + dvac));
        comm = std::max(comm, trust_distance(l[i] * r[j], r[j] * l[i]));
      }
    }
    auto lsum = vac;
    auto rsum = vac;
    for (int i = 0; i < n; ++i) {
      lsum = lsum + l[i] * ls[i];
      rsum = rsum + r[i] * rs[i];
    }
    const double completeness = std::max(trust_distance(lsum, id), trust_distance(rsum, id));

    // Symbolic rewriting against matrix products for every pair of generators.
    std::vector<ComplexElement> gens;
    for (int i = 1; i <= n; ++i) {
      for (const auto& g : {Generator::l(i), Generator::l_star(i), Generator::r(i), Generator::r_star(i)}) {
        gens.push_back(ComplexElement::generator(g));
      }
    }
    gens.push_back(ComplexElement::vacuum());
    gens.push_back(ComplexElement::peripheral(Phase::root(4, 1)));
    double oracle = 0.0;
    for (const auto& a : gens) {
      const auto ra = realize(p, a);
      for (const auto& b : gens) {
        oracle = std::max(oracle, trust_distance(realize(p, multiply(a, b)), ra * realize(p, b)));
      }
    }

    const std::string tag = " (" + fmt("n", n) + ", " + fmt("d", p.depth) + ")";
    out.add(Check::below("r_i^* r_j = delta_ij" + tag, rr, tol));
    out.add(Check::below("l_i^* l_j = delta_ij" + tag, ll, tol));
    out.add(Check::below("r_i^* l_j = l_j r_i^* + delta_ij p" + tag, rl, tol));
    out.add(Check::below("l_i^* r_j = r_j l_i^* + delta_ij p" + tag, lr, tol));
    out.add(Check::below("l_i r_j = r_j l_i" + tag, comm, tol));
    out.add(Check::below("l_i^* p = r_i^* p = 0" + tag, annih, tol));
    out.add(Check::below("l_i p = r_i p" + tag, create, tol));
    out.add(Check::below("sum_i l_i l_i^* + p = sum_i r_i r_i^* + p = 1" + tag, completeness, tol));
    out.add(Check::below("normal form matches matrix product" + tag, oracle, tol));
  }
  return out;
}

SuiteResult suite_eigen(const RunConfig& c) {
  SuiteResult out{"eigen", "Peripheral eigen-unitaries", {}, {}, 0.0};
  const auto p = c.params();
  const UcpMap m(c.weights, p);
  const int q = c.suite.product_order;
  double eig = 0, unitary = 0, detect = 0, symbolic = 0;
  double not_fixed = std::numeric_limits<double>::infinity();
  int missed = 0;
  for (int s = 0; s < q; ++s) {
    const auto lam = UnitEigenvalue::root(q, s);
    const auto x = make_peripheral_unitary(p, lam);
    eig = std::max(eig, trust_distance(m.apply(x), lam.value() * x));
    unitary = std::max(unitary, trust_distance(x * adjoint_op(x), make_identity(p)));
    const auto found = detect_peripheral_eigenvalue(m, x, c.tol.eigen_tol);
    if (!found) {
      ++missed;
    } else {
      detect = std::max(detect, std::abs(found->value() - lam.value()));
    }
    const auto sym = eigen_check_symbolic(c.weights, ComplexElement::peripheral(Phase::root(q, s)));
    symbolic = std::max(symbolic, sym ? std::abs(sym->value() - lam.value()) : 1.0);
    if (s != 0) not_fixed = std::min(not_fixed, trust_distance(m.apply(x), x));
  }
  out.add(Check::below("P(x_lambda) = lambda x_lambda", eig, c.tol.relation_tol, fmt("q", q)));
  out.add(Check::below("x_lambda unitary", unitary, c.tol.relation_tol));
  out.add(Check::equal("eigenvalue detected for every x_lambda", missed, 0));
  out.add(Check::below("detected lambda error", detect, c.tol.eigen_tol));
  out.add(Check::below("symbolic eigenvalue error", symbolic, c.tol.relation_tol));
  if (q > 1) {
    out.add(Check::at_least("x_lambda (lambda != 1) is not a fixed point", not_fixed, c.tol.eigen_tol));
  }
  const auto r1 = make_right_creation(p, 1);
  const auto r1_found = detect_peripheral_eigenvalue(m, r1, c.tol.eigen_tol);
  out.add(Check::below("r_1 detected as fixed", r1_found ? std::abs(r1_found->value() - 1.0) : 1.0,
                       c.tol.eigen_tol));
  const auto proj = r1 * adjoint_op(r1);
  out.add(Check::equal("r_1 r_1^* has no peripheral eigenvalue",
                       detect_peripheral_eigenvalue(m, proj, c.tol.eigen_tol) ? 1.0 : 0.0, 0.0));
  return out;
}

SuiteResult suite_products(const RunConfig& c) {
  SuiteResult out{"products", "Products with right creations", {}, {}, 0.0};
  const auto p = c.params();
  const UcpMap m(c.weights, p);
  const auto family = test_family(c.weights, c.suite.product_order, c.word_bound);
  const auto words = nonempty_words(c.n, c.word_bound);
  struct Worst {
    double closed_vs_sot = 0, closed_sym_vs_num = 0, sot_sym_vs_num = 0;
    int steps = 0;
    long cases = 0;
  };
  const auto per_member = parallel_map<Worst>(family.size(), [&](std::size_t idx) {
    const auto& f = family[idx];
    Worst r;
    const auto x = realize(p, f.elem);
    const auto lam = UnitEigenvalue::from_phase(f.lambda);
    const auto tagged = EigenTagged<Complex>::trusted(f.elem, f.lambda);
    const auto run = [&](ProductKind kind, const Word& i, const Word& j) {
      const auto closed = closed_form_product(kind, x, lam, i, c.weights, j);
      const auto closed_sym = closed_form_product(kind, f.elem, f.lambda, i, c.weights, j);
      const auto it = iterated_product(m, kind, x, lam, i, j, c.tol.conv_tol);
      const auto sym = symbolic_iterated(c.weights, kind, tagged, i, j, c.max_iter);
      r.closed_vs_sot = std::max(r.closed_vs_sot, trust_distance(it.value, closed));
      r.closed_sym_vs_num = std::max(r.closed_sym_vs_num, trust_distance(realize(p, closed_sym), closed));
      r.sot_sym_vs_num = std::max(r.sot_sym_vs_num, trust_distance(realize(p, sym.value), it.value));
      r.steps = std::max({r.steps, it.steps, sym.steps});
      ++r.cases;
    };
    for (const auto& k : words) {
      for (const auto kind : {ProductKind::RightMul, ProductKind::StarLeftMul, ProductKind::LeftMul,
                              ProductKind::StarRightMul}) {
        run(kind, k, {});
      }
      for (const auto& j : words) run(ProductKind::Sandwich, k, j);
    }
    return r;
  });
  double closed_vs_sot = 0, closed_sym_vs_num = 0, sot_sym_vs_num = 0;
  int steps = 0;
  long cases = 0;
  for (const auto& r : per_member) {
    closed_vs_sot = std::max(closed_vs_sot, r.closed_vs_sot);
    closed_sym_vs_num = std::max(closed_sym_vs_num, r.closed_sym_vs_num);
    sot_sym_vs_num = std::max(sot_sym_vs_num, r.sot_sym_vs_num);
    steps = std::max(steps, r.steps);
    cases += r.cases;
  }
  const std::string detail = std::to_string(cases) + " cases";
  out.add(Check::below("closed form vs SOT iteration", closed_vs_sot, c.tol.agreement_tol, detail));
  out.add(Check::below("closed form symbolic vs numeric", closed_sym_vs_num, c.tol.agreement_tol, detail));
  out.add(Check::below("SOT iteration symbolic vs numeric", sot_sym_vs_num, c.tol.agreement_tol, detail));
  out.add(Check::at_most("SOT steps", steps, c.suite.max_product_steps, detail));
  return out;
}

SuiteResult suite_phi(const RunConfig& c) {
  SuiteResult out{"phi", "Vacuum-state identities", {}, {}, 0.0};
  const auto p = c.params();
  const UcpMap m(c.weights, p);
  const auto family = test_family(c.weights, c.suite.product_order, c.word_bound);
  const auto words = words_up_to(c.n, c.word_bound);
  const auto per_member = parallel_map<std::pair<double, double>>(family.size(), [&](std::size_t idx) {
    const auto& f = family[idx];
    const auto x = realize(p, f.elem);
    const auto lam = UnitEigenvalue::from_phase(f.lambda);
    std::pair<double, double> r{0.0, 0.0};
    for (const auto& j : words) {
      const auto rep = phi_identity_check(m, x, lam, j, c.tol.conv_tol);
      r.first = std::max(r.first, rep.error);
      r.second = std::max(r.second, rep.unphased_error);
    }
    return r;
  });
  double err = 0.0;
  double unphased = 0.0;
  for (const auto& [e, u] : per_member) {
    err = std::max(err, e);
    unphased = std::max(unphased, u);
  }
  const long cases = static_cast<long>(family.size() * words.size());
  out.add(Check::below("phi identities", err, c.tol.relation_tol, std::to_string(cases) + " cases"));
  out.notes.push_back("without the conj(lambda)^|J| factor the largest discrepancy is " +
                      std::to_string(unphased));
  return out;
}

namespace {

PeripheralSpanBasis probe_basis(const RunConfig& c) {
  if (c.probe.basis.empty()) return PeripheralSpanBasis(c.weights, c.lambda_order, c.word_bound);
  std::vector<std::tuple<Phase, Word, Word>> members;
  for (const auto& s : c.probe.basis) members.push_back(basis_member(parse_xspec(s, c.n)));
  return PeripheralSpanBasis(c.weights, std::move(members));
}

double witness_lemma_residual(const PeripheralSpanBasis& basis, const CommutantReport& rep,
                              const TruncationParams& p, int k) {
  double worst = 0.0;
  const auto words = words_up_to(p.n, k);
  for (const auto& v : rep.witness) {
    const auto x = realize(p, span_combination(basis, v));
    worst = std::max(worst, scalar_coefficient_residual(x));
    for (const auto& i : words) {
      for (const auto& j : words) {
        if (i.size() != j.size()) continue;
        worst = std::max(worst, delta_compression_check(x, i, j).max_residual());
      }
    }
  }
  return worst;
}

}  // namespace

SuiteResult suite_commutant(const RunConfig& c) {
  SuiteResult out{"commutant", "Relative commutant and center probes", {}, {}, 0.0};
  const auto p = c.params();
  const auto basis = probe_basis(c);
  for (const auto mode : {ProbeMode::Generators, ProbeMode::Center}) {
    const auto rep = commutant_probe(basis, p, mode, c.tol.svd_tol);
    const std::string tag = " (" + to_string(mode) + ")";
    const std::string detail = std::to_string(basis.size()) + " members, " +
                               std::to_string(rep.constraint_rows) + " rows";
    out.add(Check::equal("nullspace dimension" + tag, rep.nullspace_dimension, 1, detail));
    out.add(Check::below("witness distance to identity" + tag,
                         rep.identity_distance.value_or(std::numeric_limits<double>::infinity()), 1e-8));
    out.add(Check::below("singular-value gap ratio" + tag,
                         rep.gap_ratio.value_or(std::numeric_limits<double>::infinity()), c.tol.gap_tol));
    out.add(Check::below("witness compressions and coefficients" + tag,
                         witness_lemma_residual(basis, rep, p, c.word_bound), c.tol.agreement_tol));
    for (const auto& w : rep.warnings) out.notes.push_back(w);
  }
  const auto diag = commutant_probe(basis, p, ProbeMode::Matrix, c.tol.svd_tol);
  out.notes.push_back("plain matrix commutation leaves a nullspace of dimension " +
                      std::to_string(diag.nullspace_dimension));
  out.add(Check::at_least("Gram matrix relative min singular value", basis.gram_min_singular(p), 1e-12));
  return out;
}

SuiteResult suite_factorization(const RunConfig& c) {
  SuiteResult out{"factorization", "Eigenspace factorization and eigen products", {}, {}, 0.0};
  const auto p = c.params();
  const UcpMap m(c.weights, p);
  std::mt19937_64 rng(c.seed ^ 0x6a09e667f3bcc908ULL);
  const auto words = words_up_to(c.n, c.word_bound);
  std::uniform_int_distribution<int> root(0, c.suite.product_order - 1);
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  double fixed = 0.0, recovered = 0.0;
  for (int s = 0; s < c.suite.factor_samples; ++s) {
    ComplexElement a;
    for (int t = 0; t < 3; ++t) a += f_element(c.weights, words[pick(rng)], words[pick(rng)]) * random_coeff(rng);
    const auto lam = UnitEigenvalue::root(c.suite.product_order, root(rng));
    const auto a_op = realize(p, a);
    const auto x = make_peripheral_unitary(p, lam) * a_op;
    const auto fac = eigenspace_factorize(m, x, lam, c.tol.eigen_tol);
    fixed = std::max(fixed, fac.fixed_point_residual);
    recovered = std::max(recovered, trust_distance(fac.a, a_op));
  }
  const std::string samples = std::to_string(c.suite.factor_samples) + " samples";
  out.add(Check::below("fixed-point residual of x_lambda^* x", fixed, c.tol.eigen_tol, samples));
  out.add(Check::below("recovered factor", recovered, c.tol.eigen_tol, samples));

  const PeripheralSpanBasis grid(c.weights, 1, 1);
  const int q = c.lambda_order;
  double product = 0.0, units = 0.0;
  int steps = 0;
  long cases = 0;
  for (const auto& ea : grid.elements()) {
    const auto a = realize(p, ea.f_part);
    for (const auto& eb : grid.elements()) {
      const auto b = realize(p, eb.f_part);
      for (int s = 0; s < q; ++s) {
        for (int t = 0; t < q; ++t) {
          const auto lam = UnitEigenvalue::root(q, s);
          const auto mu = UnitEigenvalue::root(q, t);
          const auto rep = eigen_product_check(m, a, b, lam, mu, c.tol.conv_tol);
          product = std::max(product, rep.residual);
          steps = std::max(steps, rep.steps);
          ++cases;
        }
      }
    }
  }
  for (int s = 0; s < q; ++s) {
    for (int t = 0; t < q; ++t) {
      const auto lam = UnitEigenvalue::root(q, s);
      const auto mu = UnitEigenvalue::root(q, t);
      const auto prod = choi_effros_numeric(m, make_peripheral_unitary(p, lam), lam,
                                            make_peripheral_unitary(p, mu), mu, c.tol.conv_tol);
      units = std::max(units, trust_distance(prod.value, make_peripheral_unitary(p, lam * mu)));
    }
  }
  out.add(Check::below("(x_lambda a) o (b x_mu) = x_lambda (a o b) x_mu", product, c.tol.agreement_tol,
                       std::to_string(cases) + " cases"));
  out.add(Check::below("x_lambda o x_mu = x_{lambda mu}", units, c.tol.relation_tol));
  out.add(Check::at_most("SOT steps", steps, c.suite.max_product_steps));
  return out;
}

SuiteResult suite_expectation(const RunConfig& c) {
  SuiteResult out{"expectation", "Conditional expectation and bimodule inner product", {}, {}, 0.0};
  const auto& w = c.weights;
  const int q = c.lambda_order;
  const int nt = c.fourier_terms;
  // Realized comparisons only need exact matrices; the shallow depth suffices.
  const TruncationParams ps(c.n, c.suite.shallow_depth);
  const auto p = c.params();
  const UcpMap m(w, p);
  std::mt19937_64 rng(c.seed ^ 0xbb67ae8584caa73bULL);
  const auto words = words_up_to(c.n, c.word_bound);
  std::vector<PeripheralElement<Complex>> xs;
  for (int s = 0; s < c.suite.random_elements; ++s) xs.push_back(random_peripheral(w, q, words, rng));

  const auto expect = [&](const ComplexElement& x) { return conditional_expectation(w, x, q, nt); };
  double idem = 0, fixed = 0, numeric = 0;
  std::vector<ComplexElement> ex;
  for (const auto& x : xs) {
    const auto sx = sum_components(x);
    const auto e = expect(sx);
    idem = std::max(idem, realized_gap(ps, expect(e), e));
    fixed = std::max(fixed, realized_gap(ps, apply_ucp_symbolic(w, e), e));
    numeric = std::max(numeric, trust_distance(conditional_expectation(m, realize(p, sx), q, nt), realize(p, e)));
    ex.push_back(e);
  }
  const auto unit = expect(ComplexElement::identity());
  out.add(Check::below("E(E(x)) = E(x)", idem, c.tol.agreement_tol));
  out.add(Check::below("P(E(x)) = E(x)", fixed, c.tol.agreement_tol));
  out.add(Check::below("E(1) = 1", realized_gap(ps, unit, ComplexElement::identity()), c.tol.relation_tol));
  out.add(Check::below("symbolic E matches numeric ergodic average", numeric, c.tol.agreement_tol));

  // Module property over the fixed family r_I o r_J^*, each pair against one x.
  std::vector<EigenTagged<Complex>> fam;
  for (const auto& i : words) {
    for (const auto& j : words) fam.push_back(EigenTagged<Complex>::trusted(f_element(w, i, j), Phase{}));
  }
  double module = 0.0;
  long cases = 0;
  for (std::size_t a = 0; a < fam.size() && !xs.empty(); ++a) {
    for (std::size_t b = 0; b < fam.size(); ++b, ++cases) {
      const std::size_t k = static_cast<std::size_t>(cases) % xs.size();
      const PeripheralElement<Complex> left{fam[a]};
      const PeripheralElement<Complex> right{fam[b]};
      const auto lhs = expect(sum_components(circle(w, circle(w, left, xs[k]), right)));
      const PeripheralElement<Complex> ek{EigenTagged<Complex>::trusted(ex[k], Phase{})};
      const auto rhs = sum_components(circle(w, circle(w, left, ek), right));
      module = std::max(module, realized_gap(ps, lhs, rhs));
    }
  }
  out.add(Check::below("E(a o x o b) = a o E(x) o b", module, c.tol.agreement_tol,
                       std::to_string(cases) + " cases"));

  // Gram matrix of the vacuum state of <x_j, x_k> = E(x_j o x_k^*).
  const auto nx = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXcd g(nx, nx);
  for (Eigen::Index j = 0; j < nx; ++j) {
    for (Eigen::Index k = 0; k < nx; ++k) {
      const auto ip = bimodule_inner_product(w, xs[static_cast<std::size_t>(j)],
                                             xs[static_cast<std::size_t>(k)], q, nt);
      g(j, k) = vacuum_expectation(ip);
    }
  }
  const double herm = nx ? (g - g.adjoint()).cwiseAbs().maxCoeff() : 0.0;
  const Eigen::MatrixXcd sym = 0.5 * (g + g.adjoint());
  const double min_eig = nx ? Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(sym).eigenvalues().minCoeff() : 0.0;
  out.add(Check::below("Gram matrix conjugate symmetry", herm, c.tol.agreement_tol));
  out.add(Check::at_least("Gram matrix min eigenvalue", min_eig, -c.tol.agreement_tol,
                          std::to_string(xs.size()) + " elements"));
  return out;
}

SuiteResult suite_intertwining(const RunConfig& c) {
  SuiteResult out{"intertwining", "Basis independence under second quantization", {}, {}, 0.0};
  const TruncationParams p(c.n, c.suite.shallow_depth);
  const UcpMap m(c.weights, p);
  std::mt19937_64 rng(c.seed ^ 0x3c6ef372fe94f82bULL);
  const int q = c.lambda_order;
  const int k = std::min(c.word_bound, 1);
  const auto family = test_family(c.weights, q, k);
  std::vector<std::pair<TruncatedOperator, UnitEigenvalue>> xs;
  for (const auto& f : family) xs.emplace_back(realize(p, f.elem), UnitEigenvalue::from_phase(f.lambda));
  const auto r1 = make_right_creation(p, 1);
  const auto plain = r1 * adjoint_op(r1);

  double gamma = 0, ucp = 0, prod = 0;
  for (int u = 0; u < c.suite.unitaries; ++u) {
    const DenseMatrix um = random_unitary(c.n, rng);
    const auto g = make_second_quantization(p, um);
    gamma = std::max(gamma, trust_distance(g * adjoint_op(g), make_identity(p)));
    ucp = std::max(ucp, intertwine_check(um, c.weights, plain));
    for (std::size_t a = 0; a < xs.size(); ++a) {
      // One partner per element keeps the sweep linear in the family size.
      const std::size_t b = (a * 7 + static_cast<std::size_t>(u)) % xs.size();
      const auto rep = intertwine_check(um, c.weights, xs[a].first, xs[a].second, xs[b].first, xs[b].second,
                                        c.tol.conv_tol);
      ucp = std::max(ucp, rep.ucp_residual);
      prod = std::max(prod, rep.product_residual);
    }
  }
  DenseMatrix swap = DenseMatrix::Identity(c.n, c.n);
  if (c.n >= 2) {
    swap.row(0).swap(swap.row(1));
  }
  double fixed_cases = intertwine_check(DenseMatrix::Identity(c.n, c.n), c.weights, plain);
  for (int s = 0; s < q; ++s) {
    fixed_cases = std::max(fixed_cases, intertwine_check(swap, c.weights,
                                                         make_peripheral_unitary(p, UnitEigenvalue::root(q, s))));
  }
  const std::string detail = std::to_string(c.suite.unitaries) + " unitaries, " + std::to_string(xs.size()) +
                             " elements";
  out.add(Check::below("second quantization unitary", gamma, c.tol.relation_tol));
  out.add(Check::below("Gamma P(x) Gamma^* = P'(Gamma x Gamma^*)", ucp, c.tol.relation_tol, detail));
  out.add(Check::below("Gamma maps o-products to o'-products", prod, c.tol.agreement_tol, detail));
  out.add(Check::below("identity and swap frames", fixed_cases, c.tol.relation_tol));
  return out;
}

SuiteResult suite_depth_escalation(const RunConfig& c) {
  SuiteResult out{"depth_escalation", "Trusted entries agree across truncation depths", {}, {}, 0.0};
  const TruncationParams shallow(c.n, c.suite.shallow_depth);
  const TruncationParams deep = c.params();
  if (shallow.depth >= deep.depth) {
    out.notes.push_back("shallow depth equals the configured depth; nothing to compare");
    out.add(Check::below("depth escalation", 0.0, c.tol.relation_tol));
    return out;
  }
  const UcpMap ms(c.weights, shallow);
  const UcpMap md(c.weights, deep);
  const auto family = test_family(c.weights, c.suite.product_order, c.word_bound);
  std::vector<const FamilyMember*> sample;
  for (std::size_t i = 0; i < family.size(); i += 5) sample.push_back(&family[i]);
  const auto words = nonempty_words(c.n, c.word_bound);
  const double tol = c.tol.relation_tol;

  using Builder = std::function<TruncatedOperator(const UcpMap&)>;
  const auto compare = [&](const std::vector<Builder>& builders) {
    double worst = 0.0;
    for (const auto& b : builders) worst = std::max(worst, depth_distance(b(ms), b(md)));
    return worst;
  };

  std::vector<Builder> relations;
  for (int i = 1; i <= c.n; ++i) {
    for (int j = 1; j <= c.n; ++j) {
      relations.push_back([=](const UcpMap& m) {
        return adjoint_op(make_left_creation(m.params(), i)) * make_right_creation(m.params(), j);
      });
      relations.push_back([=](const UcpMap& m) {
        return adjoint_op(make_right_creation(m.params(), i)) * make_left_creation(m.params(), j);
      });
    }
  }
  out.add(Check::below("relations", compare(relations), tol));

  std::vector<Builder> iterates, products, closed, factors;
  for (const auto* f : sample) {
    const auto lam = UnitEigenvalue::from_phase(f->lambda);
    iterates.push_back([=](const UcpMap& m) { return iterate_ucp(m, realize(m.params(), f->elem), 2); });
    for (const auto kind : {ProductKind::RightMul, ProductKind::StarLeftMul, ProductKind::LeftMul,
                            ProductKind::StarRightMul, ProductKind::Sandwich}) {
      const Word& i = words[static_cast<std::size_t>(f - family.data()) % words.size()];
      const Word& j = words.front();
      products.push_back([=, &c](const UcpMap& m) {
        return iterated_product(m, kind, realize(m.params(), f->elem), lam, i, j, c.tol.conv_tol).value;
      });
      closed.push_back([=, &c](const UcpMap& m) {
        return closed_form_product(kind, realize(m.params(), f->elem), lam, i, c.weights, j);
      });
    }
    factors.push_back([=, &c](const UcpMap& m) {
      const auto x = realize(m.params(), f->elem);
      return eigenspace_factorize(m, x, lam, c.tol.eigen_tol).a;
    });
  }
  out.add(Check::below("ucp iterates", compare(iterates), tol));
  out.add(Check::below("SOT products", compare(products), tol));
  out.add(Check::below("closed forms", compare(closed), tol));
  out.add(Check::below("eigenspace factors", compare(factors), tol));

  double phi = 0.0;
  for (const auto* f : sample) {
    const auto lam = UnitEigenvalue::from_phase(f->lambda);
    for (const auto& j : words) {
      const auto a = phi_identity_check(ms, realize(shallow, f->elem), lam, j, c.tol.conv_tol);
      const auto b = phi_identity_check(md, realize(deep, f->elem), lam, j, c.tol.conv_tol);
      phi = std::max({phi, std::abs(a.star_lhs - b.star_lhs), std::abs(a.plain_lhs - b.plain_lhs),
                      std::abs(a.star_rhs - b.star_rhs), std::abs(a.plain_rhs - b.plain_rhs)});
    }
  }
  out.add(Check::below("vacuum states", phi, tol));

  std::vector<Builder> expectations;
  for (std::size_t s = 0; s + 1 < sample.size(); s += 4) {
    const auto* f = sample[s];
    const auto* g = sample[s + 1];
    expectations.push_back([=, &c](const UcpMap& m) {
      return conditional_expectation(m, realize(m.params(), f->elem), c.lambda_order, c.fourier_terms);
    });
    expectations.push_back([=, &c](const UcpMap& m) {
      const std::vector<NumericComponent> x{{realize(m.params(), f->elem), UnitEigenvalue::from_phase(f->lambda)}};
      const std::vector<NumericComponent> y{{realize(m.params(), g->elem), UnitEigenvalue::from_phase(g->lambda)}};
      return bimodule_inner_product(m, x, y, c.lambda_order, c.fourier_terms, c.tol.conv_tol);
    });
  }
  out.add(Check::below("conditional expectation and inner product", compare(expectations), tol));

  std::mt19937_64 rng(c.seed ^ 0xa54ff53a5f1d36f1ULL);
  const DenseMatrix um = random_unitary(c.n, rng);
  std::vector<Builder> conj;
  for (std::size_t s = 0; s < sample.size(); s += 8) {
    const auto* f = sample[s];
    conj.push_back([=](const UcpMap& m) {
      const auto g = make_second_quantization(m.params(), um);
      return (g * m.apply(realize(m.params(), f->elem))) * adjoint_op(g);
    });
  }
  out.add(Check::below("second-quantization conjugates", compare(conj), tol));

  const PeripheralSpanBasis basis(c.weights, c.lambda_order, c.word_bound);
  const auto ws = commutant_probe(basis, shallow, ProbeMode::Generators, c.tol.svd_tol);
  const auto wd = commutant_probe(basis, deep, ProbeMode::Generators, c.tol.svd_tol);
  double witness = std::numeric_limits<double>::infinity();
  if (ws.witness.size() == 1 && wd.witness.size() == 1) {
    // Align the phase of the two unit witnesses before comparing.
    const auto& a = ws.witness.front();
    const auto& b = wd.witness.front();
    const Complex ov = b.dot(a);
    const Complex rot = std::abs(ov) > 0 ? ov / std::abs(ov) : Complex{1.0, 0.0};
    witness = depth_distance(realize(shallow, span_combination(basis, a)),
                             realize(deep, span_combination(basis, b * rot)));
  }
  out.add(Check::below("commutant witness", witness, c.tol.agreement_tol));
  return out;
}

const std::vector<SuiteEntry>& all_suites() {
  static const std::vector<SuiteEntry> suites{
      {"relations", suite_relations},       {"eigen", suite_eigen},
      {"products", suite_products},         {"phi", suite_phi},
      {"commutant", suite_commutant},       {"factorization", suite_factorization},
      {"expectation", suite_expectation},   {"intertwining", suite_intertwining},
      {"depth_escalation", suite_depth_escalation},
  };
  return suites;
}

SuiteResult run_suite(const SuiteEntry& entry, const RunConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r;
  try {
    r = entry.run(c);
  } catch (const Error& e) {
    r.id = entry.id;
    r.title = entry.id;
    r.add(Check{"completed without error", 1.0, 0.0, Check::Bound::Equal, false, e.what()});
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

json to_json(const SuiteResult& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    static constexpr const char* kBounds[] = {"below", "at_most", "at_least", "equal"};
    const char* bound = kBounds[static_cast<int>(c.bound)];
    json j = {{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"bound", bound}, {"passed", c.passed}};
    if (!c.detail.empty()) j["detail"] = c.detail;
    checks.push_back(std::move(j));
  }
  return {{"id", r.id}, {"title", r.title}, {"passed", r.passed()}, {"checks", checks}, {"notes", r.notes}};
}

}  // namespace fockbound
