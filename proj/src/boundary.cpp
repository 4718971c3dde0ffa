#include "fockbound/boundary.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>

namespace fockbound {

namespace {

template <class S>
S word_weight(const Weights& w, const Word& j) {
  if constexpr (std::is_same_v<S, GaussianRational>) {
    return GaussianRational(exact_weight_of_word(w, j));
  } else {
    return Complex{weight_of_word(w, j), 0.0};
  }
}

template <class S>
struct SymbolicOps {
  using Value = Element<S>;
  const Weights& w;
  Phase lambda;
  Value r(const Word& i) const { return Value::r_word(i); }
  Value r_star(const Word& i) const { return Value::r_word_star(i); }
  Value l(const Word& i) const { return Value::l_word(i); }
  Value l_star(const Word& i) const { return Value::l_word_star(i); }
  Value vacuum() const { return Value::vacuum(); }
  /// conj(lambda)^t w_J x
  Value weighted(const Word& j, std::size_t t, const Value& x) const {
    Value out = x * word_weight<S>(w, j);
    const Phase f = lambda.pow(-static_cast<std::int64_t>(t));
    return f.is_one() ? out : out * ScalarTraits<S>::from_phase(f);
  }
};

struct NumericOps {
  using Value = TruncatedOperator;
  const Weights& w;
  TruncationParams p;
  UnitEigenvalue lambda;
  Value r(const Word& i) const { return realize(p, ComplexElement::r_word(i)); }
  Value r_star(const Word& i) const { return realize(p, ComplexElement::r_word_star(i)); }
  Value l(const Word& i) const { return realize(p, ComplexElement::l_word(i)); }
  Value l_star(const Word& i) const { return realize(p, ComplexElement::l_word_star(i)); }
  Value vacuum() const { return make_vacuum_projection(p); }
  Value weighted(const Word& j, std::size_t t, const Value& x) const {
    return (weight_of_word(w, j) * unit_power(lambda, -static_cast<long long>(t))) * x;
  }
};

template <class Ops>
typename Ops::Value closed_form_impl(const Ops& ops, ProductKind kind, const typename Ops::Value& x,
                                     const Word& i, const Word& j) {
  if (i.empty()) throw ValidationError("closed-form products need a nonempty word");
  switch (kind) {
    case ProductKind::RightMul:
      return x * ops.r(i);
    case ProductKind::StarLeftMul:
      return ops.r_star(i) * x;
    case ProductKind::Sandwich:
      return (ops.r_star(j) * x) * ops.r(i);
    case ProductKind::LeftMul: {
      auto out = ops.r(i) * x;
      const Word iop = reverse(i);
      for (std::size_t t = 1; t <= i.size(); ++t) {
        const Word head = prefix(iop, t);
        const Word rest = prefix(i, i.size() - t);
        out = out + ops.weighted(head, t, ((ops.r(rest) * ops.vacuum()) * x) * ops.l(head));
      }
      return out;
    }
    case ProductKind::StarRightMul: {
      auto out = x * ops.r_star(i);
      const Word iop = reverse(i);
      for (std::size_t t = 1; t <= i.size(); ++t) {
        const Word head = prefix(iop, t);
        const Word rest = prefix(i, i.size() - t);
        out = out + ops.weighted(head, t, ((ops.l_star(head) * x) * ops.vacuum()) * ops.r_star(rest));
      }
      return out;
    }
  }
  throw ValidationError("unknown product kind");
}

const UnitEigenvalue kOne{Complex{1.0, 0.0}};

// Incrementally maintained R factor of a tall constraint matrix.
class RowCompressor {
 public:
  explicit RowCompressor(Eigen::Index cols) : r_(0, cols) {}

  void absorb(const DenseMatrix& rows) {
    if (rows.rows() == 0) return;
    DenseMatrix stacked(r_.rows() + rows.rows(), r_.cols());
    stacked << r_, rows;
    Eigen::HouseholderQR<DenseMatrix> qr(stacked);
    const Eigen::Index keep = std::min(stacked.rows(), stacked.cols());
    r_ = qr.matrixQR().topRows(keep).triangularView<Eigen::Upper>();
  }

  /// Singular values of the absorbed matrix, padded with zeros to cols.
  Eigen::VectorXd singular_values(DenseMatrix* v) const {
    const Eigen::Index cols = r_.cols();
    DenseMatrix square = DenseMatrix::Zero(cols, cols);
    square.topRows(r_.rows()) = r_;
    Eigen::JacobiSVD<DenseMatrix> svd(square, Eigen::ComputeFullV);
    if (v) *v = svd.matrixV();
    return svd.singularValues();
  }

 private:
  DenseMatrix r_;
};

using ConstraintFn = std::function<SparseMatrix(std::size_t)>;

struct ConstraintFamily {
  std::string label;
  ConstraintFn fn;
};

}  // namespace

std::string to_string(ProductKind k) {
  switch (k) {
    case ProductKind::RightMul:
      return "right_mul";
    case ProductKind::StarLeftMul:
      return "star_left_mul";
    case ProductKind::Sandwich:
      return "sandwich";
    case ProductKind::LeftMul:
      return "left_mul";
    case ProductKind::StarRightMul:
      return "star_right_mul";
  }
  return "?";
}

ProductKind parse_product_kind(const std::string& s) {
  for (auto k : {ProductKind::RightMul, ProductKind::StarLeftMul, ProductKind::Sandwich,
                 ProductKind::LeftMul, ProductKind::StarRightMul}) {
    if (to_string(k) == s) return k;
  }
  throw ValidationError("unknown product kind '" + s + "'");
}

template <class S>
Element<S> closed_form_product(ProductKind kind, const Element<S>& x, const Phase& lambda,
                               const Word& i, const Weights& w, const Word& j) {
  return closed_form_impl(SymbolicOps<S>{w, lambda}, kind, x, i, j);
}

TruncatedOperator closed_form_product(ProductKind kind, const TruncatedOperator& x,
                                      const UnitEigenvalue& lambda, const Word& i,
                                      const Weights& w, const Word& j) {
  return closed_form_impl(NumericOps{w, x.params(), lambda}, kind, x, i, j);
}

NumericProduct iterated_product(const UcpMap& m, ProductKind kind, const TruncatedOperator& x,
                                const UnitEigenvalue& lambda, const Word& i, const Word& j,
                                double tol) {
  const auto& p = m.params();
  const auto r = [&](const Word& v) { return realize(p, ComplexElement::r_word(v)); };
  const auto rs = [&](const Word& v) { return realize(p, ComplexElement::r_word_star(v)); };
  switch (kind) {
    case ProductKind::RightMul:
      return choi_effros_numeric(m, x, lambda, r(i), kOne, tol);
    case ProductKind::StarLeftMul:
      return choi_effros_numeric(m, rs(i), kOne, x, lambda, tol);
    case ProductKind::LeftMul:
      return choi_effros_numeric(m, r(i), kOne, x, lambda, tol);
    case ProductKind::StarRightMul:
      return choi_effros_numeric(m, x, lambda, rs(i), kOne, tol);
    case ProductKind::Sandwich: {
      NumericProduct inner = choi_effros_numeric(m, rs(j), kOne, x, lambda, tol);
      NumericProduct outer = choi_effros_numeric(m, inner.value, lambda, r(i), kOne, tol);
      outer.steps = std::max(outer.steps, inner.steps);
      return outer;
    }
  }
  throw ValidationError("unknown product kind");
}

PhiReport phi_identity_check(const UcpMap& m, const TruncatedOperator& x,
                             const UnitEigenvalue& lambda, const Word& j, double tol) {
  const auto& p = m.params();
  const Complex wj{weight_of_word(m.weights(), j), 0.0};
  const Complex s = unit_power(lambda, -static_cast<long long>(j.size()));
  const auto rj = realize(p, ComplexElement::r_word(j));
  const auto rjs = realize(p, ComplexElement::r_word_star(j));
  const Word jop = reverse(j);  // r_J Omega = e_{J^op}
  PhiReport out;
  out.star_lhs = vacuum_state(choi_effros_numeric(m, x, lambda, rjs, kOne, tol).value);
  out.star_mid = s * wj * coefficient(x, Word{}, jop).value;
  out.star_rhs = s * wj * vacuum_state(choi_effros_numeric(m, rjs, kOne, x, lambda, tol).value);
  out.plain_lhs = vacuum_state(choi_effros_numeric(m, rj, kOne, x, lambda, tol).value);
  out.plain_mid = s * wj * coefficient(x, jop, Word{}).value;
  out.plain_rhs = s * wj * vacuum_state(choi_effros_numeric(m, x, lambda, rj, kOne, tol).value);
  out.error = std::max({std::abs(out.star_lhs - out.star_mid), std::abs(out.star_mid - out.star_rhs),
                        std::abs(out.plain_lhs - out.plain_mid),
                        std::abs(out.plain_mid - out.plain_rhs)});
  out.unphased_error = std::max(std::abs(out.star_lhs - out.star_mid / s),
                                std::abs(out.plain_lhs - out.plain_mid / s));
  return out;
}

DeltaReport delta_compression_check(const TruncatedOperator& x, const Word& i, const Word& j) {
  if (i.size() != j.size()) throw ValidationError("words must have equal length");
  const auto& p = x.params();
  const auto lhs = (realize(p, ComplexElement::r_word_star(i)) * x) * realize(p, ComplexElement::r_word(j));
  const auto rhs = i == j ? x : TruncatedOperator::zero(p);
  DeltaReport out;
  out.delta_residual = trust_distance(lhs, rhs);
  if (!j.empty()) {
    // <x r_J Omega, Omega> = <x e_{J^op}, Omega>
    out.vacuum_residual = std::abs(coefficient(x, reverse(j), Word{}).value);
  }
  return out;
}

double scalar_coefficient_residual(const TruncatedOperator& x) {
  const Complex phi = vacuum_state(x);
  const SparseMatrix target = phi * TruncatedOperator::identity(x.params()).matrix();
  return kernels::max_abs_diff(x.matrix(), target, x.trust_block());
}

Factorization eigenspace_factorize(const UcpMap& m, const TruncatedOperator& x,
                                   const UnitEigenvalue& lambda, double tol) {
  const auto& p = m.params();
  const double eig = trust_distance(m.apply(x), lambda.value() * x);
  if (eig >= tol) throw ValidationError("element is not in the stated eigenspace");
  TruncatedOperator a = adjoint_op(make_peripheral_unitary(p, lambda)) * x;
  const double fixed = trust_distance(m.apply(a), a);
  if (fixed >= tol) throw FactorizationError("x_lambda^* x is not a fixed point");
  return {std::move(a), eig, fixed};
}

EigenProductReport eigen_product_check(const UcpMap& m, const TruncatedOperator& a,
                                       const TruncatedOperator& b, const UnitEigenvalue& lambda,
                                       const UnitEigenvalue& mu, double tol) {
  const auto& p = m.params();
  const auto xl = make_peripheral_unitary(p, lambda);
  const auto xm = make_peripheral_unitary(p, mu);
  NumericProduct lhs = choi_effros_numeric(m, xl * a, lambda, b * xm, mu, tol);
  NumericProduct ab = choi_effros_numeric(m, a, kOne, b, kOne, tol);
  TruncatedOperator rhs = (xl * ab.value) * xm;
  const double residual = trust_distance(lhs.value, rhs);
  return {std::move(lhs.value), std::move(rhs), residual, std::max(lhs.steps, ab.steps)};
}

std::string SpanElement::label() const {
  std::string out;
  if (!lambda.is_one()) out += "x[" + lambda.to_string() + "] ";
  out += "r_" + i.to_string() + " o r*_" + j.to_string();
  return out;
}

ComplexElement f_element(const Weights& w, const Word& i, const Word& j) {
  EigenTagged<Complex> a(w, ComplexElement::r_word(i), Phase{});
  EigenTagged<Complex> b(w, ComplexElement::r_word_star(j), Phase{});
  return choi_effros_symbolic(w, a, b).value;
}

PeripheralSpanBasis::PeripheralSpanBasis(const Weights& w, int q, int k)
    : weights_(w), q_(q), k_(k) {
  if (q < 1) throw ValidationError("lambda order must be positive");
  if (k < 0) throw ValidationError("word bound must be nonnegative");
  const int n = w.size();
  std::vector<Word> words{Word{}};
  if (k > 0) words = enumerate_basis(TruncationParams(n, k));
  std::vector<std::pair<Word, Word>> pairs;
  for (const Word& i : words) {
    for (const Word& j : words) {
      if (!i.empty() && !j.empty() && i.back() == n && j.back() == n) continue;
      pairs.emplace_back(i, j);
    }
  }
  std::vector<ComplexElement> parts;
  parts.reserve(pairs.size());
  for (const auto& [i, j] : pairs) parts.push_back(f_element(w, i, j));
  for (int s = 0; s < q; ++s) {
    const Phase lambda = Phase::root(q, s);
    const auto xl = ComplexElement::peripheral(lambda);
    for (std::size_t t = 0; t < pairs.size(); ++t) {
      elements_.push_back(SpanElement{lambda, pairs[t].first, pairs[t].second, parts[t], xl * parts[t]});
    }
  }
}

PeripheralSpanBasis::PeripheralSpanBasis(const Weights& w,
                                         std::vector<std::tuple<Phase, Word, Word>> members)
    : weights_(w) {
  for (auto& [lambda, i, j] : members) {
    ComplexElement f = f_element(w, i, j);
    ComplexElement e = ComplexElement::peripheral(lambda) * f;
    q_ = std::max<int>(q_, static_cast<int>(lambda.den()));
    k_ = std::max<int>({k_, static_cast<int>(i.size()), static_cast<int>(j.size())});
    elements_.push_back(SpanElement{lambda, std::move(i), std::move(j), std::move(f), std::move(e)});
  }
}

std::optional<std::size_t> PeripheralSpanBasis::identity_index() const {
  for (std::size_t t = 0; t < elements_.size(); ++t) {
    const auto& e = elements_[t];
    if (e.lambda.is_one() && e.i.empty() && e.j.empty()) return t;
  }
  return std::nullopt;
}

double PeripheralSpanBasis::gram_min_singular(const TruncationParams& p) const {
  if (elements_.empty()) throw BasisError("empty basis");
  const auto dim = static_cast<std::int64_t>(basis_dimension(p.n, p.depth));
  using Tall = Eigen::SparseMatrix<Complex, Eigen::ColMajor, std::int64_t>;
  std::vector<Eigen::Triplet<Complex, std::int64_t>> trips;
  for (std::size_t t = 0; t < elements_.size(); ++t) {
    const auto op = realize(p, elements_[t].element);
    for (int c = 0; c < op.matrix().outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(op.matrix(), c); it; ++it) {
        trips.emplace_back(static_cast<std::int64_t>(c) * dim + it.row(), static_cast<std::int64_t>(t),
                           it.value());
      }
    }
  }
  Tall v(dim * dim, static_cast<std::int64_t>(elements_.size()));
  v.setFromTriplets(trips.begin(), trips.end());
  const DenseMatrix gram = DenseMatrix(Tall(v.adjoint()) * v);
  Eigen::JacobiSVD<DenseMatrix> svd(gram);
  const auto& s = svd.singularValues();
  return s[s.size() - 1] / s[0];
}

std::string to_string(ProbeMode m) {
  switch (m) {
    case ProbeMode::Generators:
      return "generators";
    case ProbeMode::Center:
      return "center";
    case ProbeMode::Matrix:
      return "matrix";
  }
  return "?";
}

ProbeMode parse_probe_mode(const std::string& s) {
  for (auto m : {ProbeMode::Generators, ProbeMode::Center, ProbeMode::Matrix}) {
    if (to_string(m) == s) return m;
  }
  throw ValidationError("unknown probe mode '" + s + "'");
}

ComplexElement span_combination(const PeripheralSpanBasis& basis, const Eigen::VectorXcd& c) {
  if (c.size() != static_cast<Eigen::Index>(basis.size())) throw ValidationError("coefficient length mismatch");
  ComplexElement out;
  for (std::size_t t = 0; t < basis.size(); ++t) {
    if (c[static_cast<Eigen::Index>(t)] != Complex{0.0, 0.0}) {
      out += basis.elements()[t].element * c[static_cast<Eigen::Index>(t)];
    }
  }
  return out;
}

namespace {

std::vector<ConstraintFamily> generator_families(const PeripheralSpanBasis& basis,
                                                 const TruncationParams& p, bool matrix_mode) {
  const Weights& w = basis.weights();
  std::vector<ConstraintFamily> out;
  for (int i = 1; i <= p.n; ++i) {
    const Word wi{i};
    if (matrix_mode) {
      const auto ri = ComplexElement::r_word(wi);
      const auto ris = ComplexElement::r_word_star(wi);
      out.push_back({"[b, r_" + std::to_string(i) + "]", [&basis, p, ri](std::size_t b) {
                       const auto& e = basis.elements()[b].element;
                       return realize(p, e * ri - ri * e).matrix();
                     }});
      out.push_back({"[b, r*_" + std::to_string(i) + "]", [&basis, p, ris](std::size_t b) {
                       const auto& e = basis.elements()[b].element;
                       return realize(p, e * ris - ris * e).matrix();
                     }});
    } else {
      out.push_back({"b o r_" + std::to_string(i) + " - r_" + std::to_string(i) + " o b",
                     [&basis, &w, p, wi](std::size_t b) {
                       const auto& e = basis.elements()[b];
                       return realize(p, closed_form_product(ProductKind::RightMul, e.element, e.lambda, wi, w) -
                                             closed_form_product(ProductKind::LeftMul, e.element, e.lambda, wi, w))
                           .matrix();
                     }});
      out.push_back({"b o r*_" + std::to_string(i) + " - r*_" + std::to_string(i) + " o b",
                     [&basis, &w, p, wi](std::size_t b) {
                       const auto& e = basis.elements()[b];
                       return realize(p, closed_form_product(ProductKind::StarRightMul, e.element, e.lambda, wi, w) -
                                             closed_form_product(ProductKind::StarLeftMul, e.element, e.lambda, wi, w))
                           .matrix();
                     }});
    }
  }
  return out;
}

// o-products of F-parts, realized once: (x_l a) o (x_m b) = m^{-shift a} x_{lm} (a o b).
class FProductTable {
 public:
  FProductTable(const PeripheralSpanBasis& basis, const TruncationParams& p) : p_(p) {
    const Weights& w = basis.weights();
    for (const auto& e : basis.elements()) {
      const auto key = std::make_pair(e.i, e.j);
      if (index_.count(key)) continue;
      index_[key] = parts_.size();
      parts_.push_back(EigenTagged<Complex>::trusted(e.f_part, Phase{}));
      shifts_.push_back(static_cast<int>(e.i.size()) - static_cast<int>(e.j.size()));
    }
    const std::size_t f = parts_.size();
    products_.resize(f * f);
    for (std::size_t a = 0; a < f; ++a) {
      for (std::size_t b = 0; b < f; ++b) {
        products_[a * f + b] = realize(p, choi_effros_symbolic(w, parts_[a], parts_[b]).value).matrix();
      }
    }
    depth_ = basis_tables(p)->depth;
  }

  std::size_t part_of(const SpanElement& e) const { return index_.at({e.i, e.j}); }

  /// Matrix of (x_l a) o (x_m b).
  SparseMatrix product(const SpanElement& x, const SpanElement& y) const {
    const std::size_t a = part_of(x);
    const std::size_t b = part_of(y);
    const Phase lm = x.lambda * y.lambda;
    const Complex scalar = y.lambda.pow(-shifts_[a]).to_complex();
    SparseMatrix out = products_[a * parts_.size() + b];
    for (int c = 0; c < out.outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(out, c); it; ++it) {
        it.valueRef() *= scalar * lm.pow(depth_[static_cast<std::size_t>(it.row())]).to_complex();
      }
    }
    return out;
  }

 private:
  TruncationParams p_;
  std::map<std::pair<Word, Word>, std::size_t> index_;
  std::vector<EigenTagged<Complex>> parts_;
  std::vector<int> shifts_;
  std::vector<SparseMatrix> products_;
  std::vector<int> depth_;
};

}  // namespace

CommutantReport commutant_probe(const PeripheralSpanBasis& basis, const TruncationParams& p,
                                ProbeMode mode, double svd_tol) {
  if (basis.weights().size() != p.n) throw ValidationError("basis alphabet differs from n");
  if (!(svd_tol > 0.0)) throw ValidationError("svd_tol must be positive");
  CommutantReport report;
  report.gram_min_singular = basis.gram_min_singular(p);
  if (report.gram_min_singular < 1e-12) throw BasisError("Gram matrix of the basis is singular");

  std::vector<ConstraintFamily> families;
  std::shared_ptr<FProductTable> table;
  if (mode == ProbeMode::Center) {
    table = std::make_shared<FProductTable>(basis, p);
    for (std::size_t t = 0; t < basis.size(); ++t) {
      families.push_back({"b o c - c o b, c = " + basis.elements()[t].label(), [&basis, table, t](std::size_t b) {
                            const auto& x = basis.elements()[b];
                            const auto& y = basis.elements()[t];
                            return SparseMatrix(table->product(x, y) - table->product(y, x));
                          }});
    }
  } else {
    families = generator_families(basis, p, mode == ProbeMode::Matrix);
  }

  // Every member is homogeneous, and each constraint row reads one matrix
  // entry of one family, so rows only involve members of a single degree
  // shift: the system is block diagonal.
  std::map<int, std::vector<std::size_t>> blocks;
  for (std::size_t t = 0; t < basis.size(); ++t) {
    const auto& terms = basis.elements()[t].element.terms();
    const int shift = terms.empty() ? 0 : terms.begin()->first.degree_shift();
    blocks[shift].push_back(t);
  }
  const auto dim = static_cast<std::int64_t>(basis_dimension(p.n, p.depth));

  struct BlockResult {
    std::vector<std::size_t> members;
    Eigen::VectorXd sigma;
    DenseMatrix v;
  };
  std::vector<BlockResult> results;
  for (const auto& [shift, members] : blocks) {
    const auto cols = static_cast<Eigen::Index>(members.size());
    RowCompressor compressor(cols);
    for (const auto& fam : families) {
      std::unordered_map<std::int64_t, Eigen::Index> rows;
      std::vector<std::tuple<Eigen::Index, Eigen::Index, Complex>> entries;
      for (Eigen::Index c = 0; c < cols; ++c) {
        const SparseMatrix m = fam.fn(members[static_cast<std::size_t>(c)]);
        for (int k = 0; k < m.outerSize(); ++k) {
          for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
            if (it.value() == Complex{0.0, 0.0}) continue;
            const std::int64_t key = static_cast<std::int64_t>(k) * dim + it.row();
            auto [pos, fresh] = rows.emplace(key, static_cast<Eigen::Index>(rows.size()));
            entries.emplace_back(pos->second, c, it.value());
          }
        }
      }
      DenseMatrix chunk = DenseMatrix::Zero(static_cast<Eigen::Index>(rows.size()), cols);
      for (const auto& [r, c, v] : entries) chunk(r, c) += v;
      report.constraint_rows += static_cast<int>(chunk.rows());
      compressor.absorb(chunk);
    }
    BlockResult br{members, {}, {}};
    br.sigma = compressor.singular_values(&br.v);
    results.push_back(std::move(br));
  }

  double sigma_max = 0.0;
  for (const auto& br : results) {
    for (Eigen::Index k = 0; k < br.sigma.size(); ++k) {
      sigma_max = std::max(sigma_max, br.sigma[k]);
      report.singular_values.push_back(br.sigma[k]);
    }
  }
  std::sort(report.singular_values.begin(), report.singular_values.end(), std::greater<>());

  if (svd_tol >= 1.0) {
    report.nullspace_dimension = 0;
    report.warnings.push_back("svd_tol >= 1 is degenerate: every singular value would count as zero");
    return report;
  }

  const double threshold = svd_tol * sigma_max;
  double last_zero = -1.0;
  double first_nonzero = -1.0;
  for (const auto& br : results) {
    for (Eigen::Index k = 0; k < br.sigma.size(); ++k) {
      const double s = br.sigma[k];
      if (s < threshold || sigma_max == 0.0) {
        last_zero = std::max(last_zero, s);
        Eigen::VectorXcd wv = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
        for (std::size_t c = 0; c < br.members.size(); ++c) {
          wv[static_cast<Eigen::Index>(br.members[c])] = br.v(static_cast<Eigen::Index>(c), k);
        }
        report.witness.push_back(std::move(wv));
      } else {
        first_nonzero = first_nonzero < 0.0 ? s : std::min(first_nonzero, s);
      }
    }
  }
  report.nullspace_dimension = static_cast<int>(report.witness.size());
  if (last_zero >= 0.0 && first_nonzero > 0.0) report.gap_ratio = last_zero / first_nonzero;

  if (report.nullspace_dimension == 1) {
    Eigen::VectorXcd& wv = report.witness.front();
    wv.normalize();
    if (const auto id = basis.identity_index()) {
      const Complex c = wv[static_cast<Eigen::Index>(*id)];
      if (std::abs(c) > 0.0) wv *= std::conj(c) / std::abs(c);
      Eigen::VectorXcd target = Eigen::VectorXcd::Zero(wv.size());
      target[static_cast<Eigen::Index>(*id)] = 1.0;
      report.identity_distance = (wv - target).cwiseAbs().maxCoeff();
    }
  }

  if (!report.witness.empty()) {
    const Eigen::VectorXcd& wv = report.witness.front();
    for (const auto& fam : families) {
      SparseMatrix acc(static_cast<int>(dim), static_cast<int>(dim));
      for (std::size_t t = 0; t < basis.size(); ++t) {
        const Complex c = wv[static_cast<Eigen::Index>(t)];
        if (std::abs(c) < 1e-15) continue;
        acc += c * fam.fn(t);
      }
      double worst = 0.0;
      for (int k = 0; k < acc.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(acc, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
      }
      report.residuals.emplace_back(fam.label, worst);
    }
  }
  return report;
}

template <class S>
Element<S> fourier_component_symbolic(const Weights& w, const Element<S>& x, const Phase& lambda,
                                      int n_terms) {
  if (n_terms < 1) throw RangeError("at least one term is required");
  Element<S> z = x;
  Element<S> acc = x;
  for (int k = 1; k < n_terms; ++k) {
    z = apply_ucp_symbolic(w, z);
    acc += z * ScalarTraits<S>::from_phase(lambda.pow(-k));
  }
  if constexpr (std::is_same_v<S, GaussianRational>) {
    return acc * GaussianRational(Rational(1, n_terms));
  } else {
    return acc * Complex{1.0 / n_terms, 0.0};
  }
}

TruncatedOperator conditional_expectation(const UcpMap& m, const TruncatedOperator& x, int q,
                                          int n_terms) {
  if (q < 1 || n_terms % q != 0) throw ValidationError("the number of terms must be a multiple of q");
  return cesaro_average(m, x, n_terms);
}

template <class S>
Element<S> conditional_expectation(const Weights& w, const Element<S>& x, int q, int n_terms) {
  if (q < 1 || n_terms % q != 0) throw ValidationError("the number of terms must be a multiple of q");
  return fourier_component_symbolic(w, x, Phase{}, n_terms);
}

TruncatedOperator bimodule_inner_product(const UcpMap& m, const std::vector<NumericComponent>& x,
                                         const std::vector<NumericComponent>& y, int q,
                                         int n_terms, double tol) {
  std::optional<TruncatedOperator> sum;
  for (const auto& a : x) {
    for (const auto& b : y) {
      auto prod = choi_effros_numeric(m, a.op, a.lambda, adjoint_op(b.op), b.lambda.conj(), tol).value;
      sum = sum ? *sum + prod : prod;
    }
  }
  if (!sum) return TruncatedOperator::zero(m.params());
  return conditional_expectation(m, *sum, q, n_terms);
}

ComplexElement bimodule_inner_product(const Weights& w, const PeripheralElement<Complex>& x,
                                      const PeripheralElement<Complex>& y, int q, int n_terms) {
  return conditional_expectation(w, sum_components(circle(w, x, adjoint(y))), q, n_terms);
}

double intertwine_check(const DenseMatrix& u, const Weights& w, const TruncatedOperator& x) {
  const auto& p = x.params();
  const UcpMap standard(w, p);
  const UcpMap rotated(w, p, u);
  const auto g = make_second_quantization(p, u);
  const auto gs = adjoint_op(g);
  const auto lhs = (g * standard.apply(x)) * gs;
  const auto rhs = rotated.apply((g * x) * gs);
  return trust_distance(lhs, rhs);
}

IntertwineReport intertwine_check(const DenseMatrix& u, const Weights& w,
                                  const TruncatedOperator& x, const UnitEigenvalue& lambda,
                                  const TruncatedOperator& y, const UnitEigenvalue& mu,
                                  double tol) {
  const auto& p = x.params();
  const UcpMap standard(w, p);
  const UcpMap rotated(w, p, u);
  const auto g = make_second_quantization(p, u);
  const auto gs = adjoint_op(g);
  IntertwineReport out;
  out.ucp_residual = std::max(intertwine_check(u, w, x), intertwine_check(u, w, y));
  const auto prod = choi_effros_numeric(standard, x, lambda, y, mu, tol).value;
  const auto rotated_prod =
      choi_effros_numeric(rotated, (g * x) * gs, lambda, (g * y) * gs, mu, tol).value;
  out.product_residual = trust_distance((g * prod) * gs, rotated_prod);
  return out;
}

DenseMatrix random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix z(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) z(a, b) = Complex{normal(rng), normal(rng)};
  }
  Eigen::HouseholderQR<DenseMatrix> qr(z);
  DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(n, n);
  const DenseMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < n; ++k) {
    const Complex d = r(k, k);
    if (std::abs(d) > 0.0) q.col(k) *= d / std::abs(d);
  }
  return q;
}

template Element<Complex> closed_form_product<Complex>(ProductKind, const Element<Complex>&,
                                                       const Phase&, const Word&, const Weights&,
                                                       const Word&);
template Element<GaussianRational> closed_form_product<GaussianRational>(
    ProductKind, const Element<GaussianRational>&, const Phase&, const Word&, const Weights&,
    const Word&);
template Element<Complex> fourier_component_symbolic<Complex>(const Weights&, const Element<Complex>&,
                                                              const Phase&, int);
template Element<GaussianRational> fourier_component_symbolic<GaussianRational>(
    const Weights&, const Element<GaussianRational>&, const Phase&, int);
template Element<Complex> conditional_expectation<Complex>(const Weights&, const Element<Complex>&,
                                                           int, int);
template Element<GaussianRational> conditional_expectation<GaussianRational>(
    const Weights&, const Element<GaussianRational>&, int, int);

}  // namespace fockbound
