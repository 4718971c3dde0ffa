#include "fockbound/ucp.hpp"

#include <cmath>

namespace fockbound {

UcpMap::UcpMap(Weights w, const TruncationParams& p)
    : UcpMap(std::move(w), p, DenseMatrix::Identity(p.n, p.n)) {}

UcpMap::UcpMap(Weights w, const TruncationParams& p, const DenseMatrix& u)
    : weights_(std::move(w)), params_(p), frame_(u) {
  if (weights_.size() != p.n) throw ValidationError("weights length differs from n");
  if (u.rows() != p.n || u.cols() != p.n) throw ValidationError("frame must be n x n");
  const DenseMatrix defect = u.adjoint() * u - DenseMatrix::Identity(p.n, p.n);
  if (defect.cwiseAbs().maxCoeff() > 1e-12) throw ValidationError("frame is not unitary");
  coupling_ = DenseMatrix::Zero(p.n, p.n);
  for (int i = 0; i < p.n; ++i) {
    for (int a = 0; a < p.n; ++a) {
      for (int b = 0; b < p.n; ++b) coupling_(a, b) += weights_(i + 1) * std::conj(u(a, i)) * u(b, i);
    }
  }
  kraus_.reserve(static_cast<std::size_t>(p.n));
  for (int i = 0; i < p.n; ++i) kraus_.push_back(make_left_creation_along(p, u.col(i)));
}

TruncatedOperator UcpMap::apply(const TruncatedOperator& x) const {
  if (!(x.params() == params_)) throw ValidationError("operator lives on a different truncation");
  if (x.trust() < 1) throw TrustError("trust exhausted before applying the ucp map");
  // Entry (J, I) reads x at (aJ, bI), so one level of certification is used up.
  return TruncatedOperator(params_, kernels::ucp_apply(x.tables(), coupling_, x.matrix()),
                           x.trust() - 1, x.raise(), x.lower());
}

DenseMatrix UcpMap::apply_reference(const DenseMatrix& x) const {
  std::vector<DenseMatrix> dense;
  dense.reserve(kraus_.size());
  for (const auto& k : kraus_) dense.push_back(k.dense());
  return reference::ucp_apply(dense, weights_.values(), x);
}

Complex unit_power(const UnitEigenvalue& lambda, long long k) {
  if (const auto phase = Phase::from_complex(lambda.value())) return phase->pow(k).to_complex();
  return std::pow(lambda.value(), static_cast<double>(k));
}

TruncatedOperator apply_ucp(const UcpMap& m, const TruncatedOperator& x) { return m.apply(x); }

TruncatedOperator iterate_ucp(const UcpMap& m, const TruncatedOperator& x, int k) {
  if (k < 0) throw RangeError("negative iteration count");
  if (x.trust() < k) throw TrustError("trust exhausted before " + std::to_string(k) + " iterations");
  TruncatedOperator z = x;
  for (int j = 0; j < k; ++j) z = m.apply(z);
  return z;
}

TruncatedOperator fourier_component(const UcpMap& m, const TruncatedOperator& x,
                                    const UnitEigenvalue& lambda, int n_terms) {
  if (n_terms < 1) throw RangeError("at least one term is required");
  if (x.trust() < n_terms) throw TrustError("trust exhausted before the average completes");
  TruncatedOperator z = x;
  TruncatedOperator acc = x;
  for (int k = 1; k < n_terms; ++k) {
    z = m.apply(z);
    acc = acc + unit_power(lambda, -k) * z;
  }
  return (1.0 / n_terms) * acc;
}

TruncatedOperator cesaro_average(const UcpMap& m, const TruncatedOperator& x, int n_terms) {
  return fourier_component(m, x, UnitEigenvalue(1.0), n_terms);
}

std::optional<UnitEigenvalue> detect_peripheral_eigenvalue(const UcpMap& m,
                                                           const TruncatedOperator& x,
                                                           double tol) {
  const TruncatedOperator px = m.apply(x);
  const int block = static_cast<int>(px.trust_block());
  for (int c = 0; c < block; ++c) {
    for (SparseMatrix::InnerIterator it(x.matrix(), c); it; ++it) {
      if (it.row() >= block || std::abs(it.value()) <= tol) continue;
      const Complex lambda = px.matrix().coeff(it.row(), c) / it.value();
      if (std::abs(std::abs(lambda) - 1.0) >= tol) return std::nullopt;
      if (trust_distance(px, lambda * x) >= tol) return std::nullopt;
      return UnitEigenvalue(lambda / std::abs(lambda));
    }
  }
  return std::nullopt;
}

NumericProduct choi_effros_numeric(const UcpMap& m, const TruncatedOperator& x,
                                   const UnitEigenvalue& lambda, const TruncatedOperator& y,
                                   const UnitEigenvalue& mu, double tol, int max_iter) {
  if (trust_distance(m.apply(x), lambda.value() * x) >= tol) {
    throw ValidationError("left factor is not in the stated eigenspace");
  }
  if (trust_distance(m.apply(y), mu.value() * y) >= tol) {
    throw ValidationError("right factor is not in the stated eigenspace");
  }
  TruncatedOperator z = compose(x, y);
  if (z.trust() < 2) throw TrustError("product trust below 2");
  if (max_iter < 0) max_iter = std::min(z.trust() - 1, 32);
  const Complex factor = unit_power(lambda * mu, -1);
  for (int k = 0; k < max_iter && z.trust() >= 1; ++k) {
    TruncatedOperator next = factor * m.apply(z);
    if (trust_distance(next, z) < tol) return {z.with_trust(next.trust()), k};
    z = std::move(next);
  }
  throw ConvergenceError("Choi-Effros iteration did not settle before trust or max_iter ran out");
}

}  // namespace fockbound
