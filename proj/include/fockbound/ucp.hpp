#pragma once

// The ucp map P(x) = sum_i omega_i l_i^* x l_i on truncated operators, its
// iterates, ergodic averages and the iterated Choi-Effros product.

#include "fockbound/operator.hpp"

#include <optional>
#include <vector>

namespace fockbound {

class UcpMap {
 public:
  /// Standard frame: Kraus operators l_1..l_n.
  UcpMap(Weights w, const TruncationParams& p);
  /// Rotated frame: Kraus operators l_{U e_1}..l_{U e_n}.
  UcpMap(Weights w, const TruncationParams& p, const DenseMatrix& u);

  const Weights& weights() const { return weights_; }
  const TruncationParams& params() const { return params_; }
  const DenseMatrix& frame() const { return frame_; }
  /// M(a, b) = sum_i omega_i conj(U(a, i)) U(b, i).
  const DenseMatrix& coupling() const { return coupling_; }
  const std::vector<TruncatedOperator>& kraus() const { return kraus_; }

  /// Sparse entry-formula evaluation. Trust drops by one.
  TruncatedOperator apply(const TruncatedOperator& x) const;
  /// Dense sum_i omega_i K_i^H x K_i; exact only away from the top degree.
  DenseMatrix apply_reference(const DenseMatrix& x) const;

 private:
  Weights weights_;
  TruncationParams params_;
  DenseMatrix frame_;
  DenseMatrix coupling_;
  std::vector<TruncatedOperator> kraus_;
};

/// lambda^k, exact for roots of unity of moderate order.
Complex unit_power(const UnitEigenvalue& lambda, long long k);

TruncatedOperator apply_ucp(const UcpMap& m, const TruncatedOperator& x);
TruncatedOperator iterate_ucp(const UcpMap& m, const TruncatedOperator& x, int k);
/// (1/N) sum_{k<N} P^k(x).
TruncatedOperator cesaro_average(const UcpMap& m, const TruncatedOperator& x, int n_terms);
/// (1/N) sum_{k<N} lambda^{-k} P^k(x).
TruncatedOperator fourier_component(const UcpMap& m, const TruncatedOperator& x,
                                    const UnitEigenvalue& lambda, int n_terms);

std::optional<UnitEigenvalue> detect_peripheral_eigenvalue(const UcpMap& m,
                                                           const TruncatedOperator& x,
                                                           double tol = 1e-10);

struct NumericProduct {
  TruncatedOperator value;
  int steps = 0;  // P applications before consecutive iterates agreed
};

/// Iterates z_k = (lambda mu)^{-k} P^k(xy) until consecutive iterates agree
/// within tol on their common trust block. max_iter < 0 selects
/// min(trust(xy) - 1, 32).
NumericProduct choi_effros_numeric(const UcpMap& m, const TruncatedOperator& x,
                                   const UnitEigenvalue& lambda, const TruncatedOperator& y,
                                   const UnitEigenvalue& mu, double tol = 1e-10,
                                   int max_iter = -1);

}  // namespace fockbound
