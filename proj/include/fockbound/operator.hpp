#pragma once

// Operators on the depth-truncated Fock space with a trust depth.
//
// Entry (J, I) = <x e_I, e_J> is certified equal to the untruncated value when
// |I|, |J| <= trust. raise and lower bound the degree change of the
// untruncated operator: nonzero entries satisfy -lower <= |J| - |I| <= raise.

#include "fockbound/algebra.hpp"
#include "fockbound/kernels.hpp"
#include "fockbound/word.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace fockbound {

class TruncatedOperator {
 public:
  TruncatedOperator(const TruncationParams& p, SparseMatrix m, int trust, int raise, int lower);

  static TruncatedOperator zero(const TruncationParams& p);
  static TruncatedOperator identity(const TruncationParams& p);

  const TruncationParams& params() const { return params_; }
  const BasisTables& tables() const { return *tables_; }
  std::size_t dim() const { return tables_->dim(); }
  const SparseMatrix& matrix() const { return matrix_; }
  DenseMatrix dense() const { return DenseMatrix(matrix_); }
  int trust() const { return trust_; }
  int raise() const { return raise_; }
  int lower() const { return lower_; }
  /// Number of leading basis vectors inside the trust block.
  std::size_t trust_block() const { return tables_->count_up_to(trust_); }

  /// Copy with trust lowered to min(trust, t).
  TruncatedOperator with_trust(int t) const;

 private:
  TruncationParams params_;
  std::shared_ptr<const BasisTables> tables_;
  SparseMatrix matrix_;
  int trust_;
  int raise_;
  int lower_;
};

TruncatedOperator make_identity(const TruncationParams& p);
TruncatedOperator make_left_creation(const TruncationParams& p, int i);
TruncatedOperator make_right_creation(const TruncationParams& p, int i);
/// l_xi = sum_a xi_a l_a.
TruncatedOperator make_left_creation_along(const TruncationParams& p, const Eigen::VectorXcd& xi);
TruncatedOperator make_vacuum_projection(const TruncationParams& p);
/// Diagonal, lambda^{|I|} on e_I.
TruncatedOperator make_peripheral_unitary(const TruncationParams& p, const UnitEigenvalue& lambda);
/// Gamma_U: U^{(x)k} on the degree-k block. ValidationError unless U is unitary.
TruncatedOperator make_second_quantization(const TruncationParams& p, const DenseMatrix& u);

/// Exact compression of a symbolic element (trust = depth).
TruncatedOperator realize(const TruncationParams& p, const ComplexElement& x);
TruncatedOperator realize(const TruncationParams& p, const ExactElement& x);

TruncatedOperator compose(const TruncatedOperator& x, const TruncatedOperator& y);
TruncatedOperator add(const TruncatedOperator& x, const TruncatedOperator& y);
TruncatedOperator subtract(const TruncatedOperator& x, const TruncatedOperator& y);
TruncatedOperator scale(Complex c, const TruncatedOperator& x);
TruncatedOperator adjoint_op(const TruncatedOperator& x);

inline TruncatedOperator operator*(const TruncatedOperator& x, const TruncatedOperator& y) {
  return compose(x, y);
}
inline TruncatedOperator operator+(const TruncatedOperator& x, const TruncatedOperator& y) {
  return add(x, y);
}
inline TruncatedOperator operator-(const TruncatedOperator& x, const TruncatedOperator& y) {
  return subtract(x, y);
}
inline TruncatedOperator operator*(Complex c, const TruncatedOperator& x) { return scale(c, x); }

struct Coefficient {
  Complex value;
  bool trusted = true;
};

/// <x e_I, e_J>; RangeError if a word is longer than the depth.
Coefficient coefficient(const TruncatedOperator& x, const Word& i, const Word& j);
/// <x Omega, Omega>.
Complex vacuum_state(const TruncatedOperator& x);
/// Max entry difference over the common trust block.
double trust_distance(const TruncatedOperator& x, const TruncatedOperator& y);
/// Max entry modulus over the trust block.
double trust_norm(const TruncatedOperator& x);

/// Max entry difference between operators built at two depths, over the
/// words both certify. ValidationError when alphabets differ.
double depth_distance(const TruncatedOperator& shallow, const TruncatedOperator& deep);

/// CSV rows (row_word, col_word, re, im) for the nonzero trusted entries.
void write_csv(const TruncatedOperator& x, const std::filesystem::path& path);

}  // namespace fockbound
