#pragma once

// Experiments on the peripheral boundary: closed-form products with right
// creations, vacuum-state identities, eigenspace factorization, the commutant
// probe, the ergodic conditional expectation and the bimodule inner product.

#include "fockbound/algebra.hpp"
#include "fockbound/operator.hpp"
#include "fockbound/ucp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fockbound {

// Products of x in E_lambda with right creations. With s_t = conj(lambda)^t,
// W_t = (I^op)_t and R_t = I_{|I|-t}:
//   r_I o x   = r_I x   + sum_t s_t w_{W_t} r_{R_t} p x l_{W_t}
//   x o r_I^* = x r_I^* + sum_t s_t w_{W_t} l_{W_t}^* x p r_{R_t}^*
enum class ProductKind {
  RightMul,      // x o r_I = x r_I
  StarLeftMul,   // r_I^* o x = r_I^* x
  Sandwich,      // r_J^* o x o r_I = r_J^* x r_I
  LeftMul,       // r_I o x
  StarRightMul,  // x o r_I^*
};

std::string to_string(ProductKind k);
/// Accepts right_mul, star_left_mul, sandwich, left_mul, star_right_mul.
ProductKind parse_product_kind(const std::string& s);

/// Right-hand side of the closed form for the given kind, x in E_lambda. The
/// sandwich kind uses j as the outer annihilating word. ValidationError if i
/// is empty.
template <class S>
Element<S> closed_form_product(ProductKind kind, const Element<S>& x, const Phase& lambda,
                               const Word& i, const Weights& w, const Word& j = {});
TruncatedOperator closed_form_product(ProductKind kind, const TruncatedOperator& x,
                                      const UnitEigenvalue& lambda, const Word& i,
                                      const Weights& w, const Word& j = {});

/// The iterated product matching a closed-form kind; x must lie in E_lambda.
NumericProduct iterated_product(const UcpMap& m, ProductKind kind, const TruncatedOperator& x,
                                const UnitEigenvalue& lambda, const Word& i, const Word& j = {},
                                double tol = 1e-10);

// For x in E_lambda and s = conj(lambda)^{|J|}:
//   phi(x o r_J^*) = s w_J <x Omega, r_J Omega> = s w_J phi(r_J^* o x)
//   phi(r_J o x)   = s w_J <x r_J Omega, Omega> = s w_J phi(x o r_J)
struct PhiReport {
  Complex star_lhs, star_mid, star_rhs;
  Complex plain_lhs, plain_mid, plain_rhs;
  double error = 0.0;
  // Same identities without the factor s; they agree with the above when
  // lambda^{|J|} = 1 or the vacuum coefficient vanishes.
  double unphased_error = 0.0;
};

PhiReport phi_identity_check(const UcpMap& m, const TruncatedOperator& x,
                             const UnitEigenvalue& lambda, const Word& j, double tol = 1e-10);

struct DeltaReport {
  double delta_residual = 0.0;   // trust distance of r_I^* x r_J to delta_{I,J} x
  double vacuum_residual = 0.0;  // |<x r_J Omega, Omega>| for |J| >= 1, else 0
  double max_residual() const { return std::max(delta_residual, vacuum_residual); }
};

/// ValidationError when |I| != |J|.
DeltaReport delta_compression_check(const TruncatedOperator& x, const Word& i, const Word& j);

/// Max over the trust block of |<x e_I, e_J> - delta_{I,J} <x Omega, Omega>|.
double scalar_coefficient_residual(const TruncatedOperator& x);

struct Factorization {
  TruncatedOperator a;
  double eigen_residual = 0.0;        // trust distance of P(x) to lambda x
  double fixed_point_residual = 0.0;  // trust distance of P(a) to a
};

/// a = x_lambda^* x with a fixed-point certificate. ValidationError if x is not
/// in E_lambda within tol, FactorizationError if a is not fixed within tol.
Factorization eigenspace_factorize(const UcpMap& m, const TruncatedOperator& x,
                                   const UnitEigenvalue& lambda, double tol = 1e-10);

struct EigenProductReport {
  TruncatedOperator lhs;  // (x_lambda a) o (b x_mu)
  TruncatedOperator rhs;  // x_lambda (a o b) x_mu
  double residual = 0.0;
  int steps = 0;
};

EigenProductReport eigen_product_check(const UcpMap& m, const TruncatedOperator& a,
                                       const TruncatedOperator& b, const UnitEigenvalue& lambda,
                                       const UnitEigenvalue& mu, double tol = 1e-10);

/// Member x_lambda (r_I o r_J^*) of the peripheral test family.
struct SpanElement {
  Phase lambda;
  Word i;
  Word j;
  ComplexElement f_part;   // r_I o r_J^*
  ComplexElement element;  // x_lambda f_part
  std::string label() const;
};

/// r_I o r_J^*, the fixed point generated by r_I r_J^*.
ComplexElement f_element(const Weights& w, const Word& i, const Word& j);

class PeripheralSpanBasis {
 public:
  /// All x_lambda (r_I o r_J^*) with lambda a q-th root of unity and
  /// |I|, |J| <= k, except pairs where I and J are both nonempty and end in
  /// the letter n (those are combinations of the others by the Cuntz
  /// relation sum_i r_i o r_i^* = 1).
  PeripheralSpanBasis(const Weights& w, int q, int k);
  /// Explicit members given as (lambda, I, J).
  PeripheralSpanBasis(const Weights& w, std::vector<std::tuple<Phase, Word, Word>> members);

  const Weights& weights() const { return weights_; }
  int lambda_order() const { return q_; }
  int word_bound() const { return k_; }
  const std::vector<SpanElement>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  /// Position of the identity (lambda = 1, I = J = ()), if present.
  std::optional<std::size_t> identity_index() const;

  /// Smallest singular value of the Gram matrix of the realized members,
  /// relative to the largest.
  double gram_min_singular(const TruncationParams& p) const;

 private:
  Weights weights_;
  int q_ = 0;
  int k_ = 0;
  std::vector<SpanElement> elements_;
};

enum class ProbeMode {
  Generators,  // o-commutation with r_i and r_i^*
  Center,      // o-commutation with every basis member
  Matrix,      // plain matrix commutation with r_i and r_i^* (diagnostic)
};

std::string to_string(ProbeMode m);
ProbeMode parse_probe_mode(const std::string& s);

struct CommutantReport {
  int nullspace_dimension = 0;
  std::vector<double> singular_values;  // descending
  std::vector<Eigen::VectorXcd> witness;  // orthonormal nullspace basis
  std::optional<double> gap_ratio;        // sigma_last_zero / sigma_first_nonzero
  std::optional<double> identity_distance;  // max |witness - e_identity| when dimension is 1
  std::vector<std::pair<std::string, double>> residuals;  // per constraint family
  double gram_min_singular = 0.0;
  int constraint_rows = 0;
  std::vector<std::string> warnings;
};

/// Numerical nullspace of the o-commutation constraints on the span of the
/// basis. svd_tol is relative to the largest singular value; svd_tol >= 1 is
/// degenerate and reports dimension 0 with a warning. BasisError when the
/// Gram matrix is singular.
CommutantReport commutant_probe(const PeripheralSpanBasis& basis, const TruncationParams& p,
                                ProbeMode mode = ProbeMode::Generators, double svd_tol = 1e-8);

/// Element of the span with the given coefficient vector.
ComplexElement span_combination(const PeripheralSpanBasis& basis, const Eigen::VectorXcd& c);

/// (1/N) sum_{k<N} lambda^{-k} P^k(x), symbolically.
template <class S>
Element<S> fourier_component_symbolic(const Weights& w, const Element<S>& x, const Phase& lambda,
                                      int n_terms);

/// E(x) as the lambda = 1 Fourier component over N terms; ValidationError
/// unless q divides N.
TruncatedOperator conditional_expectation(const UcpMap& m, const TruncatedOperator& x, int q,
                                          int n_terms);
template <class S>
Element<S> conditional_expectation(const Weights& w, const Element<S>& x, int q, int n_terms);

/// An eigen-tagged numeric component.
struct NumericComponent {
  TruncatedOperator op;
  UnitEigenvalue lambda;
};

/// E(x o y^*) with o evaluated by iteration, component by component.
TruncatedOperator bimodule_inner_product(const UcpMap& m, const std::vector<NumericComponent>& x,
                                         const std::vector<NumericComponent>& y, int q,
                                         int n_terms, double tol = 1e-10);
/// Symbolic version: E(x o y^*) with o from the symbolic iteration.
ComplexElement bimodule_inner_product(const Weights& w, const PeripheralElement<Complex>& x,
                                      const PeripheralElement<Complex>& y, int q, int n_terms);

struct IntertwineReport {
  double ucp_residual = 0.0;      // Gamma P(x) Gamma^* vs P'(Gamma x Gamma^*)
  double product_residual = 0.0;  // Gamma (x o y) Gamma^* vs (Gamma x Gamma^*) o' (Gamma y Gamma^*)
};

/// Residual of Gamma_U P(x) Gamma_U^* - P'(Gamma_U x Gamma_U^*), where P' is
/// built from the rotated creations l_{U e_i}.
double intertwine_check(const DenseMatrix& u, const Weights& w, const TruncatedOperator& x);
/// Also compares the o-products of two eigen elements under the two maps.
IntertwineReport intertwine_check(const DenseMatrix& u, const Weights& w,
                                  const TruncatedOperator& x, const UnitEigenvalue& lambda,
                                  const TruncatedOperator& y, const UnitEigenvalue& mu,
                                  double tol = 1e-10);

/// Haar-distributed n x n unitary from the given engine.
DenseMatrix random_unitary(int n, std::mt19937_64& rng);

}  // namespace fockbound
