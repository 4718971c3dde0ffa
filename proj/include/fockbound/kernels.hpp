#pragma once

// Low-level kernels on the truncated Fock basis. The parallel versions work on
// sparse column-major matrices, one output column per task, and are
// deterministic regardless of the thread count. The dense serial versions in
// fockbound::reference exist to check them.

#include "fockbound/algebra.hpp"
#include "fockbound/word.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <utility>
#include <vector>

namespace fockbound {

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;
using DenseMatrix = Eigen::MatrixXcd;

/// Shared, immutable index tables for the given truncation.
std::shared_ptr<const BasisTables> basis_tables(const TruncationParams& p);

namespace kernels {

/// x * y.
SparseMatrix compose(const SparseMatrix& x, const SparseMatrix& y);

/// Entry formula of the ucp map in a frame with coupling matrix M:
///   out(J, I) = sum_{a,b} M(a,b) x(aJ, bI).
/// Columns I of maximal depth are left empty.
SparseMatrix ucp_apply(const BasisTables& t, const DenseMatrix& coupling, const SparseMatrix& x);

/// Exact compression of a linear combination of normal-form monomials.
SparseMatrix realize(const BasisTables& t,
                     const std::vector<std::pair<MonomialShape, Complex>>& terms);

/// max |x(r, c) - y(r, c)| over r, c < block.
double max_abs_diff(const SparseMatrix& x, const SparseMatrix& y, std::size_t block);

/// Image of the monomial on e_w: the index of the output word and the phase
/// factor, or nothing when the monomial kills e_w or leaves the truncation.
std::optional<std::pair<std::int64_t, Complex>> apply_monomial(const BasisTables& t,
                                                               const MonomialShape& s,
                                                               std::size_t w);

}  // namespace kernels

namespace reference {

/// Triple-loop product.
DenseMatrix compose(const DenseMatrix& x, const DenseMatrix& y);

/// sum_i omega_i K_i^H x K_i with dense Kraus matrices.
DenseMatrix ucp_apply(const std::vector<DenseMatrix>& kraus, const std::vector<double>& omega,
                      const DenseMatrix& x);

/// Dense matrix of a single generator on the truncation.
DenseMatrix generator_matrix(const TruncationParams& p, const Generator& g);

/// Product of generator matrices, term by term. Only exact on the block the
/// trust rule certifies.
DenseMatrix realize(const TruncationParams& p, const ComplexElement& x);

}  // namespace reference

}  // namespace fockbound
