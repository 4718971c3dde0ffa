#include "fockbound/operator.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>

namespace fockbound {

namespace {

void require_same(const TruncatedOperator& x, const TruncatedOperator& y) {
  if (!(x.params() == y.params())) throw ValidationError("operators live on different truncations");
}

SparseMatrix from_columns(std::size_t dim, const std::vector<std::vector<std::pair<int, Complex>>>& cols) {
  std::vector<Eigen::Triplet<Complex>> trips;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (const auto& [r, v] : cols[c]) trips.emplace_back(r, static_cast<int>(c), v);
  }
  SparseMatrix m(static_cast<int>(dim), static_cast<int>(dim));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

}  // namespace

TruncatedOperator::TruncatedOperator(const TruncationParams& p, SparseMatrix m, int trust,
                                     int raise, int lower)
    : params_(p), tables_(basis_tables(p)), matrix_(std::move(m)), trust_(trust), raise_(raise),
      lower_(lower) {
  if (matrix_.rows() != static_cast<int>(tables_->dim()) || matrix_.cols() != matrix_.rows()) {
    throw ValidationError("matrix size does not match the truncation");
  }
  if (trust_ < 0 || trust_ > p.depth) throw TrustError("trust depth outside 0..depth");
  matrix_.makeCompressed();
}

TruncatedOperator TruncatedOperator::zero(const TruncationParams& p) {
  const auto dim = static_cast<int>(basis_dimension(p.n, p.depth));
  return TruncatedOperator(p, SparseMatrix(dim, dim), p.depth, 0, 0);
}

TruncatedOperator TruncatedOperator::identity(const TruncationParams& p) {
  const auto dim = static_cast<int>(basis_dimension(p.n, p.depth));
  SparseMatrix m(dim, dim);
  m.setIdentity();
  return TruncatedOperator(p, std::move(m), p.depth, 0, 0);
}

TruncatedOperator TruncatedOperator::with_trust(int t) const {
  TruncatedOperator out = *this;
  out.trust_ = std::min(trust_, std::max(t, 0));
  return out;
}

TruncatedOperator make_identity(const TruncationParams& p) { return TruncatedOperator::identity(p); }

TruncatedOperator make_left_creation(const TruncationParams& p, int i) {
  Eigen::VectorXcd xi = Eigen::VectorXcd::Zero(p.n);
  if (i < 1 || i > p.n) throw RangeError("letter outside 1..n");
  xi[i - 1] = 1.0;
  return make_left_creation_along(p, xi);
}

TruncatedOperator make_right_creation(const TruncationParams& p, int i) {
  if (i < 1 || i > p.n) throw RangeError("letter outside 1..n");
  const auto t = basis_tables(p);
  std::vector<std::vector<std::pair<int, Complex>>> cols(t->dim());
  for (std::size_t k = 0; k < t->dim(); ++k) {
    const auto dst = t->append[static_cast<std::size_t>(i - 1)][k];
    if (dst >= 0) cols[k].emplace_back(static_cast<int>(dst), Complex{1.0, 0.0});
  }
  return TruncatedOperator(p, from_columns(t->dim(), cols), p.depth, 1, -1);
}

TruncatedOperator make_left_creation_along(const TruncationParams& p, const Eigen::VectorXcd& xi) {
  if (xi.size() != p.n) throw ValidationError("vector length differs from n");
  const auto t = basis_tables(p);
  std::vector<std::vector<std::pair<int, Complex>>> cols(t->dim());
  for (std::size_t k = 0; k < t->dim(); ++k) {
    for (int a = 1; a <= p.n; ++a) {
      const auto dst = t->prepend[static_cast<std::size_t>(a - 1)][k];
      if (dst >= 0 && xi[a - 1] != Complex{0.0, 0.0}) cols[k].emplace_back(static_cast<int>(dst), xi[a - 1]);
    }
  }
  return TruncatedOperator(p, from_columns(t->dim(), cols), p.depth, 1, -1);
}

TruncatedOperator make_vacuum_projection(const TruncationParams& p) {
  const auto dim = static_cast<int>(basis_dimension(p.n, p.depth));
  SparseMatrix m(dim, dim);
  m.insert(0, 0) = 1.0;
  return TruncatedOperator(p, std::move(m), p.depth, 0, 0);
}

TruncatedOperator make_peripheral_unitary(const TruncationParams& p, const UnitEigenvalue& lambda) {
  const auto t = basis_tables(p);
  std::vector<Complex> powers(static_cast<std::size_t>(p.depth) + 1, Complex{1.0, 0.0});
  // Exact powers when lambda is a root of unity of small order.
  const auto phase = Phase::from_complex(lambda.value());
  for (int k = 1; k <= p.depth; ++k) {
    powers[static_cast<std::size_t>(k)] =
        phase ? phase->pow(k).to_complex() : std::pow(lambda.value(), k);
  }
  std::vector<std::vector<std::pair<int, Complex>>> cols(t->dim());
  for (std::size_t k = 0; k < t->dim(); ++k) {
    cols[k].emplace_back(static_cast<int>(k), powers[static_cast<std::size_t>(t->depth[k])]);
  }
  return TruncatedOperator(p, from_columns(t->dim(), cols), p.depth, 0, 0);
}

TruncatedOperator make_second_quantization(const TruncationParams& p, const DenseMatrix& u) {
  if (u.rows() != p.n || u.cols() != p.n) throw ValidationError("U must be n x n");
  const DenseMatrix defect = u.adjoint() * u - DenseMatrix::Identity(p.n, p.n);
  if (defect.cwiseAbs().maxCoeff() > 1e-12) throw ValidationError("U is not unitary");
  const auto t = basis_tables(p);
  std::vector<std::vector<std::pair<int, Complex>>> cols(t->dim());
  for (std::size_t w = 0; w < t->dim(); ++w) {
    const int len = t->depth[w];
    const std::size_t first = depth_offset(p.n, len);
    const std::size_t count = basis_dimension(p.n, len) - first;
    const Word& ww = t->words[w];
    for (std::size_t v = first; v < first + count; ++v) {
      const Word& vv = t->words[v];
      Complex prod{1.0, 0.0};
      for (int k = 0; k < len && prod != Complex{0.0, 0.0}; ++k) {
        prod *= u(vv[static_cast<std::size_t>(k)] - 1, ww[static_cast<std::size_t>(k)] - 1);
      }
      if (prod != Complex{0.0, 0.0}) cols[w].emplace_back(static_cast<int>(v), prod);
    }
  }
  return TruncatedOperator(p, from_columns(t->dim(), cols), p.depth, 0, 0);
}

TruncatedOperator realize(const TruncationParams& p, const ComplexElement& x) {
  const auto t = basis_tables(p);
  std::vector<std::pair<MonomialShape, Complex>> terms(x.terms().begin(), x.terms().end());
  int raise = 0;
  int lower = 0;
  bool first = true;
  for (const auto& [shape, c] : terms) {
    const int s = shape.degree_shift();
    raise = first ? s : std::max(raise, s);
    lower = first ? -s : std::max(lower, -s);
    first = false;
  }
  return TruncatedOperator(p, kernels::realize(*t, terms), p.depth, raise, lower);
}

TruncatedOperator realize(const TruncationParams& p, const ExactElement& x) {
  return realize(p, x.to_complex());
}

TruncatedOperator compose(const TruncatedOperator& x, const TruncatedOperator& y) {
  require_same(x, y);
  // A product entry (J, I) sums over K with |K| <= min(|I| + raise_y, |J| + lower_x).
  const int spill = std::max(0, std::min(y.raise(), x.lower()));
  const int trust = std::min(x.trust(), y.trust()) - spill;
  if (trust < 0) throw TrustError("composition exhausts the trust depth");
  return TruncatedOperator(x.params(), kernels::compose(x.matrix(), y.matrix()), trust,
                           x.raise() + y.raise(), x.lower() + y.lower());
}

TruncatedOperator add(const TruncatedOperator& x, const TruncatedOperator& y) {
  require_same(x, y);
  SparseMatrix m = x.matrix() + y.matrix();
  return TruncatedOperator(x.params(), std::move(m), std::min(x.trust(), y.trust()),
                           std::max(x.raise(), y.raise()), std::max(x.lower(), y.lower()));
}

TruncatedOperator subtract(const TruncatedOperator& x, const TruncatedOperator& y) {
  require_same(x, y);
  SparseMatrix m = x.matrix() - y.matrix();
  return TruncatedOperator(x.params(), std::move(m), std::min(x.trust(), y.trust()),
                           std::max(x.raise(), y.raise()), std::max(x.lower(), y.lower()));
}

TruncatedOperator scale(Complex c, const TruncatedOperator& x) {
  SparseMatrix m = x.matrix() * c;
  return TruncatedOperator(x.params(), std::move(m), x.trust(), x.raise(), x.lower());
}

TruncatedOperator adjoint_op(const TruncatedOperator& x) {
  SparseMatrix m = x.matrix().adjoint();
  return TruncatedOperator(x.params(), std::move(m), x.trust(), x.lower(), x.raise());
}

Coefficient coefficient(const TruncatedOperator& x, const Word& i, const Word& j) {
  const auto col = index_of(x.params(), i);
  const auto row = index_of(x.params(), j);
  const bool trusted = static_cast<int>(i.size()) <= x.trust() && static_cast<int>(j.size()) <= x.trust();
  return {x.matrix().coeff(static_cast<int>(row), static_cast<int>(col)), trusted};
}

Complex vacuum_state(const TruncatedOperator& x) { return x.matrix().coeff(0, 0); }

double trust_distance(const TruncatedOperator& x, const TruncatedOperator& y) {
  require_same(x, y);
  const std::size_t block = x.tables().count_up_to(std::min(x.trust(), y.trust()));
  return kernels::max_abs_diff(x.matrix(), y.matrix(), block);
}

double trust_norm(const TruncatedOperator& x) {
  const SparseMatrix zero(x.matrix().rows(), x.matrix().cols());
  return kernels::max_abs_diff(x.matrix(), zero, x.trust_block());
}

double depth_distance(const TruncatedOperator& shallow, const TruncatedOperator& deep) {
  if (shallow.params().n != deep.params().n) throw ValidationError("alphabets differ");
  const int t = std::min({shallow.trust(), deep.trust(), shallow.params().depth});
  return kernels::max_abs_diff(shallow.matrix(), deep.matrix(), shallow.tables().count_up_to(t));
}

void write_csv(const TruncatedOperator& x, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path.string());
  out << "row_word,col_word,re,im\n" << std::setprecision(17);
  const auto block = static_cast<int>(x.trust_block());
  const auto& words = x.tables().words;
  for (int c = 0; c < block; ++c) {
    for (SparseMatrix::InnerIterator it(x.matrix(), c); it; ++it) {
      if (it.row() >= block || it.value() == Complex{0.0, 0.0}) continue;
      out << '"' << words[static_cast<std::size_t>(it.row())].to_string() << "\",\""
          << words[static_cast<std::size_t>(c)].to_string() << "\"," << it.value().real() << ','
          << it.value().imag() << '\n';
    }
  }
}

}  // namespace fockbound
