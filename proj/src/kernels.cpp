#include "fockbound/kernels.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace fockbound {

std::shared_ptr<const BasisTables> basis_tables(const TruncationParams& p) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const BasisTables>> registry;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = registry[{p.n, p.depth}];
  if (!slot) slot = std::make_shared<const BasisTables>(p);
  return slot;
}

namespace kernels {

namespace {

using Column = std::vector<std::pair<int, Complex>>;

SparseMatrix assemble(std::size_t dim, const std::vector<Column>& cols) {
  const int n = static_cast<int>(dim);
  SparseMatrix m(n, n);
  Eigen::VectorXi counts(n);
  for (int c = 0; c < n; ++c) counts[c] = static_cast<int>(cols[static_cast<std::size_t>(c)].size());
  m.reserve(counts);
  for (int c = 0; c < n; ++c) {
    for (const auto& [r, v] : cols[static_cast<std::size_t>(c)]) m.insert(r, c) = v;
  }
  m.makeCompressed();
  return m;
}

// Dense accumulator with a touched list; emits sorted nonzero entries.
class Accumulator {
 public:
  explicit Accumulator(std::size_t dim) : values_(dim, Complex{0.0, 0.0}), seen_(dim, 0) {}

  void add(int row, Complex v) {
    if (!seen_[static_cast<std::size_t>(row)]) {
      seen_[static_cast<std::size_t>(row)] = 1;
      touched_.push_back(row);
    }
    values_[static_cast<std::size_t>(row)] += v;
  }

  void flush(Column& out) {
    std::sort(touched_.begin(), touched_.end());
    out.clear();
    out.reserve(touched_.size());
    for (int r : touched_) {
      const auto k = static_cast<std::size_t>(r);
      if (values_[k] != Complex{0.0, 0.0}) out.emplace_back(r, values_[k]);
      values_[k] = Complex{0.0, 0.0};
      seen_[k] = 0;
    }
    touched_.clear();
  }

 private:
  std::vector<Complex> values_;
  std::vector<char> seen_;
  std::vector<int> touched_;
};

}  // namespace

SparseMatrix compose(const SparseMatrix& x, const SparseMatrix& y) {
  const auto dim = static_cast<std::size_t>(y.cols());
  std::vector<Column> cols(dim);
#pragma omp parallel
  {
    Accumulator acc(static_cast<std::size_t>(x.rows()));
#pragma omp for schedule(dynamic, 16)
    for (int c = 0; c < static_cast<int>(dim); ++c) {
      for (SparseMatrix::InnerIterator yk(y, c); yk; ++yk) {
        const Complex f = yk.value();
        for (SparseMatrix::InnerIterator xr(x, yk.row()); xr; ++xr) acc.add(xr.row(), xr.value() * f);
      }
      acc.flush(cols[static_cast<std::size_t>(c)]);
    }
  }
  return assemble(dim, cols);
}

SparseMatrix ucp_apply(const BasisTables& t, const DenseMatrix& coupling, const SparseMatrix& x) {
  const std::size_t dim = t.dim();
  const int n = t.params.n;
  std::vector<Column> cols(dim);
#pragma omp parallel
  {
    Accumulator acc(dim);
#pragma omp for schedule(dynamic, 16)
    for (int c = 0; c < static_cast<int>(dim); ++c) {
      const auto ci = static_cast<std::size_t>(c);
      if (t.depth[ci] >= t.params.depth) continue;
      for (int b = 1; b <= n; ++b) {
        const auto src = static_cast<int>(t.prepend[static_cast<std::size_t>(b - 1)][ci]);
        for (SparseMatrix::InnerIterator it(x, src); it; ++it) {
          const auto r = static_cast<std::size_t>(it.row());
          if (t.depth[r] == 0) continue;
          const Complex m = coupling(t.head[r] - 1, b - 1);
          if (m == Complex{0.0, 0.0}) continue;
          acc.add(static_cast<int>(t.tail[r]), m * it.value());
        }
      }
      acc.flush(cols[ci]);
    }
  }
  return assemble(dim, cols);
}

std::optional<std::pair<std::int64_t, Complex>> apply_monomial(const BasisTables& t,
                                                               const MonomialShape& s,
                                                               std::size_t w) {
  const Word& word = t.words[w];
  const auto& L = word.letters();
  std::size_t lo = 0;
  std::size_t hi = L.size();
  // (l_M)^* strips the prefix M.
  if (s.la.size() > hi) return std::nullopt;
  for (std::size_t j = 0; j < s.la.size(); ++j) {
    if (L[j] != s.la[j]) return std::nullopt;
  }
  lo = s.la.size();
  // (r_K)^* strips the suffix K^op.
  if (s.ra.size() > hi - lo) return std::nullopt;
  for (std::size_t j = 0; j < s.ra.size(); ++j) {
    if (L[hi - 1 - j] != s.ra[j]) return std::nullopt;
  }
  hi -= s.ra.size();
  if (s.eps && hi != lo) return std::nullopt;

  const std::size_t len = s.lc.size() + (hi - lo) + s.rc.size();
  if (len > static_cast<std::size_t>(t.params.depth)) return std::nullopt;
  const auto n = static_cast<std::int64_t>(t.params.n);
  std::int64_t rank = 0;
  auto push = [&](Letter l) { rank = rank * n + (l - 1); };
  for (Letter l : s.lc) push(l);
  for (std::size_t j = lo; j < hi; ++j) push(L[j]);
  // r_J appends J^op.
  for (auto it = s.rc.letters().rbegin(); it != s.rc.letters().rend(); ++it) push(*it);
  const auto index = static_cast<std::int64_t>(depth_offset(t.params.n, static_cast<int>(len))) + rank;
  Complex factor{1.0, 0.0};
  if (!s.phase.is_one()) factor = s.phase.pow(static_cast<std::int64_t>(len)).to_complex();
  return std::make_pair(index, factor);
}

SparseMatrix realize(const BasisTables& t,
                     const std::vector<std::pair<MonomialShape, Complex>>& terms) {
  const std::size_t dim = t.dim();
  std::vector<Column> cols(dim);
#pragma omp parallel
  {
    Accumulator acc(dim);
#pragma omp for schedule(dynamic, 32)
    for (int c = 0; c < static_cast<int>(dim); ++c) {
      for (const auto& [shape, coeff] : terms) {
        const auto img = apply_monomial(t, shape, static_cast<std::size_t>(c));
        if (img) acc.add(static_cast<int>(img->first), coeff * img->second);
      }
      acc.flush(cols[static_cast<std::size_t>(c)]);
    }
  }
  return assemble(dim, cols);
}

double max_abs_diff(const SparseMatrix& x, const SparseMatrix& y, std::size_t block) {
  const int b = static_cast<int>(std::min<std::size_t>(block, static_cast<std::size_t>(x.cols())));
  double worst = 0.0;
  for (int c = 0; c < b; ++c) {
    SparseMatrix::InnerIterator a(x, c);
    SparseMatrix::InnerIterator e(y, c);
    while ((a && a.row() < b) || (e && e.row() < b)) {
      const bool take_a = a && a.row() < b && (!(e && e.row() < b) || a.row() <= e.row());
      const bool take_e = e && e.row() < b && (!(a && a.row() < b) || e.row() <= a.row());
      Complex d{0.0, 0.0};
      if (take_a) d += a.value();
      if (take_e) d -= e.value();
      worst = std::max(worst, std::abs(d));
      if (take_a) ++a;
      if (take_e) ++e;
    }
  }
  return worst;
}

}  // namespace kernels

namespace reference {

DenseMatrix compose(const DenseMatrix& x, const DenseMatrix& y) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index inner = x.cols();
  const Eigen::Index cols = y.cols();
  DenseMatrix out = DenseMatrix::Zero(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index k = 0; k < inner; ++k) {
      const Complex f = y(k, j);
      if (f == Complex{0.0, 0.0}) continue;
      for (Eigen::Index i = 0; i < rows; ++i) out(i, j) += x(i, k) * f;
    }
  }
  return out;
}

DenseMatrix ucp_apply(const std::vector<DenseMatrix>& kraus, const std::vector<double>& omega,
                      const DenseMatrix& x) {
  DenseMatrix out = DenseMatrix::Zero(x.rows(), x.cols());
  for (std::size_t i = 0; i < kraus.size(); ++i) {
    out += omega[i] * compose(compose(kraus[i].adjoint(), x), kraus[i]);
  }
  return out;
}

DenseMatrix generator_matrix(const TruncationParams& p, const Generator& g) {
  const auto t = basis_tables(p);
  const auto dim = static_cast<Eigen::Index>(t->dim());
  DenseMatrix m = DenseMatrix::Zero(dim, dim);
  const Complex one{1.0, 0.0};
  for (Eigen::Index k = 0; k < dim; ++k) {
    const auto ki = static_cast<std::size_t>(k);
    switch (g.kind) {
      case GenKind::LeftCreate:
        if (t->prepend[g.letter - 1u][ki] >= 0) m(t->prepend[g.letter - 1u][ki], k) = one;
        break;
      case GenKind::RightCreate:
        if (t->append[g.letter - 1u][ki] >= 0) m(t->append[g.letter - 1u][ki], k) = one;
        break;
      case GenKind::Vacuum:
        if (k == 0) m(0, 0) = one;
        break;
      case GenKind::Peripheral:
        m(k, k) = g.phase.pow(t->depth[ki]).to_complex();
        break;
      case GenKind::LeftAnnihilate:
      case GenKind::RightAnnihilate:
        break;
    }
  }
  if (g.is_annihilation()) return generator_matrix(p, g.adjoint()).adjoint();
  return m;
}

DenseMatrix realize(const TruncationParams& p, const ComplexElement& x) {
  const auto dim = static_cast<Eigen::Index>(basis_dimension(p.n, p.depth));
  DenseMatrix out = DenseMatrix::Zero(dim, dim);
  for (const auto& [shape, coeff] : x.terms()) {
    DenseMatrix term = DenseMatrix::Identity(dim, dim);
    for (const Generator& g : shape.generators()) term = compose(term, generator_matrix(p, g));
    out += coeff * term;
  }
  return out;
}

}  // namespace reference

}  // namespace fockbound
