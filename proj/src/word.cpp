#include "fockbound/word.hpp"

#include "fockbound/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fockbound {

namespace {

constexpr std::uint64_t kMaxDimension = std::numeric_limits<std::int32_t>::max();

}  // namespace

Alphabet::Alphabet(int n) : n_(n) {
  if (n < 1) throw RangeError("alphabet size must be at least 1");
}

void Alphabet::validate(const Word& w) const {
  for (Letter l : w) {
    if (!contains(l)) {
      throw RangeError("letter " + std::to_string(l) + " outside alphabet 1.." +
                       std::to_string(n_));
    }
  }
}

Word::Word(std::initializer_list<int> letters) {
  letters_.reserve(letters.size());
  for (int l : letters) {
    if (l < 1 || l > std::numeric_limits<Letter>::max()) {
      throw RangeError("letters are positive integers");
    }
    letters_.push_back(static_cast<Letter>(l));
  }
}

std::string Word::to_string() const {
  if (letters_.empty()) return "()";
  const bool digits = std::all_of(letters_.begin(), letters_.end(), [](Letter l) { return l < 10; });
  std::string out;
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    if (!digits && i > 0) out += ',';
    out += std::to_string(letters_[i]);
  }
  return out;
}

Word concat(const Word& a, const Word& b) {
  std::vector<Letter> out(a.letters());
  out.insert(out.end(), b.begin(), b.end());
  return Word(std::move(out));
}

Word reverse(const Word& w) {
  return Word(std::vector<Letter>(w.letters().rbegin(), w.letters().rend()));
}

Word prefix(const Word& w, std::size_t m) {
  if (m > w.size()) {
    throw RangeError("prefix length " + std::to_string(m) + " exceeds word length " +
                     std::to_string(w.size()));
  }
  return Word(std::vector<Letter>(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(m)));
}

Word suffix(const Word& w, std::size_t m) {
  if (m > w.size()) throw RangeError("suffix length exceeds word length");
  return Word(std::vector<Letter>(w.end() - static_cast<std::ptrdiff_t>(m), w.end()));
}

Word repeat(const Word& w, std::size_t k) {
  std::vector<Letter> out;
  out.reserve(w.size() * k);
  for (std::size_t i = 0; i < k; ++i) out.insert(out.end(), w.begin(), w.end());
  return Word(std::move(out));
}

bool starts_with(const Word& w, const Word& head) {
  return head.size() <= w.size() && std::equal(head.begin(), head.end(), w.begin());
}

bool ends_with(const Word& w, const Word& tail) {
  return tail.size() <= w.size() &&
         std::equal(tail.begin(), tail.end(), w.end() - static_cast<std::ptrdiff_t>(tail.size()));
}

bool basis_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

Weights::Weights(std::vector<double> omega) : omega_(std::move(omega)) {
  if (omega_.empty()) throw ValidationError("weights must be non-empty");
  double sum = 0.0;
  for (double w : omega_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ValidationError("weights must sum to 1 (got " + std::to_string(sum) + ")");
  }
}

Weights::Weights(std::vector<Rational> omega) {
  if (omega.empty()) throw ValidationError("weights must be non-empty");
  Rational sum = 0;
  for (const auto& w : omega) {
    if (w <= 0) throw ValidationError("weights must be positive");
    sum += w;
    omega_.push_back(static_cast<double>(w));
  }
  if (sum != 1) throw ValidationError("exact weights must sum to 1");
  exact_ = std::move(omega);
}

Weights Weights::uniform(int n) {
  if (n < 1) throw ValidationError("uniform weights need n >= 1");
  return Weights(std::vector<Rational>(static_cast<std::size_t>(n), Rational(1, n)));
}

const Rational& Weights::exact(int letter) const {
  if (!exact_) throw ValidationError("weights carry no exact rational values");
  return exact_->at(static_cast<std::size_t>(letter - 1));
}

double weight_of_word(const Weights& w, const Word& j) {
  double out = 1.0;
  for (Letter l : j) out *= w(l);
  return out;
}

Rational exact_weight_of_word(const Weights& w, const Word& j) {
  Rational out = 1;
  for (Letter l : j) out *= w.exact(l);
  return out;
}

TruncationParams::TruncationParams(int n_, int depth_) : n(n_), depth(depth_) {
  if (n < 1) throw RangeError("alphabet size must be at least 1");
  if (depth < 1) throw RangeError("truncation depth must be at least 1");
}

std::size_t TruncationParams::dim() const { return basis_dimension(n, depth); }

std::size_t basis_dimension(int n, int depth) {
  if (n < 1 || depth < 0) throw RangeError("invalid truncation parameters");
  std::uint64_t total = 0;
  std::uint64_t level = 1;
  for (int k = 0; k <= depth; ++k) {
    total += level;
    if (total > kMaxDimension) {
      throw CapacityError("basis dimension for n=" + std::to_string(n) + ", depth=" +
                          std::to_string(depth) + " exceeds the index capacity");
    }
    if (k < depth) {
      if (level > kMaxDimension / static_cast<std::uint64_t>(n)) {
        throw CapacityError("basis dimension for n=" + std::to_string(n) + ", depth=" +
                            std::to_string(depth) + " exceeds the index capacity");
      }
      level *= static_cast<std::uint64_t>(n);
    }
  }
  return static_cast<std::size_t>(total);
}

std::size_t depth_offset(int n, int k) { return k == 0 ? 0 : basis_dimension(n, k - 1); }

std::vector<Word> enumerate_basis(const TruncationParams& p) {
  const std::size_t dim = p.dim();
  std::vector<Word> out;
  out.reserve(dim);
  out.emplace_back();
  std::size_t level_begin = 0;
  for (int k = 1; k <= p.depth; ++k) {
    const std::size_t level_end = out.size();
    // Lexicographic order within a length: extend each shorter word in order.
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (int a = 1; a <= p.n; ++a) {
        out.push_back(concat(out[i], Word{a}));
      }
    }
    level_begin = level_end;
  }
  return out;
}

BasisIndex index_of(const TruncationParams& p, const Word& w) {
  if (static_cast<int>(w.size()) > p.depth) {
    throw RangeError("word " + w.to_string() + " longer than truncation depth " +
                     std::to_string(p.depth));
  }
  std::uint64_t rank = 0;
  for (Letter l : w) {
    if (l < 1 || l > p.n) throw RangeError("letter outside alphabet");
    rank = rank * static_cast<std::uint64_t>(p.n) + (l - 1U);
  }
  return static_cast<BasisIndex>(depth_offset(p.n, static_cast<int>(w.size())) + rank);
}

Word word_at(const TruncationParams& p, std::size_t k) {
  const std::size_t dim = p.dim();
  if (k >= dim) {
    throw RangeError("basis index " + std::to_string(k) + " out of range (dim " +
                     std::to_string(dim) + ")");
  }
  int len = 0;
  while (depth_offset(p.n, len + 1) <= k) ++len;
  std::uint64_t rank = k - depth_offset(p.n, len);
  std::vector<Letter> letters(static_cast<std::size_t>(len));
  for (int t = len - 1; t >= 0; --t) {
    letters[static_cast<std::size_t>(t)] = static_cast<Letter>(rank % static_cast<std::uint64_t>(p.n) + 1);
    rank /= static_cast<std::uint64_t>(p.n);
  }
  return Word(std::move(letters));
}

BasisTables::BasisTables(const TruncationParams& p) : params(p), words(enumerate_basis(p)) {
  const std::size_t dim = words.size();
  depth.resize(dim);
  head.assign(dim, 0);
  tail.assign(dim, -1);
  prepend.assign(static_cast<std::size_t>(p.n), std::vector<std::int64_t>(dim, -1));
  append.assign(static_cast<std::size_t>(p.n), std::vector<std::int64_t>(dim, -1));
  for (std::size_t k = 0; k < dim; ++k) {
    const Word& w = words[k];
    depth[k] = static_cast<int>(w.size());
    if (!w.empty()) {
      head[k] = w.front();
      tail[k] = index_of(p, suffix(w, w.size() - 1));
    }
    if (depth[k] < p.depth) {
      for (int a = 1; a <= p.n; ++a) {
        prepend[static_cast<std::size_t>(a - 1)][k] = index_of(p, concat(Word{a}, w));
        append[static_cast<std::size_t>(a - 1)][k] = index_of(p, concat(w, Word{a}));
      }
    }
  }
}

std::size_t BasisTables::count_up_to(int t) const {
  if (t < 0) return 0;
  if (t >= params.depth) return words.size();
  return basis_dimension(params.n, t);
}

}  // namespace fockbound
