#pragma once

// Words over the alphabet {1..n}, the weight system omega and the indexing of
// the depth-truncated Fock basis.

#include "fockbound/scalar.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fockbound {

using Letter = std::uint16_t;
using BasisIndex = std::uint32_t;

class Word;

class Alphabet {
 public:
  explicit Alphabet(int n);
  int size() const { return n_; }
  bool contains(int letter) const { return letter >= 1 && letter <= n_; }
  /// Throws RangeError if some letter lies outside 1..n.
  void validate(const Word& w) const;

 private:
  int n_;
};

/// Finite sequence of letters; the empty word indexes the vacuum.
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<int> letters);
  explicit Word(std::vector<Letter> letters) : letters_(std::move(letters)) {}

  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  Letter operator[](std::size_t i) const { return letters_[i]; }
  Letter front() const { return letters_.front(); }
  Letter back() const { return letters_.back(); }
  const std::vector<Letter>& letters() const { return letters_; }
  auto begin() const { return letters_.begin(); }
  auto end() const { return letters_.end(); }

  void push_back(Letter l) { letters_.push_back(l); }

  /// "()" for the empty word, digits for single-digit alphabets, otherwise
  /// comma separated letters.
  std::string to_string() const;

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

 private:
  std::vector<Letter> letters_;
};

Word concat(const Word& a, const Word& b);
Word reverse(const Word& w);
/// First m letters; RangeError unless 0 <= m <= |w|.
Word prefix(const Word& w, std::size_t m);
/// Last m letters.
Word suffix(const Word& w, std::size_t m);
Word repeat(const Word& w, std::size_t k);
bool starts_with(const Word& w, const Word& head);
bool ends_with(const Word& w, const Word& tail);

/// Length first, then lexicographic: the order of the truncated basis.
bool basis_less(const Word& a, const Word& b);

/// Positive weights summing to one. Optionally carries the exact rational
/// values the symbolic engine needs in exact mode.
class Weights {
 public:
  explicit Weights(std::vector<double> omega);
  explicit Weights(std::vector<Rational> omega);
  static Weights uniform(int n);

  int size() const { return static_cast<int>(omega_.size()); }
  /// 1-based access, matching letters.
  double operator()(int letter) const { return omega_.at(static_cast<std::size_t>(letter - 1)); }
  const std::vector<double>& values() const { return omega_; }
  bool has_exact() const { return exact_.has_value(); }
  const Rational& exact(int letter) const;

 private:
  std::vector<double> omega_;
  std::optional<std::vector<Rational>> exact_;
};

/// Product of the weights of the letters of j; 1 for the empty word.
double weight_of_word(const Weights& w, const Word& j);
Rational exact_weight_of_word(const Weights& w, const Word& j);

struct TruncationParams {
  int n = 2;
  int depth = 1;

  TruncationParams() = default;
  TruncationParams(int n_, int depth_);
  /// sum_{k=0}^{depth} n^k; CapacityError when it overflows BasisIndex.
  std::size_t dim() const;
  friend bool operator==(const TruncationParams&, const TruncationParams&) = default;
};

std::size_t basis_dimension(int n, int depth);
/// Index of the first word of length k.
std::size_t depth_offset(int n, int k);

std::vector<Word> enumerate_basis(const TruncationParams& p);
BasisIndex index_of(const TruncationParams& p, const Word& w);
Word word_at(const TruncationParams& p, std::size_t k);

/// Precomputed index arithmetic for kernels working on basis indices.
struct BasisTables {
  TruncationParams params;
  std::vector<Word> words;
  std::vector<int> depth;                  // |w_k|
  std::vector<int> head;                   // first letter, 0 for the vacuum
  std::vector<std::int64_t> tail;          // index of w_k minus its first letter
  std::vector<std::vector<std::int64_t>> prepend;  // [a-1][k] -> index of a w_k or -1
  std::vector<std::vector<std::int64_t>> append;   // [a-1][k] -> index of w_k a or -1

  explicit BasisTables(const TruncationParams& p);
  std::size_t dim() const { return words.size(); }
  /// Number of basis words of length <= t.
  std::size_t count_up_to(int t) const;
};

}  // namespace fockbound
