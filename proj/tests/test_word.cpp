#include "fockbound/kernels.hpp"
#include "fockbound/word.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace fockbound;

namespace {

// Independent enumeration: all words of each length in lexicographic order,
// generated by counting in base n.
std::vector<Word> brute_force_basis(int n, int depth) {
  std::vector<Word> out{Word{}};
  for (int len = 1; len <= depth; ++len) {
    std::vector<int> digits(static_cast<std::size_t>(len), 0);
    while (true) {
      std::vector<Letter> letters;
      for (int d : digits) letters.push_back(static_cast<Letter>(d + 1));
      out.emplace_back(std::move(letters));
      int pos = len - 1;
      while (pos >= 0 && digits[static_cast<std::size_t>(pos)] == n - 1) digits[static_cast<std::size_t>(pos--)] = 0;
      if (pos < 0) break;
      ++digits[static_cast<std::size_t>(pos)];
    }
  }
  return out;
}

Word random_word(std::mt19937_64& rng, int n, int max_len) {
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<int> letter(1, n);
  Word w;
  const int l = len(rng);
  for (int k = 0; k < l; ++k) w.push_back(static_cast<Letter>(letter(rng)));
  return w;
}

}  // namespace

TEST_CASE("concat") {
  CHECK(concat(Word{1, 2}, Word{2, 1}) == Word{1, 2, 2, 1});
  CHECK(concat(Word{}, Word{3}) == Word{3});
  CHECK(concat(Word{2}, Word{}) == Word{2});
}

TEST_CASE("reverse") {
  CHECK(reverse(Word{1, 2, 3}) == Word{3, 2, 1});
  CHECK(reverse(Word{}) == Word{});
  CHECK(reverse(Word{2, 2}) == Word{2, 2});
}

TEST_CASE("prefix") {
  CHECK(prefix(Word{1, 2, 3}, 2) == Word{1, 2});
  CHECK(prefix(Word{1, 2, 3}, 0) == Word{});
  CHECK(prefix(Word{1}, 1) == Word{1});
  CHECK_THROWS_AS(prefix(Word{1}, 2), RangeError);
}

TEST_CASE("repeat") {
  CHECK(repeat(Word{1, 2}, 2) == Word{1, 2, 1, 2});
  CHECK(repeat(Word{1, 2}, 0) == Word{});
}

TEST_CASE("word laws on random words") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 500; ++t) {
    const Word a = random_word(rng, 3, 5);
    const Word b = random_word(rng, 3, 5);
    CHECK(reverse(reverse(a)) == a);
    CHECK(reverse(concat(a, b)) == concat(reverse(b), reverse(a)));
    CHECK(concat(a, b).size() == a.size() + b.size());
    for (std::size_t m = 0; m <= a.size(); ++m) CHECK(concat(prefix(a, m), suffix(a, a.size() - m)) == a);
  }
}

TEST_CASE("weights") {
  const Weights w(std::vector<double>{0.3, 0.7});
  CHECK(weight_of_word(w, Word{}) == doctest::Approx(1.0));
  CHECK(weight_of_word(w, Word{1, 2, 2}) == doctest::Approx(0.3 * 0.7 * 0.7));
  CHECK_THROWS_AS(Weights(std::vector<double>{0.7, 0.2}), ValidationError);
  CHECK_THROWS_AS(Weights(std::vector<double>{1.2, -0.2}), ValidationError);
  const Weights u = Weights::uniform(3);
  CHECK(u.has_exact());
  CHECK(exact_weight_of_word(u, Word{1, 3}) == Rational(1, 9));
}

TEST_CASE("basis enumeration matches an independent enumeration") {
  for (int n : {1, 2, 3}) {
    for (int d : {1, 3, 5}) {
      const TruncationParams p(n, d);
      const auto basis = enumerate_basis(p);
      const auto oracle = brute_force_basis(n, d);
      REQUIRE(basis.size() == oracle.size());
      CHECK(basis == oracle);
      CHECK(p.dim() == oracle.size());
      CHECK(std::is_sorted(basis.begin(), basis.end(), basis_less));
      for (std::size_t k = 0; k < oracle.size(); ++k) {
        CHECK(index_of(p, oracle[k]) == k);
        CHECK(word_at(p, k) == oracle[k]);
      }
    }
  }
}

TEST_CASE("index examples") {
  const TruncationParams p(2, 3);
  CHECK(index_of(p, Word{}) == 0);
  CHECK(index_of(p, Word{1}) == 1);
  CHECK(index_of(p, Word{2}) == 2);
  CHECK(index_of(p, Word{1, 1}) == 3);
  CHECK(index_of(p, Word{2, 2, 2}) == 14);
  CHECK_THROWS(index_of(p, Word{1, 1, 1, 1}));
  CHECK_THROWS(index_of(p, Word{3}));
}

TEST_CASE("indices are stable under deeper truncation") {
  const auto shallow = enumerate_basis(TruncationParams(2, 6));
  const TruncationParams deep(2, 8);
  for (std::size_t k = 0; k < shallow.size(); ++k) CHECK(index_of(deep, shallow[k]) == k);
}

TEST_CASE("basis tables") {
  const TruncationParams p(3, 4);
  const BasisTables t(p);
  REQUIRE(t.dim() == p.dim());
  for (std::size_t k = 0; k < t.dim(); ++k) {
    const Word& w = t.words[k];
    CHECK(t.depth[k] == static_cast<int>(w.size()));
    for (int a = 1; a <= 3; ++a) {
      const auto pre = t.prepend[static_cast<std::size_t>(a - 1)][k];
      const auto app = t.append[static_cast<std::size_t>(a - 1)][k];
      if (w.size() == 4) {
        CHECK(pre == -1);
        CHECK(app == -1);
      } else {
        CHECK(t.words[static_cast<std::size_t>(pre)] == concat(Word{a}, w));
        CHECK(t.words[static_cast<std::size_t>(app)] == concat(w, Word{a}));
      }
    }
  }
  CHECK(t.count_up_to(2) == 13);
  CHECK(basis_tables(p).get() == basis_tables(p).get());
}
