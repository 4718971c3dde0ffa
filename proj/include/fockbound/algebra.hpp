#pragma once

// Exact symbolic *-algebra generated by the left/right creations, their
// adjoints, the vacuum projection and the diagonal peripheral unitaries x_theta.
//
// Every element is kept in the normal form
//
//     coeff * x_theta l_I r_J p^eps (r_K)^* (l_M)^*
//
// obtained by exhaustively applying the Toeplitz relations below. The normal
// form is canonical for the rewrite system but not for operators (e.g.
// sum_i l_i l_i^* + p is the identity operator yet a different normal form), so
// symbolic equality implies operator equality and not conversely.

#include "fockbound/errors.hpp"
#include "fockbound/scalar.hpp"
#include "fockbound/word.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fockbound {

enum class GenKind : std::uint8_t {
  Peripheral,
  LeftCreate,
  RightCreate,
  Vacuum,
  RightAnnihilate,
  LeftAnnihilate,
};

struct Generator {
  GenKind kind = GenKind::Vacuum;
  Letter letter = 0;
  Phase phase{};

  static Generator l(int i) { return {GenKind::LeftCreate, static_cast<Letter>(i), {}}; }
  static Generator l_star(int i) { return {GenKind::LeftAnnihilate, static_cast<Letter>(i), {}}; }
  static Generator r(int i) { return {GenKind::RightCreate, static_cast<Letter>(i), {}}; }
  static Generator r_star(int i) { return {GenKind::RightAnnihilate, static_cast<Letter>(i), {}}; }
  static Generator vacuum() { return {GenKind::Vacuum, 0, {}}; }
  static Generator peripheral(Phase theta) { return {GenKind::Peripheral, 0, theta}; }

  bool is_creation() const { return kind == GenKind::LeftCreate || kind == GenKind::RightCreate; }
  bool is_annihilation() const {
    return kind == GenKind::LeftAnnihilate || kind == GenKind::RightAnnihilate;
  }
  Generator adjoint() const;
  std::string to_string() const;

  friend bool operator==(const Generator&, const Generator&) = default;
};

/// Shape of a normal-form monomial x_phase l_lc r_rc p^eps (r_ra)^* (l_la)^*.
struct MonomialShape {
  Phase phase{};
  Word lc;
  Word rc;
  bool eps = false;
  Word ra;
  Word la;

  /// Net change of word length, identical on every basis vector it does not kill.
  int degree_shift() const {
    return static_cast<int>(lc.size() + rc.size()) - static_cast<int>(ra.size() + la.size());
  }
  std::vector<Generator> generators() const;
  std::string to_string() const;

  friend bool operator==(const MonomialShape&, const MonomialShape&) = default;
  friend auto operator<=>(const MonomialShape&, const MonomialShape&) = default;
};

struct MonomialShapeHash {
  std::size_t operator()(const MonomialShape& s) const;
};

/// One outcome of a rewrite: factor * replacement.
struct RewriteBranch {
  Phase factor{};
  std::vector<Generator> replacement;
};

/// Applies the rule for the adjacent pair (a, b), if any. An empty result
/// means the pair rewrites to zero.
std::optional<std::vector<RewriteBranch>> reduce_pair(const Generator& a, const Generator& b);

/// True when no rule applies anywhere in the word.
bool is_normal_word(std::span<const Generator> word);
/// Reads the shape of an irreducible word. ValidationError if reducible.
MonomialShape shape_of_normal_word(std::span<const Generator> word);

enum class RewriteOrder { Leftmost, Random };

template <class S>
class Element;

template <class S>
Element<S> normal_form(std::span<const Generator> word, const S& coeff,
                       RewriteOrder order = RewriteOrder::Leftmost,
                       std::mt19937_64* rng = nullptr);

/// Finite linear combination of normal-form monomials.
template <class S>
class Element {
 public:
  using Scalar = S;
  using Traits = ScalarTraits<S>;
  using TermMap = std::map<MonomialShape, S>;

  Element() = default;

  static Element identity() { return monomial(MonomialShape{}, Traits::one()); }
  static Element monomial(const MonomialShape& shape, const S& coeff) {
    Element e;
    e.add_term(shape, coeff);
    return e;
  }
  static Element generator(const Generator& g) {
    const Generator word[] = {g};
    return normal_form<S>(word, Traits::one());
  }
  static Element scalar(const S& c) { return monomial(MonomialShape{}, c); }

  // Convenience constructors for word products.
  static Element l_word(const Word& w) { return monomial(MonomialShape{{}, w, {}, false, {}, {}}, Traits::one()); }
  static Element r_word(const Word& w) { return monomial(MonomialShape{{}, {}, w, false, {}, {}}, Traits::one()); }
  static Element r_word_star(const Word& w) { return monomial(MonomialShape{{}, {}, {}, false, w, {}}, Traits::one()); }
  static Element l_word_star(const Word& w) { return monomial(MonomialShape{{}, {}, {}, false, {}, w}, Traits::one()); }
  static Element vacuum() { return monomial(MonomialShape{{}, {}, {}, true, {}, {}}, Traits::one()); }
  static Element peripheral(const Phase& theta) {
    return monomial(MonomialShape{theta, {}, {}, false, {}, {}}, Traits::one());
  }

  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const MonomialShape& shape, const S& coeff) {
    auto it = terms_.find(shape);
    if (it == terms_.end()) {
      if (!Traits::is_zero(coeff)) terms_.emplace(shape, coeff);
      return;
    }
    it->second += coeff;
    if (Traits::is_zero(it->second)) terms_.erase(it);
  }

  S coefficient(const MonomialShape& shape) const {
    auto it = terms_.find(shape);
    return it == terms_.end() ? Traits::zero() : it->second;
  }

  Element& operator+=(const Element& o) {
    for (const auto& [shape, c] : o.terms_) add_term(shape, c);
    return *this;
  }
  Element& operator-=(const Element& o) {
    for (const auto& [shape, c] : o.terms_) add_term(shape, Traits::zero() - c);
    return *this;
  }
  Element& operator*=(const S& c) {
    if (Traits::is_zero(c)) {
      terms_.clear();
      return *this;
    }
    TermMap out;
    for (auto& [shape, v] : terms_) {
      S p = v * c;
      if (!Traits::is_zero(p)) out.emplace(shape, std::move(p));
    }
    terms_ = std::move(out);
    return *this;
  }
  friend Element operator+(Element a, const Element& b) { return a += b; }
  friend Element operator-(Element a, const Element& b) { return a -= b; }
  friend Element operator*(Element a, const S& c) { return a *= c; }
  friend Element operator*(const S& c, Element a) { return a *= c; }
  friend Element operator*(const Element& a, const Element& b) { return multiply(a, b); }

  /// Exact term-map equality (coefficients compared exactly).
  friend bool operator==(const Element& a, const Element& b) { return a.terms_ == b.terms_; }

  /// Largest |coefficient difference| over the union of shapes.
  double max_coeff_diff(const Element& o) const;

  Element adjoint() const;

  /// Elementwise conversion to complex coefficients.
  Element<Complex> to_complex() const;

  std::string to_string() const;

 private:
  TermMap terms_;
};

using ComplexElement = Element<Complex>;
using ExactElement = Element<GaussianRational>;

/// Normal form of the product; bilinear extension of the rewrite system.
template <class S>
Element<S> multiply(const Element<S>& x, const Element<S>& y);

/// Normal form of the product of two coefficient-one monomials (memoised per
/// thread).
template <class S>
const Element<S>& monomial_product(const MonomialShape& a, const MonomialShape& b);

/// omega_i as a coefficient of type S (exact mode needs exact weights).
template <class S>
S weight_scalar(const Weights& w, int letter);

/// sum_i omega_i l_i^* x l_i, fully normal-formed.
template <class S>
Element<S> apply_ucp_symbolic(const Weights& w, const Element<S>& x);

/// lambda with |lambda| = 1 such that P(x) = lambda x term by term within tol
/// (exact equality in exact mode), if one exists.
template <class S>
std::optional<UnitEigenvalue> eigen_check_symbolic(const Weights& w, const Element<S>& x,
                                                   double tol = 1e-12);

/// Element together with a root-of-unity eigenvalue, verified on construction.
template <class S>
class EigenTagged {
 public:
  /// ValidationError unless P(x) = lambda x.
  EigenTagged(const Weights& w, Element<S> x, Phase lambda, double tol = 1e-12);
  /// Detects the eigenvalue; ValidationError when x is not a peripheral
  /// eigen-element with a root-of-unity eigenvalue.
  static EigenTagged detect(const Weights& w, Element<S> x, double tol = 1e-12);
  /// Skips verification; for elements that are eigen by construction.
  static EigenTagged trusted(Element<S> x, Phase lambda) { return EigenTagged(std::move(x), lambda); }

  const Element<S>& element() const { return element_; }
  const Phase& lambda() const { return lambda_; }

 private:
  EigenTagged(Element<S> x, Phase lambda) : element_(std::move(x)), lambda_(lambda) {}
  Element<S> element_;
  Phase lambda_;
};

template <class S>
struct SymbolicProduct {
  Element<S> value;
  int steps = 0;  // number of P applications before the orbit stabilised
};

/// Iterates z_0 = xy, z_{k+1} = (lambda mu)^{-1} P(z_k) until z_{k+1} = z_k
/// (exact in exact mode, max coefficient difference < 1e-12 otherwise).
/// ConvergenceError after max_iter steps.
template <class S>
SymbolicProduct<S> choi_effros_symbolic(const Weights& w, const EigenTagged<S>& x,
                                        const EigenTagged<S>& y, int max_iter = 64);

/// Sum of eigen-tagged components (a peripheral element).
template <class S>
using PeripheralElement = std::vector<EigenTagged<S>>;

template <class S>
Element<S> sum_components(const PeripheralElement<S>& x);

/// Bilinear extension of the Choi-Effros product over components; the result
/// is regrouped by eigenvalue.
template <class S>
PeripheralElement<S> circle(const Weights& w, const PeripheralElement<S>& x,
                            const PeripheralElement<S>& y, int max_iter = 64);

/// Componentwise adjoint; the eigenvalue of each component is conjugated.
template <class S>
PeripheralElement<S> adjoint(const PeripheralElement<S>& x);

/// Clears the per-thread product and P caches.
void clear_symbolic_caches();

}  // namespace fockbound
