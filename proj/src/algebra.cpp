#include "fockbound/algebra.hpp"

#include <algorithm>
#include <sstream>

namespace fockbound {

namespace {

// Exponent s(g) with g x_phi = phi^{s(g)} x_phi g.
int phase_exponent(GenKind k) {
  switch (k) {
    case GenKind::LeftCreate:
    case GenKind::RightCreate:
      return -1;
    case GenKind::LeftAnnihilate:
    case GenKind::RightAnnihilate:
      return 1;
    default:
      return 0;
  }
}

std::vector<RewriteBranch> delta_identity(Letter i, Letter j) {
  if (i != j) return {};
  return {RewriteBranch{}};
}

std::vector<RewriteBranch> commute_with_vacuum(Generator first, Generator second, Letter i,
                                               Letter j) {
  std::vector<RewriteBranch> out;
  out.push_back(RewriteBranch{Phase{}, {first, second}});
  if (i == j) out.push_back(RewriteBranch{Phase{}, {Generator::vacuum()}});
  return out;
}

void hash_combine(std::size_t& seed, std::size_t v) {
  seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

void hash_word(std::size_t& seed, const Word& w) {
  hash_combine(seed, w.size());
  for (Letter l : w) hash_combine(seed, l);
}

// Leftmost reducible position, or all positions when random order is used.
// A position i refers to the pair (i, i+1); a unary x_1 at i is encoded as
// i + word.size().
void reducible_positions(std::span<const Generator> word, bool first_only,
                         std::vector<std::size_t>& out) {
  out.clear();
  const std::size_t n = word.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (word[i].kind == GenKind::Peripheral && word[i].phase.is_one()) {
      out.push_back(i + n);
      if (first_only) return;
    }
    if (i + 1 < n && reduce_pair(word[i], word[i + 1]).has_value()) {
      out.push_back(i);
      if (first_only) return;
    }
  }
}

struct PairHash {
  std::size_t operator()(const std::pair<MonomialShape, MonomialShape>& p) const {
    std::size_t seed = MonomialShapeHash{}(p.first);
    hash_combine(seed, MonomialShapeHash{}(p.second));
    return seed;
  }
};

constexpr std::size_t kCacheLimit = 400000;

template <class S>
struct SymbolicCaches {
  std::unordered_map<std::pair<MonomialShape, MonomialShape>, Element<S>, PairHash> products;
  std::unordered_map<MonomialShape, std::vector<Element<S>>, MonomialShapeHash> ucp_pieces;
  int n_for_pieces = -1;
};

template <class S>
SymbolicCaches<S>& caches() {
  thread_local SymbolicCaches<S> c;
  return c;
}

template <class S>
bool orbit_stable(const Element<S>& a, const Element<S>& b) {
  if constexpr (std::is_same_v<S, GaussianRational>) {
    return a == b;
  } else {
    return a.max_coeff_diff(b) < 1e-12;
  }
}

template <class S>
std::string scalar_string(const S& c) {
  std::ostringstream os;
  if constexpr (std::is_same_v<S, GaussianRational>) {
    os << "(" << c.re.str() << (c.im < 0 ? "" : "+") << c.im.str() << "i)";
  } else {
    os << "(" << c.real() << (c.imag() < 0 ? "" : "+") << c.imag() << "i)";
  }
  return os.str();
}

}  // namespace

Generator Generator::adjoint() const {
  switch (kind) {
    case GenKind::LeftCreate:
      return l_star(letter);
    case GenKind::LeftAnnihilate:
      return l(letter);
    case GenKind::RightCreate:
      return r_star(letter);
    case GenKind::RightAnnihilate:
      return r(letter);
    case GenKind::Vacuum:
      return vacuum();
    case GenKind::Peripheral:
      return peripheral(phase.inverse());
  }
  return *this;
}

std::string Generator::to_string() const {
  switch (kind) {
    case GenKind::LeftCreate:
      return "l_" + std::to_string(letter);
    case GenKind::LeftAnnihilate:
      return "l*_" + std::to_string(letter);
    case GenKind::RightCreate:
      return "r_" + std::to_string(letter);
    case GenKind::RightAnnihilate:
      return "r*_" + std::to_string(letter);
    case GenKind::Vacuum:
      return "p0";
    case GenKind::Peripheral:
      return "x[" + phase.to_string() + "]";
  }
  return "?";
}

std::vector<Generator> MonomialShape::generators() const {
  std::vector<Generator> out;
  out.reserve(lc.size() + rc.size() + ra.size() + la.size() + 2);
  if (!phase.is_one()) out.push_back(Generator::peripheral(phase));
  for (Letter l : lc) out.push_back(Generator::l(l));
  for (Letter l : rc) out.push_back(Generator::r(l));
  if (eps) out.push_back(Generator::vacuum());
  // (r_K)^* = r*_{k_m} ... r*_{k_1}
  for (auto it = ra.letters().rbegin(); it != ra.letters().rend(); ++it) {
    out.push_back(Generator::r_star(*it));
  }
  for (auto it = la.letters().rbegin(); it != la.letters().rend(); ++it) {
    out.push_back(Generator::l_star(*it));
  }
  return out;
}

std::string MonomialShape::to_string() const {
  std::string out;
  auto add = [&out](const std::string& s) {
    if (!out.empty()) out += ' ';
    out += s;
  };
  if (!phase.is_one()) add("x[" + phase.to_string() + "]");
  if (!lc.empty()) add("l_" + lc.to_string());
  if (!rc.empty()) add("r_" + rc.to_string());
  if (eps) add("p0");
  if (!ra.empty()) add("r*_" + ra.to_string());
  if (!la.empty()) add("l*_" + la.to_string());
  return out.empty() ? "1" : out;
}

std::size_t MonomialShapeHash::operator()(const MonomialShape& s) const {
  std::size_t seed = static_cast<std::size_t>(s.phase.num()) * 1315423911ULL +
                     static_cast<std::size_t>(s.phase.den());
  hash_word(seed, s.lc);
  hash_word(seed, s.rc);
  hash_combine(seed, s.eps ? 1U : 0U);
  hash_word(seed, s.ra);
  hash_word(seed, s.la);
  return seed;
}

std::optional<std::vector<RewriteBranch>> reduce_pair(const Generator& a, const Generator& b) {
  using K = GenKind;
  if (b.kind == K::Peripheral) {
    if (a.kind == K::Peripheral) {
      const Phase prod = a.phase * b.phase;
      if (prod.is_one()) return std::vector<RewriteBranch>{RewriteBranch{}};
      return std::vector<RewriteBranch>{RewriteBranch{Phase{}, {Generator::peripheral(prod)}}};
    }
    // g x_phi = phi^{s(g)} x_phi g
    return std::vector<RewriteBranch>{
        RewriteBranch{b.phase.pow(phase_exponent(a.kind)), {b, a}}};
  }
  if (a.kind == K::Peripheral) return std::nullopt;

  switch (a.kind) {
    case K::LeftAnnihilate:
      switch (b.kind) {
        case K::LeftCreate:  // l_i^* l_j = delta_ij
          return delta_identity(a.letter, b.letter);
        case K::RightCreate:  // l_i^* r_j = r_j l_i^* + delta_ij p
          return commute_with_vacuum(b, a, a.letter, b.letter);
        case K::Vacuum:  // l_i^* p = 0
          return std::vector<RewriteBranch>{};
        case K::RightAnnihilate:  // l_i^* r_j^* = r_j^* l_i^*
          return std::vector<RewriteBranch>{RewriteBranch{Phase{}, {b, a}}};
        default:
          return std::nullopt;
      }
    case K::RightAnnihilate:
      switch (b.kind) {
        case K::RightCreate:  // r_i^* r_j = delta_ij
          return delta_identity(a.letter, b.letter);
        case K::LeftCreate:  // r_i^* l_j = l_j r_i^* + delta_ij p
          return commute_with_vacuum(b, a, a.letter, b.letter);
        case K::Vacuum:  // r_i^* p = 0
          return std::vector<RewriteBranch>{};
        default:
          return std::nullopt;
      }
    case K::Vacuum:
      switch (b.kind) {
        case K::LeftCreate:
        case K::RightCreate:  // p l_i = p r_i = 0
          return std::vector<RewriteBranch>{};
        case K::Vacuum:
          return std::vector<RewriteBranch>{RewriteBranch{Phase{}, {b}}};
        default:
          return std::nullopt;
      }
    case K::RightCreate:
      if (b.kind == K::LeftCreate) {  // r_j l_i = l_i r_j
        return std::vector<RewriteBranch>{RewriteBranch{Phase{}, {b, a}}};
      }
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

bool is_normal_word(std::span<const Generator> word) {
  std::vector<std::size_t> pos;
  reducible_positions(word, true, pos);
  return pos.empty();
}

MonomialShape shape_of_normal_word(std::span<const Generator> word) {
  if (!is_normal_word(word)) throw ValidationError("word is not in normal form");
  MonomialShape s;
  std::size_t i = 0;
  if (i < word.size() && word[i].kind == GenKind::Peripheral) s.phase = word[i++].phase;
  std::vector<Letter> ra, la;
  for (; i < word.size(); ++i) {
    const Generator& g = word[i];
    switch (g.kind) {
      case GenKind::LeftCreate:
        s.lc.push_back(g.letter);
        break;
      case GenKind::RightCreate:
        s.rc.push_back(g.letter);
        break;
      case GenKind::Vacuum:
        s.eps = true;
        break;
      case GenKind::RightAnnihilate:
        ra.push_back(g.letter);
        break;
      case GenKind::LeftAnnihilate:
        la.push_back(g.letter);
        break;
      case GenKind::Peripheral:
        throw ValidationError("peripheral generator away from the left end");
    }
  }
  s.ra = reverse(Word(std::move(ra)));
  s.la = reverse(Word(std::move(la)));
  return s;
}

template <class S>
Element<S> normal_form(std::span<const Generator> word, const S& coeff, RewriteOrder order,
                       std::mt19937_64* rng) {
  using Traits = ScalarTraits<S>;
  Element<S> out;
  struct Item {
    S coeff;
    std::vector<Generator> word;
  };
  std::vector<Item> stack;
  stack.push_back(Item{coeff, std::vector<Generator>(word.begin(), word.end())});
  std::vector<std::size_t> positions;
  const bool first_only = order == RewriteOrder::Leftmost || rng == nullptr;

  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();
    if (Traits::is_zero(item.coeff)) continue;
    reducible_positions(item.word, first_only, positions);
    if (positions.empty()) {
      out.add_term(shape_of_normal_word(item.word), item.coeff);
      continue;
    }
    std::size_t pick = positions.front();
    if (!first_only) {
      std::uniform_int_distribution<std::size_t> dist(0, positions.size() - 1);
      pick = positions[dist(*rng)];
    }
    const std::size_t n = item.word.size();
    if (pick >= n) {  // x_1 -> 1
      item.word.erase(item.word.begin() + static_cast<std::ptrdiff_t>(pick - n));
      stack.push_back(std::move(item));
      continue;
    }
    const auto branches = *reduce_pair(item.word[pick], item.word[pick + 1]);
    for (const auto& br : branches) {
      std::vector<Generator> next;
      next.reserve(n + 1);
      next.insert(next.end(), item.word.begin(), item.word.begin() + static_cast<std::ptrdiff_t>(pick));
      next.insert(next.end(), br.replacement.begin(), br.replacement.end());
      next.insert(next.end(), item.word.begin() + static_cast<std::ptrdiff_t>(pick + 2), item.word.end());
      S c = br.factor.is_one() ? item.coeff : item.coeff * Traits::from_phase(br.factor);
      stack.push_back(Item{std::move(c), std::move(next)});
    }
  }
  return out;
}

template <class S>
double Element<S>::max_coeff_diff(const Element& o) const {
  double worst = 0.0;
  auto a = terms_.begin();
  auto b = o.terms_.begin();
  while (a != terms_.end() || b != o.terms_.end()) {
    Complex diff;
    if (b == o.terms_.end() || (a != terms_.end() && a->first < b->first)) {
      diff = Traits::to_complex(a->second);
      ++a;
    } else if (a == terms_.end() || b->first < a->first) {
      diff = Traits::to_complex(b->second);
      ++b;
    } else {
      diff = Traits::to_complex(a->second - b->second);
      ++a;
      ++b;
    }
    worst = std::max(worst, std::abs(diff));
  }
  return worst;
}

template <class S>
Element<S> Element<S>::adjoint() const {
  Element out;
  for (const auto& [s, c] : terms_) {
    MonomialShape t;
    t.lc = s.la;
    t.rc = s.ra;
    t.eps = s.eps;
    t.ra = s.rc;
    t.la = s.lc;
    t.phase = s.phase.inverse();
    // (x_theta M)^* = M^* x_{theta^-1}; moving x_phi to the left end of M^*
    // contributes phi^{degree_shift(M)}.
    S coeff = Traits::conj(c);
    if (!t.phase.is_one()) {
      const Phase f = t.phase.pow(s.degree_shift());
      if (!f.is_one()) coeff = coeff * Traits::from_phase(f);
    }
    out.add_term(t, coeff);
  }
  return out;
}

template <class S>
Element<Complex> Element<S>::to_complex() const {
  Element<Complex> out;
  for (const auto& [s, c] : terms_) out.add_term(s, Traits::to_complex(c));
  return out;
}

template <class S>
std::string Element<S>::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const auto& [s, c] : terms_) {
    if (!out.empty()) out += " + ";
    out += scalar_string(c) + " " + s.to_string();
  }
  return out;
}

template <class S>
const Element<S>& monomial_product(const MonomialShape& a, const MonomialShape& b) {
  auto& cache = caches<S>().products;
  auto key = std::make_pair(a, b);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  if (cache.size() > kCacheLimit) cache.clear();
  std::vector<Generator> word = a.generators();
  const std::vector<Generator> right = b.generators();
  word.insert(word.end(), right.begin(), right.end());
  auto [pos, inserted] =
      cache.emplace(std::move(key), normal_form<S>(word, ScalarTraits<S>::one()));
  return pos->second;
}

template <class S>
Element<S> multiply(const Element<S>& x, const Element<S>& y) {
  Element<S> out;
  for (const auto& [sa, ca] : x.terms()) {
    for (const auto& [sb, cb] : y.terms()) {
      const S c = ca * cb;
      for (const auto& [s, v] : monomial_product<S>(sa, sb).terms()) out.add_term(s, c * v);
    }
  }
  return out;
}

template <>
Complex weight_scalar<Complex>(const Weights& w, int letter) {
  return {w(letter), 0.0};
}

template <>
GaussianRational weight_scalar<GaussianRational>(const Weights& w, int letter) {
  return GaussianRational(w.exact(letter));
}

template <class S>
Element<S> apply_ucp_symbolic(const Weights& w, const Element<S>& x) {
  auto& c = caches<S>();
  const int n = w.size();
  if (c.n_for_pieces != n) {
    c.ucp_pieces.clear();
    c.n_for_pieces = n;
  }
  std::vector<S> omega;
  omega.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) omega.push_back(weight_scalar<S>(w, i));

  Element<S> out;
  for (const auto& [shape, coeff] : x.terms()) {
    auto it = c.ucp_pieces.find(shape);
    if (it == c.ucp_pieces.end()) {
      if (c.ucp_pieces.size() > kCacheLimit) c.ucp_pieces.clear();
      std::vector<Element<S>> pieces;
      pieces.reserve(static_cast<std::size_t>(n));
      const std::vector<Generator> middle = shape.generators();
      for (int i = 1; i <= n; ++i) {
        std::vector<Generator> word;
        word.reserve(middle.size() + 2);
        word.push_back(Generator::l_star(i));
        word.insert(word.end(), middle.begin(), middle.end());
        word.push_back(Generator::l(i));
        pieces.push_back(normal_form<S>(word, ScalarTraits<S>::one()));
      }
      it = c.ucp_pieces.emplace(shape, std::move(pieces)).first;
    }
    for (int i = 0; i < n; ++i) {
      const S f = coeff * omega[static_cast<std::size_t>(i)];
      for (const auto& [s, v] : it->second[static_cast<std::size_t>(i)].terms()) out.add_term(s, f * v);
    }
  }
  return out;
}

template <class S>
std::optional<UnitEigenvalue> eigen_check_symbolic(const Weights& w, const Element<S>& x,
                                                   double tol) {
  if (x.is_zero()) return std::nullopt;
  const Element<S> px = apply_ucp_symbolic(w, x);
  const auto& [shape, c] = *x.terms().begin();
  if constexpr (std::is_same_v<S, GaussianRational>) {
    const GaussianRational lambda = px.coefficient(shape) / c;
    if (lambda.re * lambda.re + lambda.im * lambda.im != 1) return std::nullopt;
    if (!(px == x * lambda)) return std::nullopt;
    return UnitEigenvalue(lambda.to_complex());
  } else {
    const Complex lambda = px.coefficient(shape) / c;
    if (std::abs(std::abs(lambda) - 1.0) >= tol) return std::nullopt;
    if (px.max_coeff_diff(x * lambda) >= tol) return std::nullopt;
    return UnitEigenvalue(lambda / std::abs(lambda));
  }
}

template <class S>
EigenTagged<S>::EigenTagged(const Weights& w, Element<S> x, Phase lambda, double tol)
    : element_(std::move(x)), lambda_(lambda) {
  const Element<S> px = apply_ucp_symbolic(w, element_);
  const Element<S> lx = element_ * ScalarTraits<S>::from_phase(lambda_);
  bool ok;
  if constexpr (std::is_same_v<S, GaussianRational>) {
    ok = px == lx;
  } else {
    ok = px.max_coeff_diff(lx) < tol;
  }
  if (!ok) {
    throw ValidationError("element is not in the eigenspace of " + lambda_.to_string());
  }
}

template <class S>
EigenTagged<S> EigenTagged<S>::detect(const Weights& w, Element<S> x, double tol) {
  const auto lambda = eigen_check_symbolic(w, x, tol);
  if (!lambda) throw ValidationError("element is not a peripheral eigen-element");
  const auto phase = Phase::from_complex(lambda->value());
  if (!phase) throw ValidationError("eigenvalue is not a root of unity of bounded order");
  return EigenTagged(std::move(x), *phase);
}

template <class S>
SymbolicProduct<S> choi_effros_symbolic(const Weights& w, const EigenTagged<S>& x,
                                        const EigenTagged<S>& y, int max_iter) {
  const Phase inv = (x.lambda() * y.lambda()).inverse();
  const S factor = ScalarTraits<S>::from_phase(inv);
  Element<S> z = multiply(x.element(), y.element());
  for (int k = 0; k < max_iter; ++k) {
    Element<S> next = apply_ucp_symbolic(w, z);
    if (!inv.is_one()) next *= factor;
    if (orbit_stable(next, z)) return {std::move(z), k};
    z = std::move(next);
  }
  throw ConvergenceError("Choi-Effros orbit did not stabilise within " +
                         std::to_string(max_iter) + " steps");
}

template <class S>
Element<S> sum_components(const PeripheralElement<S>& x) {
  Element<S> out;
  for (const auto& c : x) out += c.element();
  return out;
}

template <class S>
PeripheralElement<S> circle(const Weights& w, const PeripheralElement<S>& x,
                            const PeripheralElement<S>& y, int max_iter) {
  std::map<Phase, Element<S>> grouped;
  for (const auto& a : x) {
    for (const auto& b : y) {
      grouped[a.lambda() * b.lambda()] += choi_effros_symbolic(w, a, b, max_iter).value;
    }
  }
  PeripheralElement<S> out;
  for (auto& [lambda, e] : grouped) {
    if (!e.is_zero()) out.push_back(EigenTagged<S>::trusted(std::move(e), lambda));
  }
  return out;
}

template <class S>
PeripheralElement<S> adjoint(const PeripheralElement<S>& x) {
  PeripheralElement<S> out;
  out.reserve(x.size());
  for (const auto& c : x) {
    out.push_back(EigenTagged<S>::trusted(c.element().adjoint(), c.lambda().inverse()));
  }
  return out;
}

void clear_symbolic_caches() {
  caches<Complex>() = SymbolicCaches<Complex>{};
  caches<GaussianRational>() = SymbolicCaches<GaussianRational>{};
}

#define FOCKBOUND_INSTANTIATE(S)                                                               \
  template Element<S> normal_form<S>(std::span<const Generator>, const S&, RewriteOrder,       \
                                     std::mt19937_64*);                                        \
  template class Element<S>;                                                                   \
  template const Element<S>& monomial_product<S>(const MonomialShape&, const MonomialShape&);  \
  template Element<S> multiply<S>(const Element<S>&, const Element<S>&);                       \
  template Element<S> apply_ucp_symbolic<S>(const Weights&, const Element<S>&);                \
  template std::optional<UnitEigenvalue> eigen_check_symbolic<S>(const Weights&,               \
                                                                 const Element<S>&, double);   \
  template class EigenTagged<S>;                                                               \
  template SymbolicProduct<S> choi_effros_symbolic<S>(const Weights&, const EigenTagged<S>&,   \
                                                      const EigenTagged<S>&, int);             \
  template Element<S> sum_components<S>(const PeripheralElement<S>&);                          \
  template PeripheralElement<S> circle<S>(const Weights&, const PeripheralElement<S>&,         \
                                          const PeripheralElement<S>&, int);                   \
  template PeripheralElement<S> adjoint<S>(const PeripheralElement<S>&);

FOCKBOUND_INSTANTIATE(Complex)
FOCKBOUND_INSTANTIATE(GaussianRational)

#undef FOCKBOUND_INSTANTIATE

}  // namespace fockbound
