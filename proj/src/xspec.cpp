#include "fockbound/xspec.hpp"

#include <cctype>
#include <charconv>

namespace fockbound {

namespace {

class Parser {
 public:
  Parser(const std::string& text, int n) : s_(text), n_(n) {}

  XSpec run() {
    XSpec out{s_, {}};
    skip_space();
    if (at_end()) fail("empty expression");
    double sign = 1.0;
    if (peek() == '+' || peek() == '-') sign = take() == '-' ? -1.0 : 1.0;
    while (true) {
      SpecProduct prod = product();
      prod.coeff *= sign;
      out.products.push_back(std::move(prod));
      skip_space();
      if (at_end()) break;
      const char c = take();
      if (c != '+' && c != '-') fail(std::string("unexpected '") + c + "'");
      sign = c == '-' ? -1.0 : 1.0;
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " at position " + std::to_string(pos_) + " in \"" + s_ + "\"");
  }
  bool at_end() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }
  char take() { return s_[pos_++]; }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  double number() {
    skip_space();
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr == first) fail("expected a number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return v;
  }

  int letter(long v) const {
    if (v < 1 || v > n_) {
      throw RangeError("letter " + std::to_string(v) + " outside 1.." + std::to_string(n_) + " in \"" + s_ + "\"");
    }
    return static_cast<int>(v);
  }

  Word word() {
    Word w;
    if (peek() == '(') {
      ++pos_;
      expect(')');
      return w;
    }
    if (peek() == '{') {
      ++pos_;
      skip_space();
      if (peek() == '}') {
        ++pos_;
        return w;
      }
      while (true) {
        skip_space();
        const double v = number();
        if (v != static_cast<long>(v)) fail("letters must be integers");
        w.push_back(static_cast<Letter>(letter(static_cast<long>(v))));
        skip_space();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        expect('}');
        return w;
      }
    }
    if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected a word");
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      w.push_back(static_cast<Letter>(letter(take() - '0')));
    }
    return w;
  }

  Phase phase() {
    if (s_.compare(pos_, 4, "root") == 0) {
      pos_ += 4;
      expect('{');
      const double q = number();
      skip_space();
      expect(',');
      const double p = number();
      skip_space();
      expect('}');
      if (q < 1 || q != static_cast<long>(q) || p != static_cast<long>(p)) fail("root needs integers q >= 1, p");
      return Phase::root(static_cast<std::int64_t>(q), static_cast<std::int64_t>(p));
    }
    Complex z;
    if (peek() == 'i') {
      ++pos_;
      z = {0.0, 1.0};
    } else if (peek() == '{') {
      ++pos_;
      const double re = number();
      skip_space();
      double im = 0.0;
      if (peek() == ',') {
        ++pos_;
        im = number();
        skip_space();
      }
      expect('}');
      z = {re, im};
    } else {
      fail("expected i, {re,im} or root{q,p} after x_");
    }
    const auto ph = Phase::from_complex(z, 4096, 1e-9);
    if (!ph) fail("x_lambda needs a root of unity of order <= 4096");
    return *ph;
  }

  std::optional<Complex> scalar() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      const double re = number();
      skip_space();
      expect(',');
      const double im = number();
      skip_space();
      expect(')');
      return Complex{re, im};
    }
    if (c == 'i' && !std::isalnum(static_cast<unsigned char>(peek(1))) && peek(1) != '_') {
      ++pos_;
      return Complex{0.0, 1.0};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const double v = number();
      if (peek() == 'i') {
        ++pos_;
        return Complex{0.0, v};
      }
      return Complex{v, 0.0};
    }
    return std::nullopt;
  }

  SpecAtom atom() {
    SpecAtom a;
    const char c = take();
    if (c == 'x') {
      expect('_');
      a.kind = SpecAtom::Kind::Peripheral;
      a.phase = phase();
    } else if (c == 'p') {
      expect('0');
      a.kind = SpecAtom::Kind::Vacuum;
    } else if (c == 'l' || c == 'r') {
      bool star = false;
      if (peek() == '*') {
        ++pos_;
        star = true;
      }
      expect('_');
      a.word = word();
      using K = SpecAtom::Kind;
      a.kind = c == 'l' ? (star ? K::LeftStar : K::Left) : (star ? K::RightStar : K::Right);
    } else {
      --pos_;
      fail("expected an operator atom");
    }
    if (peek() == '*') {
      ++pos_;
      a = adjoint_atom(a);
    }
    return a;
  }

  static SpecAtom adjoint_atom(SpecAtom a) {
    using K = SpecAtom::Kind;
    switch (a.kind) {
      case K::Peripheral: a.phase = a.phase.inverse(); break;
      case K::Left: a.kind = K::LeftStar; break;
      case K::LeftStar: a.kind = K::Left; break;
      case K::Right: a.kind = K::RightStar; break;
      case K::RightStar: a.kind = K::Right; break;
      case K::Identity:
      case K::Vacuum: break;
    }
    return a;
  }

  SpecProduct product() {
    SpecProduct prod;
    bool any = false;
    while (true) {
      skip_space();
      if (at_end() || peek() == '+' || peek() == '-') break;
      if (const auto c = scalar()) {
        prod.coeff *= *c;
        if (peek() == '*') ++pos_;  // 2*r_1
      } else {
        prod.atoms.push_back(atom());
      }
      any = true;
    }
    if (!any) fail("empty term");
    return prod;
  }

  const std::string& s_;
  int n_;
  std::size_t pos_ = 0;
};

}  // namespace

ComplexElement SpecAtom::element() const {
  switch (kind) {
    case Kind::Identity: return ComplexElement::identity();
    case Kind::Peripheral: return ComplexElement::peripheral(phase);
    case Kind::Left: return ComplexElement::l_word(word);
    case Kind::LeftStar: return ComplexElement::l_word_star(word);
    case Kind::Right: return ComplexElement::r_word(word);
    case Kind::RightStar: return ComplexElement::r_word_star(word);
    case Kind::Vacuum: return ComplexElement::vacuum();
  }
  return ComplexElement::identity();
}

XSpec parse_xspec(const std::string& text, int n) {
  if (n < 1) throw ValidationError("alphabet size must be positive");
  return Parser(text, n).run();
}

ComplexElement to_element(const XSpec& spec) {
  ComplexElement out;
  for (const auto& prod : spec.products) {
    ComplexElement term = ComplexElement::scalar(prod.coeff);
    for (const auto& a : prod.atoms) term = multiply(term, a.element());
    out += term;
  }
  return out;
}

ComplexElement parse_element(const std::string& text, int n) { return to_element(parse_xspec(text, n)); }

std::tuple<Phase, Word, Word> basis_member(const XSpec& spec) {
  const auto bad = [&]() { return ParseError("not a basis member x_theta r_I r*_J: \"" + spec.source + "\""); };
  if (spec.products.size() != 1 || spec.products.front().coeff != Complex{1.0, 0.0}) throw bad();
  Phase theta{};
  Word i;
  Word j;
  int stage = 0;  // 0: x, 1: r, 2: r*, 3: done
  for (const auto& a : spec.products.front().atoms) {
    using K = SpecAtom::Kind;
    if (a.kind == K::Identity) continue;
    const int want = a.kind == K::Peripheral ? 0 : a.kind == K::Right ? 1 : a.kind == K::RightStar ? 2 : -1;
    if (want < stage) throw bad();
    if (want == 0) theta = a.phase;
    if (want == 1) i = a.word;
    if (want == 2) j = a.word;
    stage = want + 1;
  }
  return {theta, i, j};
}

}  // namespace fockbound
