#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace fockbound {

using Complex = std::complex<double>;
using Rational = boost::multiprecision::cpp_rational;

/// Exact element of Q + iQ.
struct GaussianRational {
  Rational re{0};
  Rational im{0};

  GaussianRational() = default;
  GaussianRational(Rational r) : re(std::move(r)) {}  // NOLINT: implicit by design of the field
  GaussianRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
  GaussianRational(long long r) : re(r) {}  // NOLINT

  bool is_zero() const { return re == 0 && im == 0; }
  GaussianRational conj() const { return {re, -im}; }
  Complex to_complex() const {
    return {static_cast<double>(re), static_cast<double>(im)};
  }
  std::string to_string() const;

  GaussianRational& operator+=(const GaussianRational& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  GaussianRational& operator-=(const GaussianRational& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  friend GaussianRational operator+(GaussianRational a, const GaussianRational& b) { return a += b; }
  friend GaussianRational operator-(GaussianRational a, const GaussianRational& b) { return a -= b; }
  friend GaussianRational operator-(const GaussianRational& a) { return {-a.re, -a.im}; }
  friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b);
  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re == b.re && a.im == b.im;
  }
};

/// A root of unity e^{2 pi i num/den}, kept as a reduced turn fraction so that
/// products and inverses are exact.
class Phase {
 public:
  Phase() = default;
  /// e^{2 pi i p/q}.
  static Phase root(std::int64_t q, std::int64_t p);
  /// Recognises z as a root of unity of order <= max_order within tol.
  static std::optional<Phase> from_complex(Complex z, std::int64_t max_order = 4096,
                                           double tol = 1e-12);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_one() const { return num_ == 0; }

  Phase inverse() const { return root(den_, -num_); }
  Phase pow(std::int64_t k) const;
  Complex to_complex() const;
  /// Exact value; only available for den in {1, 2, 4}.
  GaussianRational to_exact() const;
  bool has_exact_value() const { return den_ == 1 || den_ == 2 || den_ == 4; }
  std::string to_string() const;

  friend Phase operator*(const Phase& a, const Phase& b);
  friend bool operator==(const Phase&, const Phase&) = default;
  friend auto operator<=>(const Phase&, const Phase&) = default;

 private:
  Phase(std::int64_t num, std::int64_t den) : num_(num), den_(den) {}
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Complex number of modulus one (a peripheral eigenvalue).
class UnitEigenvalue {
 public:
  explicit UnitEigenvalue(Complex value);
  static UnitEigenvalue from_phase(const Phase& p) { return UnitEigenvalue(p.to_complex()); }
  /// e^{2 pi i p/q}.
  static UnitEigenvalue root(std::int64_t q, std::int64_t p) { return from_phase(Phase::root(q, p)); }

  Complex value() const { return value_; }
  UnitEigenvalue conj() const { return UnitEigenvalue(std::conj(value_)); }
  friend UnitEigenvalue operator*(UnitEigenvalue a, UnitEigenvalue b) {
    return UnitEigenvalue(a.value_ * b.value_);
  }

 private:
  Complex value_;
};

/// Coefficient arithmetic used by the symbolic engine.
template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<Complex> {
  static constexpr double zero_threshold = 1e-14;
  static Complex zero() { return {0.0, 0.0}; }
  static Complex one() { return {1.0, 0.0}; }
  static bool is_zero(const Complex& c) { return std::abs(c) < zero_threshold; }
  static Complex conj(const Complex& c) { return std::conj(c); }
  static Complex from_phase(const Phase& p) { return p.to_complex(); }
  static Complex to_complex(const Complex& c) { return c; }
};

template <>
struct ScalarTraits<GaussianRational> {
  static GaussianRational zero() { return {}; }
  static GaussianRational one() { return GaussianRational(Rational(1)); }
  static bool is_zero(const GaussianRational& c) { return c.is_zero(); }
  static GaussianRational conj(const GaussianRational& c) { return c.conj(); }
  static GaussianRational from_phase(const Phase& p) { return p.to_exact(); }
  static Complex to_complex(const GaussianRational& c) { return c.to_complex(); }
};

}  // namespace fockbound
