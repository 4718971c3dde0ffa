#include "fockbound/scalar.hpp"

#include "fockbound/errors.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace fockbound {

std::string GaussianRational::to_string() const {
  return re.str() + "," + im.str();
}

GaussianRational operator/(const GaussianRational& a, const GaussianRational& b) {
  const Rational norm = b.re * b.re + b.im * b.im;
  if (norm == 0) throw RangeError("division by zero Gaussian rational");
  return {(a.re * b.re + a.im * b.im) / norm, (a.im * b.re - a.re * b.im) / norm};
}

Phase Phase::root(std::int64_t q, std::int64_t p) {
  if (q <= 0) throw RangeError("root of unity needs a positive order");
  p %= q;
  if (p < 0) p += q;
  const std::int64_t g = std::gcd(p, q);
  if (p == 0) return Phase(0, 1);
  return Phase(p / g, q / g);
}

std::optional<Phase> Phase::from_complex(Complex z, std::int64_t max_order, double tol) {
  if (std::abs(std::abs(z) - 1.0) > tol) return std::nullopt;
  double turn = std::arg(z) / (2.0 * std::numbers::pi);
  if (turn < 0) turn += 1.0;
  // Continued-fraction convergents of the turn fraction.
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double x = turn;
  for (int step = 0; step < 64; ++step) {
    const double a = std::floor(x);
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t h2 = ai * h1 + h0;
    const std::int64_t k2 = ai * k1 + k0;
    if (k2 > max_order) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    const Phase candidate = root(k1, h1);
    if (std::abs(candidate.to_complex() - z) < tol) return candidate;
    const double frac = x - a;
    if (frac < 1e-15) break;
    x = 1.0 / frac;
  }
  return std::nullopt;
}

Phase Phase::pow(std::int64_t k) const {
  // (num * k) mod den without overflow for the orders used here.
  const __int128 prod = static_cast<__int128>(num_) * k;
  auto rem = static_cast<std::int64_t>(prod % den_);
  return root(den_, rem);
}

Complex Phase::to_complex() const {
  switch (den_) {
    case 1:
      return {1.0, 0.0};
    case 2:
      return {-1.0, 0.0};
    case 4:
      return num_ == 1 ? Complex{0.0, 1.0} : Complex{0.0, -1.0};
    case 8: {
      const double h = std::sqrt(0.5);
      const double re = (num_ == 1 || num_ == 7) ? h : -h;
      const double im = (num_ == 1 || num_ == 3) ? h : -h;
      return {re, im};
    }
    default:
      return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(num_) /
                                 static_cast<double>(den_));
  }
}

GaussianRational Phase::to_exact() const {
  switch (den_) {
    case 1:
      return GaussianRational(Rational(1));
    case 2:
      return GaussianRational(Rational(-1));
    case 4:
      return num_ == 1 ? GaussianRational(Rational(0), Rational(1))
                       : GaussianRational(Rational(0), Rational(-1));
    default:
      throw ValidationError("phase " + to_string() +
                            " has no exact Gaussian-rational value");
  }
}

std::string Phase::to_string() const {
  if (num_ == 0) return "1";
  return "e^(2pi i " + std::to_string(num_) + "/" + std::to_string(den_) + ")";
}

Phase operator*(const Phase& a, const Phase& b) {
  const std::int64_t q = std::lcm(a.den_, b.den_);
  return Phase::root(q, a.num_ * (q / a.den_) + b.num_ * (q / b.den_));
}

}  // namespace fockbound

namespace fockbound {

UnitEigenvalue::UnitEigenvalue(Complex value) : value_(value) {
  if (!(std::abs(std::abs(value) - 1.0) < 1e-12)) {
    throw ValidationError("eigenvalue must have modulus one");
  }
}

}  // namespace fockbound
