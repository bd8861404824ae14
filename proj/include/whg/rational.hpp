#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "whg/errors.hpp"

namespace whg {

// Exact rational arithmetic on int64 numerator/denominator.  Everything in
// the pipeline that carries probability mass stays rational; floats appear
// only when rendering dense matrices.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  Rational& operator+=(const Rational& o) {
    const __int128 n = static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_;
    const __int128 d = static_cast<__int128>(den_) * o.den_;
    assign(n, d);
    return *this;
  }
  Rational& operator-=(const Rational& o) { return *this += Rational(-o.num_, o.den_); }
  Rational& operator*=(const Rational& o) {
    assign(static_cast<__int128>(num_) * o.num_, static_cast<__int128>(den_) * o.den_);
    return *this;
  }
  Rational& operator/=(const Rational& o) {
    if (o.num_ == 0) throw Error("rational division by zero");
    assign(static_cast<__int128>(num_) * o.den_, static_cast<__int128>(den_) * o.num_);
    return *this;
  }

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  friend Rational operator-(const Rational& a) { return Rational(-a.num_, a.den_); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return a < b || a == b; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  void normalize() {
    if (den_ == 0) throw Error("rational with zero denominator");
    if (den_ < 0) { num_ = -num_; den_ = -den_; }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) { num_ /= g; den_ /= g; }
  }

  void assign(__int128 n, __int128 d) {
    if (d == 0) throw Error("rational with zero denominator");
    if (d < 0) { n = -n; d = -d; }
    const __int128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) { n /= g; d /= g; }
    constexpr __int128 lim = static_cast<__int128>(INT64_MAX);
    if (n > lim || n < -lim || d > lim) throw Error("rational overflow");
    num_ = static_cast<std::int64_t>(n);
    den_ = static_cast<std::int64_t>(d);
  }

  static __int128 gcd128(__int128 a, __int128 b) {
    while (b != 0) { const __int128 t = a % b; a = b; b = t; }
    return a;
  }

  std::int64_t num_, den_;
};

// Element of Q[omega_p] stored as coefficients of 1, omega, ..., omega^{p-1}.
// Diagonal entries of pipeline states are provably rational; to_rational()
// reduces modulo 1 + omega + ... + omega^{p-1} = 0 and demands rationality.
class CycRat {
 public:
  CycRat() = default;
  explicit CycRat(std::int64_t p) : p_(p), coeff_(static_cast<std::size_t>(p)) {}

  void add(const Rational& c, std::int64_t exponent) {
    coeff_[static_cast<std::size_t>(((exponent % p_) + p_) % p_)] += c;
  }

  // Rational iff coefficients of omega^1..omega^{p-1} coincide after
  // reduction; then value = c0 - c1.
  Rational to_rational() const {
    if (p_ == 1) return coeff_[0];
    const Rational& c1 = coeff_[1];
    for (std::int64_t j = 2; j < p_; ++j) {
      if (coeff_[static_cast<std::size_t>(j)] != c1)
        throw Error("cyclotomic value is not rational");
    }
    return coeff_[0] - c1;
  }

 private:
  std::int64_t p_ = 1;
  std::vector<Rational> coeff_ = {Rational(0)};
};

}  // namespace whg
