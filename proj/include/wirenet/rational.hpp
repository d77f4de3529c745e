#pragma once

#include <cstdint>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace wirenet {

// Exact fraction on int64 with __int128 intermediates. Magnetic flux values,
// vertex positions and cocycle phases all stay in this type so that phase
// comparisons in the flux classifiers are exact.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n) : num(n), den(1) {}
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) throw std::domain_error("Rational: zero denominator");
    if (den < 0) { num = -num; den = -den; }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }

  static Rational make(__int128 n, __int128 d) {
    if (d == 0) throw std::domain_error("Rational: zero denominator");
    if (d < 0) { n = -n; d = -d; }
    __int128 a = n < 0 ? -n : n;
    __int128 b = d;
    while (b) { __int128 t = a % b; a = b; b = t; }
    if (a > 1) { n /= a; d /= a; }
    if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
      throw std::overflow_error("Rational overflow");
    Rational r;
    r.num = static_cast<std::int64_t>(n);
    r.den = static_cast<std::int64_t>(d);
    return r;
  }

  friend Rational operator+(Rational a, Rational b) {
    return make(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                static_cast<__int128>(a.den) * b.den);
  }
  friend Rational operator-(Rational a, Rational b) {
    return make(static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den,
                static_cast<__int128>(a.den) * b.den);
  }
  friend Rational operator*(Rational a, Rational b) {
    return make(static_cast<__int128>(a.num) * b.num, static_cast<__int128>(a.den) * b.den);
  }
  friend Rational operator/(Rational a, Rational b) {
    if (b.num == 0) throw std::domain_error("Rational: divide by zero");
    return make(static_cast<__int128>(a.num) * b.den, static_cast<__int128>(a.den) * b.num);
  }
  Rational operator-() const { Rational r; r.num = -num; r.den = den; return r; }
  Rational& operator+=(Rational b) { *this = *this + b; return *this; }
  Rational& operator-=(Rational b) { *this = *this - b; return *this; }
  Rational& operator*=(Rational b) { *this = *this * b; return *this; }

  friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
  friend bool operator!=(Rational a, Rational b) { return !(a == b); }
  friend bool operator<(Rational a, Rational b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }

  bool is_integer() const { return den == 1; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  // Reduce into [0, 1).
  Rational mod1() const {
    std::int64_t m = num % den;
    if (m < 0) m += den;
    Rational r;
    r.num = m;
    r.den = den;
    r.normalize();
    return r;
  }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }
};

// Parse "p/q" or "p". Exact integers only; anything else (floats, trailing
// characters) is rejected.
inline Rational parse_rational(const std::string& s) {
  auto parse_int = [&](const std::string& part) {
    size_t pos = 0;
    long long v = std::stoll(part, &pos);
    if (pos != part.size()) throw std::invalid_argument("trailing characters");
    return v;
  };
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(parse_int(s));
    return Rational(parse_int(s.substr(0, slash)), parse_int(s.substr(slash + 1)));
  } catch (const std::exception&) {
    throw std::invalid_argument("not a rational: '" + s + "' (use integer pairs like 1/3)");
  }
}

// A point on the unit circle, e^{2πi r} with r rational. Products and
// comparisons are exact; this is what makes the analytic flux classifiers
// tolerance-free.
struct Phase {
  Rational r;  // kept reduced into [0,1)

  Phase() : r(0) {}
  explicit Phase(Rational rr) : r(rr.mod1()) {}

  static Phase one() { return Phase(); }
  friend Phase operator*(Phase a, Phase b) { return Phase(a.r + b.r); }
  Phase conj() const { return Phase(-r); }
  Phase pow(std::int64_t e) const { return Phase(r * Rational(e)); }
  friend bool operator==(Phase a, Phase b) { return a.r == b.r; }
  friend bool operator!=(Phase a, Phase b) { return !(a == b); }
  bool is_one() const { return r.num == 0; }
  bool is_minus_one() const { return r.num * 2 == r.den; }

  std::complex<double> value() const {
    double t = 2.0 * M_PI * r.value();
    return {std::cos(t), std::sin(t)};
  }
  std::string str() const { return "e(" + r.str() + ")"; }
};

using RVec = std::vector<Rational>;

inline RVec rvec_add(const RVec& a, const RVec& b) {
  RVec c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

inline RVec rvec_sub(const RVec& a, const RVec& b) {
  RVec c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

}  // namespace wirenet
