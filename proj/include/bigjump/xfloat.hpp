#ifndef BIGJUMP_XFLOAT_HPP
#define BIGJUMP_XFLOAT_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace bigjump {

// Value m * 2^e with |m| in [0.5, 1), or m == 0.  Long convolutions and
// deep-tail normal estimates produce magnitudes like 1e-5000 that no
// double can hold; this keeps ~15.9 significant digits at any scale.
struct xfloat {
  double m = 0.0;
  std::int64_t e = 0;

  constexpr xfloat() = default;

  xfloat(double value) { // NOLINT: implicit by design
    int de = 0;
    m = std::frexp(value, &de);
    e = de;
  }

  xfloat(double mant, std::int64_t exp2) {
    int de = 0;
    m = std::frexp(mant, &de);
    e = (m == 0.0) ? 0 : exp2 + de;
  }

  static xfloat zero() { return xfloat{}; }

  bool is_zero() const { return m == 0.0; }

  // Natural log of |value|; requires m != 0.
  double log() const {
    return std::log(std::fabs(m)) + static_cast<double>(e) * 0.6931471805599453;
  }

  double log10() const { return log() * 0.4342944819032518; }

  // exp(L) as an xfloat, usable for L far outside double range.
  static xfloat from_log(double L) {
    if (std::isinf(L) && L < 0) return zero();
    const long double ln2 = 0.69314718055994530941723212145818L;
    long double k = std::floor(static_cast<long double>(L) / ln2);
    long double rest = static_cast<long double>(L) - k * ln2;
    double mant = static_cast<double>(std::exp(rest)); // in [1, 2)
    return xfloat(mant, static_cast<std::int64_t>(k));
  }

  double to_double() const {
    if (m == 0.0) return 0.0;
    if (e > 1024) return m > 0 ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
    if (e < -1073) return 0.0;
    return std::ldexp(m, static_cast<int>(e));
  }

  xfloat operator-() const {
    xfloat r = *this;
    r.m = -r.m;
    return r;
  }

  friend xfloat operator*(const xfloat& a, const xfloat& b) {
    if (a.m == 0.0 || b.m == 0.0) return zero();
    return xfloat(a.m * b.m, a.e + b.e);
  }

  friend xfloat operator/(const xfloat& a, const xfloat& b) {
    if (a.m == 0.0) return zero();
    return xfloat(a.m / b.m, a.e - b.e);
  }

  friend xfloat operator+(const xfloat& a, const xfloat& b) {
    if (a.m == 0.0) return b;
    if (b.m == 0.0) return a;
    std::int64_t d = a.e - b.e;
    if (d >= 200) return a;
    if (d <= -200) return b;
    if (d >= 0) return xfloat(a.m + std::ldexp(b.m, static_cast<int>(-d)), a.e);
    return xfloat(b.m + std::ldexp(a.m, static_cast<int>(d)), b.e);
  }

  friend xfloat operator-(const xfloat& a, const xfloat& b) { return a + (-b); }

  xfloat& operator+=(const xfloat& o) { return *this = *this + o; }
  xfloat& operator-=(const xfloat& o) { return *this = *this - o; }
  xfloat& operator*=(const xfloat& o) { return *this = *this * o; }
  xfloat& operator/=(const xfloat& o) { return *this = *this / o; }

  friend bool operator==(const xfloat& a, const xfloat& b) {
    return a.m == b.m && (a.m == 0.0 || a.e == b.e);
  }

  friend bool operator<(const xfloat& a, const xfloat& b) {
    xfloat d = b - a;
    return d.m > 0.0;
  }
  friend bool operator>(const xfloat& a, const xfloat& b) { return b < a; }
  friend bool operator<=(const xfloat& a, const xfloat& b) { return !(b < a); }
  friend bool operator>=(const xfloat& a, const xfloat& b) { return !(a < b); }

  xfloat abs() const {
    xfloat r = *this;
    r.m = std::fabs(r.m);
    return r;
  }

  // a^k, k >= 0.  Squaring doubles relative error per step, which hurts
  // near-one bases at huge k; those go through the log instead, where the
  // error stays k * ulp(log a).
  static xfloat pow_int(xfloat a, std::uint64_t k) {
    if (k == 0) return xfloat(1.0);
    if (a.m > 0.0) {
      double la = a.log();
      if (std::fabs(la) <= 1.0) return from_log(static_cast<double>(k) * la);
    }
    xfloat r(1.0);
    while (k) {
      if (k & 1) r *= a;
      a *= a;
      k >>= 1;
    }
    return r;
  }

  xfloat sqrt() const {
    if (m == 0.0) return zero();
    if (e % 2 == 0) return xfloat(std::sqrt(m), e / 2);
    return xfloat(std::sqrt(2.0 * m), (e - 1) / 2);
  }

  // "3.14159...e-4321" style; exact to ~11 digits for |e| ~ 1e6,
  // used only for report output, never for computation.
  std::string to_sci_string(int digits = 17) const;
};

inline std::string xfloat::to_sci_string(int digits) const {
  if (m == 0.0) return "0";
  double l10 = log10();
  double d10 = std::floor(l10);
  double mant = std::pow(10.0, l10 - d10);
  if (mant >= 10.0) { mant /= 10.0; d10 += 1.0; }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*ge%+d", digits, (m > 0 ? mant : -mant),
                static_cast<int>(d10));
  return std::string(buf);
}

inline double rel_diff(const xfloat& a, const xfloat& b) {
  if (a.is_zero() && b.is_zero()) return 0.0;
  xfloat d = (a - b).abs();
  xfloat s = a.abs() + b.abs();
  return (d / s).to_double() * 2.0;
}

// Neumaier compensated sum for plain doubles.
struct neumaier {
  double s = 0.0;
  double c = 0.0;

  void add(double x) {
    double t = s + x;
    if (std::fabs(s) >= std::fabs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }

  double value() const { return s + c; }
};

} // namespace bigjump

#endif
