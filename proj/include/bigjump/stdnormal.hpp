#ifndef BIGJUMP_STDNORMAL_HPP
#define BIGJUMP_STDNORMAL_HPP

#include <cmath>

#include "bigjump/xfloat.hpp"

namespace bigjump {

inline constexpr double half_log_two_pi = 0.9189385332046727417803297;

inline double log_normal_pdf(double x) { return -0.5 * x * x - half_log_two_pi; }

inline xfloat normal_pdf_x(double x) { return xfloat::from_log(log_normal_pdf(x)); }

// Upper tail P(Z >= x).  erfc carries full double precision until it
// underflows near x ~ 37.5; past that the asymptotic expansion
// phi(x)/x (1 - 1/x^2 + 3/x^4 - ...) is accurate to ~2e-15 already at
// the switch point and improves with x.
inline xfloat normal_upper_tail_x(double x) {
  if (x < 0.0) return xfloat(1.0) - normal_upper_tail_x(-x);
  if (x <= 37.0) return xfloat(0.5 * std::erfc(x * 0.7071067811865475244));
  double ix2 = 1.0 / (x * x);
  double series = 1.0 + ix2 * (-1.0 + ix2 * (3.0 + ix2 * (-15.0 + ix2 * (105.0 + ix2 * (-945.0 + ix2 * 10395.0)))));
  return normal_pdf_x(x) * xfloat(series / x);
}

inline double log_normal_upper_tail(double x) { return normal_upper_tail_x(x).log(); }

} // namespace bigjump

#endif
