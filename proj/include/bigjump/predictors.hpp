#ifndef BIGJUMP_PREDICTORS_HPP
#define BIGJUMP_PREDICTORS_HPP

// Closed-form tail and atom predictors for centered lattice sums, the
// gamma threshold that locates the Gaussian-vs-single-jump crossover,
// and the rigorous upper bounds used to sandwich exact results.
//
// All x arguments are deviations of the centered sum S_n - floor(n mu).
// Integral predictors take a real x and combine a normal upper tail at
// the relevant scale with the recentered step tail n F(mu + x); local
// predictors take an integer x and combine a normal density with the
// literal atom weight n P(xi = x).  Values are carried as xfloat so the
// deep-tail regime (normal terms below 1e-308) stays representable.

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bigjump/csv.hpp"
#include "bigjump/lattice_law.hpp"
#include "bigjump/normalizers.hpp"
#include "bigjump/stdnormal.hpp"
#include "bigjump/sum_dist.hpp"
#include "bigjump/xfloat.hpp"

namespace bigjump {

// One additive predictor evaluation, kept in its two parts so callers
// can form jump shares without re-deriving the terms.
struct predictor_value {
  xfloat gauss;
  xfloat jump;
  xfloat value;

  double jump_share() const {
    if (value.is_zero()) return 0.0;
    return (jump / value).to_double();
  }
};

namespace detail {

inline predictor_value make_predictor(xfloat gauss, xfloat jump) {
  return predictor_value{gauss, jump, gauss + jump};
}

inline void require_positive_n(std::int64_t n, const char* who) {
  if (n < 1) throw std::invalid_argument(std::string(who) + ": n < 1");
}

} // namespace detail

// P(S_n - floor(n mu) >= x) ~ Phibar(x / (sigma sqrt n)) + n F(mu + x).
// Finite variance only; the scale collapses otherwise.
inline predictor_value nagaev_predictor(const lattice_law& law, std::int64_t n,
                                        double x) {
  detail::require_positive_n(n, "nagaev_predictor");
  if (!law.has_finite_variance())
    throw std::domain_error("nagaev_predictor: law has infinite variance");
  const double scale = std::sqrt(law.variance() * static_cast<double>(n));
  xfloat gauss = normal_upper_tail_x(x / scale);
  xfloat jump = xfloat(static_cast<double>(n)) * xfloat(law.tail(law.mean() + x));
  return detail::make_predictor(gauss, jump);
}

// Same shape with the normal term at the self-normalizing scale a_n,
// valid down to beta = 2 where sigma sqrt n is unavailable or wrong.
inline predictor_value rozovskii_predictor(const lattice_law& law,
                                           std::int64_t n, double x) {
  detail::require_positive_n(n, "rozovskii_predictor");
  const double a = solve_a_n(law, n);
  xfloat gauss = normal_upper_tail_x(x / a);
  xfloat jump = xfloat(static_cast<double>(n)) * xfloat(law.tail(law.mean() + x));
  return detail::make_predictor(gauss, jump);
}

// P(S_n - floor(n mu) = x) ~ g(x / a_n) / a_n + n P(xi = x) with g the
// standard normal density.
inline predictor_value local_predictor(const lattice_law& law, std::int64_t n,
                                       std::int64_t x) {
  detail::require_positive_n(n, "local_predictor");
  const double a = solve_a_n(law, n);
  xfloat gauss = normal_pdf_x(static_cast<double>(x) / a) / xfloat(a);
  xfloat jump = xfloat(static_cast<double>(n)) * xfloat(law.pmf(x));
  return detail::make_predictor(gauss, jump);
}

// Finite-variance variant of the local predictor, normal density at
// scale sigma sqrt n instead of a_n.
inline predictor_value local_finite_variance_predictor(const lattice_law& law,
                                                       std::int64_t n,
                                                       std::int64_t x) {
  detail::require_positive_n(n, "local_finite_variance_predictor");
  if (!law.has_finite_variance())
    throw std::domain_error(
        "local_finite_variance_predictor: law has infinite variance");
  const double scale = std::sqrt(law.variance() * static_cast<double>(n));
  xfloat gauss = normal_pdf_x(static_cast<double>(x) / scale) / xfloat(scale);
  xfloat jump = xfloat(static_cast<double>(n)) * xfloat(law.pmf(x));
  return detail::make_predictor(gauss, jump);
}

// Which crossover threshold to evaluate.  The finite-variance variants
// use the sigma sqrt n scale and require beta > 2; the general variants
// use a_n and q(a_n) and cover beta >= 2.
enum class transition_variant {
  integral_finite_var,
  integral_general,
  local_finite_var,
  local_general,
};

inline const char* to_string(transition_variant v) {
  switch (v) {
    case transition_variant::integral_finite_var: return "integral_finite_var";
    case transition_variant::integral_general: return "integral_general";
    case transition_variant::local_finite_var: return "local_finite_var";
    case transition_variant::local_general: return "local_general";
  }
  return "?";
}

// gamma_n at a given deviation, plus the matched constant and the
// predicted jump share 1 / (1 + c e^{-gamma}).  gamma -> -inf is the
// Gaussian regime (share -> 0), gamma -> +inf the single-jump regime.
struct transition_diagnostics {
  std::int64_t n = 0;
  double x = 0.0;
  double gamma = 0.0;
  double predicted_share = 0.0;
  double constant = 0.0;
  transition_variant variant = transition_variant::integral_general;
};

namespace detail {

inline bool is_local(transition_variant v) {
  return v == transition_variant::local_finite_var ||
         v == transition_variant::local_general;
}

inline bool is_finite_var(transition_variant v) {
  return v == transition_variant::integral_finite_var ||
         v == transition_variant::local_finite_var;
}

inline const tail_model& require_right_model(const lattice_law& law,
                                             const char* who) {
  if (!law.right_model())
    throw std::invalid_argument(std::string(who) +
                                ": law carries no right tail model");
  return *law.right_model();
}

constexpr double sqrt_two_pi = 2.5066282746310005024158;

// Crossover constant for the matched variant.  The local constants pick
// up an extra (beta - 2) resp. 2 factor and the 1/beta from the density
// of the atom relative to its tail.
inline double transition_constant(transition_variant v, double beta,
                                  double sigma2) {
  const bool loc = is_local(v);
  if (is_finite_var(v)) {
    const double base = std::pow(std::sqrt(sigma2), beta) / sqrt_two_pi;
    if (loc) return base * std::pow(beta - 2.0, (beta + 1.0) / 2.0) / beta;
    return base * std::pow(beta - 2.0, (beta - 1.0) / 2.0);
  }
  if (loc) return std::pow(2.0, (beta + 1.0) / 2.0) / (beta * sqrt_two_pi);
  return std::pow(2.0, (beta - 1.0) / 2.0) / sqrt_two_pi;
}

// log of the slowly varying factor of the step tail, F(t) ~ L_tail(t) t^{-beta}
// with L_tail = (C / beta) L from the pmf model C L(k) k^{-(1+beta)}.
inline double log_tail_sv(const tail_model& model, double t) {
  return std::log(model.C / model.beta) + std::log(model.L.eval(t));
}

} // namespace detail

inline transition_diagnostics gamma_threshold(const lattice_law& law,
                                              std::int64_t n, double x,
                                              transition_variant variant) {
  detail::require_positive_n(n, "gamma_threshold");
  const tail_model& model = detail::require_right_model(law, "gamma_threshold");
  const double beta = model.beta;
  const double nd = static_cast<double>(n);
  const double pref = detail::is_local(variant) ? (beta + 1.0) / 2.0
                                                : (beta - 1.0) / 2.0;
  double gamma = 0.0;
  double constant = 0.0;
  if (detail::is_finite_var(variant)) {
    if (!law.has_finite_variance())
      throw std::domain_error(
          "gamma_threshold: finite-variance variant on a law with "
          "divergent second moment");
    const double s2 = law.variance();
    const double ln = std::log(nd);
    gamma = x * x / (2.0 * s2 * nd) - (beta / 2.0 - 1.0) * ln -
            pref * std::log(ln) +
            detail::log_tail_sv(model, std::sqrt(nd * ln));
    constant = detail::transition_constant(variant, beta, s2);
  } else {
    const double a = solve_a_n(law, n);
    const double lq = std::fabs(std::log(law.q_of(a)));
    gamma = x * x / (2.0 * a * a) - lq - pref * std::log(lq) -
            std::log(model.L.eval(a) / model.L.eval(a * std::sqrt(lq)));
    constant = detail::transition_constant(variant, beta, 0.0);
  }
  transition_diagnostics d;
  d.n = n;
  d.x = x;
  d.gamma = gamma;
  d.predicted_share = 1.0 / (1.0 + constant * std::exp(-gamma));
  d.constant = constant;
  d.variant = variant;
  return d;
}

// Invert gamma(x) = target.  gamma is a shifted quadratic in x with the
// variant's own scale, so the inverse is exact.
inline double x_for_gamma(const lattice_law& law, std::int64_t n, double target,
                          transition_variant variant) {
  const transition_diagnostics at_zero = gamma_threshold(law, n, 0.0, variant);
  if (target < at_zero.gamma)
    throw std::domain_error("x_for_gamma: target below the zero-deviation "
                            "value of gamma");
  double scale = 0.0;
  if (detail::is_finite_var(variant))
    scale = std::sqrt(law.variance() * static_cast<double>(n));
  else
    scale = solve_a_n(law, n);
  return scale * std::sqrt(2.0 * (target - at_zero.gamma));
}

// ---------------------------------------------------------------------------
// Stable domain of attraction, alpha in (0, 2).

enum class stable_mode { integral, local };

// A predictor that can be structurally empty: when the right tail
// carries no mass (p = 0) the theory only gives o(n L(x) x^{-alpha})
// and there is no number to return.
struct stable_prediction {
  xfloat value;
  bool valid = false;
};

// P(S_n - b_n >= x) ~ n p L(x) x^{-alpha}, and on the lattice
// P(S_n - floor(b_n) = x) ~ n p alpha L(x) x^{-(1+alpha)}.  L is the
// slowly varying level of the two-sided tail sum at x, p the right-tail
// weight.
inline stable_prediction stable_predictor(std::int64_t n, double x,
                                          double alpha, double p,
                                          double sv_level, stable_mode mode) {
  detail::require_positive_n(n, "stable_predictor");
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("stable_predictor: alpha outside (0, 2)");
  if (!(x > 0.0)) throw std::invalid_argument("stable_predictor: x <= 0");
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("stable_predictor: p outside [0, 1]");
  if (!(sv_level > 0.0))
    throw std::invalid_argument("stable_predictor: sv_level <= 0");
  if (p == 0.0) return stable_prediction{xfloat::zero(), false};
  double lv = std::log(static_cast<double>(n)) + std::log(p) +
              std::log(sv_level) - alpha * std::log(x);
  if (mode == stable_mode::local) lv += std::log(alpha) - std::log(x);
  return stable_prediction{xfloat::from_log(lv), true};
}

// Law-driven form: reads the slowly varying level of the combined tail
// sum from the pmf models of both sides, P(|xi| > t) ~ L(t) t^{-alpha}
// with L(t) = sum of matching C L_side(t) / alpha.
inline stable_prediction stable_predictor(const lattice_law& law,
                                          std::int64_t n, double x,
                                          double alpha, double p,
                                          stable_mode mode) {
  double level = 0.0;
  bool any = false;
  for (const std::optional<tail_model>& m : {law.right_model(), law.left_model()}) {
    if (!m) continue;
    if (std::fabs(m->beta - alpha) > 1e-9 * std::fabs(alpha)) continue;
    level += m->C * m->L.eval(x) / alpha;
    any = true;
  }
  if (!any)
    throw std::invalid_argument(
        "stable_predictor: no tail model with the requested index");
  return stable_predictor(n, x, alpha, p, level, mode);
}

// ---------------------------------------------------------------------------
// Rigorous upper bounds.

// Truncated-sum bound: for x, y above the regularity threshold r0,
//   P(S_n >= x, max step <= y) <= e^{x/y} (1 + x y / (n sigma^2(y)))^{-x/y}
// in centered coordinates.
inline xfloat fuk_nagaev_bound(const lattice_law& law, std::int64_t n, double x,
                               double y) {
  detail::require_positive_n(n, "fuk_nagaev_bound");
  if (!(x > 0.0) || !(y > 0.0))
    throw std::invalid_argument("fuk_nagaev_bound: x and y must be positive");
  const double s2 = law.sigma2(y);
  if (!(s2 > 0.0)) return xfloat::zero();
  const double r = x / y;
  const double w = x * y / (static_cast<double>(n) * s2);
  return xfloat::from_log(r - r * std::log1p(w));
}

// Smallest integer y0 >= 1 such that the bound's regularity condition
//   y |E[(xi - mu) 1{|xi - mu| <= y}]| <= sigma^2(y)
// holds for every y in [y0, y_max], with the truncated first moment
// dominated by the first absolute moment beyond y.
inline std::int64_t fuk_nagaev_r0(const lattice_law& law, std::int64_t y_max) {
  if (y_max < 1) throw std::invalid_argument("fuk_nagaev_r0: y_max < 1");
  std::int64_t r0 = y_max + 1;
  for (std::int64_t y = y_max; y >= 1; --y) {
    const double yd = static_cast<double>(y);
    const double s2 = law.sigma2(yd);
    if (!(s2 > 0.0) || yd * law.abs_first_moment_beyond(yd) > s2) break;
    r0 = y;
  }
  if (r0 > y_max)
    throw std::domain_error("fuk_nagaev_r0: condition fails at y_max");
  return r0;
}

// Shape of the uniform atom bound at the self-normalizing scale:
//   P(S_n - floor(n mu) = x) <= C n sigma^2(x) / (a_n x^2)  for x >= a_n.
// C is left to the caller; acceptance fits it on a subgrid and verifies
// dominance on the full grid.
inline xfloat local_bound_window(const lattice_law& law, std::int64_t n,
                                 std::int64_t x, double a_n, double C) {
  detail::require_positive_n(n, "local_bound_window");
  if (x < 1) throw std::invalid_argument("local_bound_window: x < 1");
  const double xd = static_cast<double>(x);
  return xfloat(C * static_cast<double>(n) * law.sigma2(xd) / (a_n * xd * xd));
}

// Shape of the two-piece atom bound:
//   P(S_n - floor(n mu) = x)
//     <= (C1 / a_n) (e^{-c1 x^2 / a_n^2} + n L_tail(x) x^{-beta}).
inline xfloat local_bound_tail_split(const lattice_law& law, std::int64_t n,
                                     std::int64_t x, double a_n, double c1,
                                     double C1) {
  detail::require_positive_n(n, "local_bound_tail_split");
  if (x < 1) throw std::invalid_argument("local_bound_tail_split: x < 1");
  const tail_model& model =
      detail::require_right_model(law, "local_bound_tail_split");
  const double xd = static_cast<double>(x);
  xfloat gauss = xfloat::from_log(-c1 * xd * xd / (a_n * a_n));
  xfloat tail = xfloat::from_log(std::log(static_cast<double>(n)) +
                                 detail::log_tail_sv(model, xd) -
                                 model.beta * std::log(xd));
  return (gauss + tail) / xfloat(a_n);
}

// ---------------------------------------------------------------------------
// Exact-vs-predictor scans.

struct scan_row {
  std::int64_t n = 0;
  std::int64_t x = 0;
  xfloat exact;
  xfloat predictor;
  double ratio = 0.0;
  double gamma = 0.0;
  double predicted_share = 0.0;
  double exact_share = 0.0;
};

// One exact distribution build serving every x in the scan.  Local
// variants compare atoms, integral variants compare upper tails; the
// share columns report the jump term's weight in the predictor and in
// the exact value.
inline std::vector<scan_row> transition_scan(const lattice_law& law,
                                             std::int64_t n,
                                             const std::vector<std::int64_t>& xs,
                                             transition_variant variant,
                                             sum_build_options opts = {}) {
  detail::require_positive_n(n, "transition_scan");
  std::vector<scan_row> rows;
  if (xs.empty()) return rows;
  std::int64_t max_x = xs.front();
  for (std::int64_t x : xs) max_x = std::max(max_x, x);
  if (opts.window_x < static_cast<double>(max_x))
    opts.window_x = static_cast<double>(max_x);
  const sum_distribution dist = build_sum_distribution(law, n, opts);
  const std::int64_t b = b_floor(law, n);
  const bool loc = detail::is_local(variant);
  rows.reserve(xs.size());
  for (std::int64_t x : xs) {
    scan_row row;
    row.n = n;
    row.x = x;
    row.exact = loc ? dist.at(b + x)
                    : dist.tail_geq(static_cast<double>(b + x));
    predictor_value pred;
    switch (variant) {
      case transition_variant::integral_finite_var:
        pred = nagaev_predictor(law, n, static_cast<double>(x));
        break;
      case transition_variant::integral_general:
        pred = rozovskii_predictor(law, n, static_cast<double>(x));
        break;
      case transition_variant::local_finite_var:
        pred = local_finite_variance_predictor(law, n, x);
        break;
      case transition_variant::local_general:
        pred = local_predictor(law, n, x);
        break;
    }
    row.predictor = pred.value;
    row.ratio = row.exact.is_zero()
                    ? std::numeric_limits<double>::quiet_NaN()
                    : (pred.value / row.exact).to_double();
    const transition_diagnostics diag =
        gamma_threshold(law, n, static_cast<double>(x), variant);
    row.gamma = diag.gamma;
    row.predicted_share = diag.predicted_share;
    row.exact_share = row.exact.is_zero()
                          ? std::numeric_limits<double>::quiet_NaN()
                          : (pred.jump / row.exact).to_double();
    rows.push_back(row);
  }
  return rows;
}

// Decimal rendering that survives exponents far outside double range.
inline std::string csv_xfloat(const xfloat& v) {
  if (v.is_zero()) return "0";
  const double l10 = v.log10();
  double ip = 0.0;
  double frac = std::modf(l10, &ip);
  if (frac < 0.0) {
    frac += 1.0;
    ip -= 1.0;
  }
  double mant = std::pow(10.0, frac);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.16ge%+d", v.m < 0 ? -mant : mant,
                static_cast<int>(ip));
  return std::string(buf);
}

inline void write_transition_csv(std::ostream& out,
                                 const std::vector<scan_row>& rows) {
  csv_row(out, {"n", "x", "exact", "predictor", "ratio", "gamma", "s_pred",
                "s_exact"});
  for (const scan_row& r : rows)
    csv_row(out, {csv_num(r.n), csv_num(r.x), csv_xfloat(r.exact),
                  csv_xfloat(r.predictor), csv_num(r.ratio), csv_num(r.gamma),
                  csv_num(r.predicted_share), csv_num(r.exact_share)});
}

} // namespace bigjump

#endif // BIGJUMP_PREDICTORS_HPP
