#ifndef BIGJUMP_TILT_HPP
#define BIGJUMP_TILT_HPP

// Exponential tilting with a hard upper truncation of the step law:
// exponential moments of the truncated step, inversion of the tilted
// mean, the relative entropy of the tilted law, and the closed-form
// tail/atom predictors built from those pieces.
//
// Everything is phrased in centered coordinates.  With mu the step
// mean and r >= 0 the truncation level,
//
//   M(u) = E[ e^{u (xi - mu)} 1{xi - mu <= r} ],
//
// so the truncated set on the integer lattice is {k <= floor(r + mu)}.
// This keeps M, lambda and H invariant under integer shifts of the law.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bigjump/lattice_law.hpp"
#include "bigjump/normalizers.hpp"
#include "bigjump/stdnormal.hpp"
#include "bigjump/sum_dist.hpp"
#include "bigjump/xfloat.hpp"

namespace bigjump {

struct mgf_eval {
  double M = 0.0;    // truncated exponential moment, inf if above double range
  double Mp = 0.0;   // d/du
  double Mpp = 0.0;  // d^2/du^2
  double log_M = 0.0;
  double m = 0.0;    // tilted mean Mp / M, computed free of overflow
  double var = 0.0;  // tilted variance Mpp/M - m^2, >= 0
};

namespace detail_tilt {

inline std::int64_t trunc_cell(const lattice_law& law, double r) {
  double mu = law.mean();
  double edge = std::floor(r + mu);
  if (!(edge >= -9.0e18 && edge <= 9.0e18))
    throw std::invalid_argument("tilt: truncation level out of lattice range");
  std::int64_t khi = static_cast<std::int64_t>(edge);
  if (!law.right_unbounded()) khi = std::min(khi, law.table_hi());
  return khi;
}

} // namespace detail_tilt

// Exact lattice sums of e^{u(k-mu)} p(k) and its first two u-derivatives
// over k <= floor(r + mu).  Large u r switches to a shifted accumulation
// so the sums never overflow; log_M stays finite either way.
inline mgf_eval truncated_mgf(const lattice_law& law, double u, double r) {
  if (!(u >= 0.0)) throw std::invalid_argument("truncated_mgf: u must be >= 0");
  double mu = law.mean();
  std::int64_t khi = detail_tilt::trunc_cell(law, r);
  if (!law.left_unbounded() && khi < law.table_lo())
    throw std::invalid_argument("truncated_mgf: truncation below the support");

  std::int64_t klo;
  if (!law.left_unbounded()) {
    klo = law.table_lo();
  } else {
    if (u <= 0.0)
      throw std::invalid_argument(
          "truncated_mgf: u = 0 needs a lower-bounded support");
    // terms below mu - 760/u are zero even before any shift is applied
    double cut = mu - 760.0 / u;
    klo = cut <= -9.0e18 ? std::numeric_limits<std::int64_t>::min() / 2
                         : static_cast<std::int64_t>(std::floor(cut));
    klo = std::min(klo, khi);
  }
  if (khi - klo > 300000000)
    throw std::runtime_error("truncated_mgf: truncation range too large");

  double dhi = static_cast<double>(khi) - mu;
  double shift = std::max(0.0, u * dhi - 300.0);
  neumaier s0, s1, s2, s0m1;
  for (std::int64_t k = klo; k <= khi; ++k) {
    double p = law.pmf(k);
    if (p <= 0.0) continue;
    double d = static_cast<double>(k) - mu;
    double e = u * d - shift;
    double w = std::exp(e) * p;
    s0.add(w);
    s1.add(d * w);
    s2.add(d * d * w);
    if (shift == 0.0) s0m1.add(p * std::expm1(e));
  }
  if (!(s0.value() > 0.0))
    throw std::domain_error("truncated_mgf: no mass below the truncation");

  mgf_eval out;
  if (shift == 0.0) {
    // log M via log1p keeps full relative accuracy when M is near 1,
    // which is where H = -log M + t lambda suffers cancellation
    double miss = law.tail(static_cast<double>(khi));
    if (law.left_unbounded()) miss += law.cdf(static_cast<double>(klo) - 1.0);
    double m1 = s0m1.value() - miss;
    out.log_M = m1 > -0.5 ? std::log1p(m1) : std::log(s0.value());
  } else {
    out.log_M = std::log(s0.value()) + shift;
  }
  double es = shift > 0.0 ? std::exp(shift) : 1.0; // may be inf, doubles only
  out.M = s0.value() * es;
  out.Mp = s1.value() * es;
  out.Mpp = s2.value() * es;
  out.m = s1.value() / s0.value();
  out.var = std::max(0.0, s2.value() / s0.value() - out.m * out.m);
  return out;
}

struct tilt_solution {
  double r = 0.0;       // truncation level, centered
  double t = 0.0;       // target tilted mean
  double lambda = 0.0;  // root of m(lambda) = t
  double M = 0.0, Mp = 0.0, Mpp = 0.0;
  double log_M = 0.0;
  double H = 0.0;        // -log M(lambda) + t lambda
  double residual = 0.0; // |m(lambda) - t|
  int iterations = 0;
};

// Invert the tilted mean: find lambda >= 0 with m(lambda) = t.  m is
// strictly increasing (its derivative is the tilted variance), so a
// bracketed Newton iteration is safe; the bracket starts at [0, 3/r]
// and doubles until it straddles the root.
inline tilt_solution solve_lambda(const lattice_law& law, double t, double r) {
  if (!std::isfinite(t)) throw std::invalid_argument("solve_lambda: t not finite");
  if (law.left_unbounded())
    throw std::invalid_argument("solve_lambda: support must be bounded below");
  mgf_eval e0 = truncated_mgf(law, 0.0, r);
  double m0 = e0.m;
  std::int64_t khi = detail_tilt::trunc_cell(law, r);
  // the reachable mean cap is the largest atom kept by the truncation,
  // which sits below khi when the table has trailing zero cells
  double mcap;
  if (law.right_unbounded() && khi > law.table_hi()) {
    mcap = static_cast<double>(khi) - law.mean();
  } else {
    std::int64_t top = std::min(khi, law.table_hi());
    while (top > law.table_lo() && !(law.pmf(top) > 0.0)) --top;
    mcap = static_cast<double>(top) - law.mean();
  }

  tilt_solution sol;
  sol.r = r;
  sol.t = t;
  double floor_tol = 1e-13 * std::max({std::fabs(t), std::fabs(m0), 1e-30});
  if (t <= m0 + floor_tol) {
    if (t < m0 - floor_tol)
      throw std::domain_error("solve_lambda: target mean below the truncated mean");
    sol.lambda = 0.0;
    sol.M = e0.M;
    sol.Mp = e0.Mp;
    sol.Mpp = e0.Mpp;
    sol.log_M = e0.log_M;
    sol.H = -e0.log_M;
    sol.residual = std::fabs(m0 - t);
    return sol;
  }
  if (t >= mcap)
    throw std::domain_error("solve_lambda: target mean at or above the largest kept atom");

  double lo = 0.0, hi = 3.0 / std::max(r, 1e-300);
  mgf_eval ehi = truncated_mgf(law, hi, r);
  int expand = 0;
  while (ehi.m < t) {
    lo = hi;
    hi *= 2.0;
    if (++expand > 300)
      throw std::runtime_error("solve_lambda: target mean too close to the cap");
    ehi = truncated_mgf(law, hi, r);
  }

  double tol = 1e-13 * std::max(std::fabs(t), std::fabs(m0)) + 1e-300;
  double u = 0.5 * (lo + hi);
  mgf_eval ec = truncated_mgf(law, u, r);
  int it = 1;
  for (; it < 120; ++it) {
    double g = ec.m - t;
    if (g >= 0.0) hi = u; else lo = u;
    if (std::fabs(g) <= tol) break;
    double un = u - g / std::max(ec.var, 1e-300);
    if (!(un > lo && un < hi)) un = 0.5 * (lo + hi);
    if (un == u || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    u = un;
    ec = truncated_mgf(law, u, r);
  }

  sol.lambda = u;
  sol.M = ec.M;
  sol.Mp = ec.Mp;
  sol.Mpp = ec.Mpp;
  sol.log_M = ec.log_M;
  sol.H = -ec.log_M + t * u;
  sol.residual = std::fabs(ec.m - t);
  sol.iterations = it;
  return sol;
}

struct entropy_check {
  double ratio = 0.0;     // n H(x/n) * 2 n sigma2(r_n) / x^2
  double n_entropy = 0.0; // n H(x/n)
  double r_n = 0.0;
  double lambda = 0.0;
  bool at_mean_floor = false; // solver landed on lambda = 0: ratio meaningless
};

// Measures how close n H(x/n) is to the Gaussian quadratic
// x^2 / (2 n sigma2(r_n)); the ratio tends to 1 as n grows.
inline entropy_check entropy_asymptotic_check(const lattice_law& law, std::int64_t n,
                                              double x) {
  if (!(x > 0.0)) throw std::invalid_argument("entropy_asymptotic_check: x must be > 0");
  if (n < 1) throw std::invalid_argument("entropy_asymptotic_check: n must be >= 1");
  r_result rr = solve_r_n(law, n, x);
  tilt_solution sol = solve_lambda(law, x / static_cast<double>(n), rr.r);
  entropy_check out;
  out.r_n = rr.r;
  out.lambda = sol.lambda;
  out.n_entropy = static_cast<double>(n) * sol.H;
  out.at_mean_floor = sol.lambda == 0.0;
  out.ratio = out.at_mean_floor
                  ? std::numeric_limits<double>::quiet_NaN()
                  : out.n_entropy * 2.0 * static_cast<double>(n) * law.sigma2(rr.r) /
                        (x * x);
  return out;
}

enum class gw_mode { integral, local };

struct gw_prediction {
  double value = 0.0;     // exp(log_value); may underflow to 0 for deep tails
  double log_value = 0.0; // always finite
  double n_entropy = 0.0;
  double lambda = 0.0;
  double r_used = 0.0;
  double a_n = 0.0;
  bool in_regime = false; // x >= a_n and x decisively below n
};

// Closed-form predictors for the truncated-maximum tail and atom:
//   integral: P(S_n - b >= x, M_n <= r_n)
//             ~ (1/sqrt(2 pi)) (a_n/x) sqrt(sigma2(r)/sigma2(a_n)) e^{-nH(x/n)}
//   local:    P(S_n - b = x, M_n <= r_n) ~ e^{-nH(x/n)} / sqrt(2 pi n sigma2(r))
// trunc_scale rescales the truncation to a * r_n (the analysis allows
// any fixed a > 0; the prefactor is verified against the oracle).
inline gw_prediction gaussian_window_predictor(const lattice_law& law, std::int64_t n,
                                               double x, gw_mode mode,
                                               double trunc_scale = 1.0) {
  if (n < 1) throw std::invalid_argument("gaussian_window_predictor: n must be >= 1");
  if (!(x > 0.0)) throw std::invalid_argument("gaussian_window_predictor: x must be > 0");
  if (!(trunc_scale > 0.0))
    throw std::invalid_argument("gaussian_window_predictor: trunc_scale must be > 0");
  double a = solve_a_n(law, n);
  double r = trunc_scale * solve_r_n(law, n, x).r;
  tilt_solution sol = solve_lambda(law, x / static_cast<double>(n), r);
  double nH = static_cast<double>(n) * sol.H;
  double s2r = law.sigma2(r);
  double lv;
  if (mode == gw_mode::integral) {
    lv = -half_log_two_pi + std::log(a / x) + 0.5 * std::log(s2r / law.sigma2(a)) - nH;
  } else {
    lv = -nH - 0.5 * std::log(2.0 * M_PI * static_cast<double>(n) * s2r);
  }
  gw_prediction out;
  out.value = std::exp(lv);
  out.log_value = lv;
  out.n_entropy = nH;
  out.lambda = sol.lambda;
  out.r_used = r;
  out.a_n = a;
  out.in_regime = x >= a * (1.0 - 1e-12) && x <= 0.2 * static_cast<double>(n);
  return out;
}

struct com_check {
  xfloat lhs;      // e^{-nH} E_lambda[e^{-lambda(S-x)} 1{S >= x}], exact tilted sum
  xfloat rhs;      // P(S_n >= x, all steps <= floor(r+mu)), direct convolution
  double rel_gap = 0.0;
  double lambda = 0.0;
  std::int64_t khi = 0;
};

// The change-of-measure identity behind the integral predictor, as an
// exact finite-n statement: both sides are computed by independent
// exact convolutions and must agree to floating-point accuracy.
// x is the raw (uncentered) lattice threshold.
inline com_check change_of_measure_check(const lattice_law& law, std::int64_t n,
                                         std::int64_t raw_x, double r,
                                         int threads = 0) {
  if (n < 1) throw std::invalid_argument("change_of_measure_check: n must be >= 1");
  if (law.left_unbounded())
    throw std::invalid_argument(
        "change_of_measure_check: step law must be bounded below");
  double mu = law.mean();
  std::int64_t khi = detail_tilt::trunc_cell(law, r);
  double t = (static_cast<double>(raw_x) - static_cast<double>(n) * mu) /
             static_cast<double>(n);
  tilt_solution sol = solve_lambda(law, t, r);
  if (sol.lambda * (static_cast<double>(khi) - mu) > 600.0)
    throw std::runtime_error("change_of_measure_check: tilt too strong");

  std::vector<std::pair<std::int64_t, double>> atoms;
  for (std::int64_t k = law.table_lo(); k <= khi; ++k) {
    double p = law.pmf(k);
    if (p <= 0.0) continue;
    atoms.emplace_back(k, p * std::exp(sol.lambda * (static_cast<double>(k) - mu)));
  }
  lattice_law tilted = lattice_law::bounded(atoms);

  sum_build_options o;
  o.window = sum_window{n * law.table_lo(), n * khi};
  o.accumulation = 1;
  o.threads = threads;
  sum_distribution dt_ = build_sum_distribution(tilted, n, o);
  xfloat esum = xfloat::zero();
  for (std::int64_t s = std::max(raw_x, dt_.window.lo); s <= dt_.window.hi; ++s) {
    xfloat c = dt_.at(s);
    if (c.is_zero()) continue;
    esum = esum + c * xfloat::from_log(-sol.lambda * static_cast<double>(s - raw_x));
  }
  com_check out;
  out.lhs = xfloat::from_log(-static_cast<double>(n) * sol.H) * esum;

  sum_build_options oc;
  oc.window = o.window;
  oc.accumulation = 1;
  oc.threads = threads;
  oc.max_step = khi;
  sum_distribution dc = build_sum_distribution(law, n, oc);
  out.rhs = dc.tail_geq(raw_x);
  out.rel_gap = rel_diff(out.lhs, out.rhs);
  out.lambda = sol.lambda;
  out.khi = khi;
  return out;
}

} // namespace bigjump

#endif // BIGJUMP_TILT_HPP
