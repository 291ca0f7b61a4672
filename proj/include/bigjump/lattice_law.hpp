#ifndef BIGJUMP_LATTICE_LAW_HPP
#define BIGJUMP_LATTICE_LAW_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "bigjump/slowly_varying.hpp"
#include "bigjump/xfloat.hpp"

namespace bigjump {

enum class law_family { pareto_zeta, zrp_occupation, two_sided_stable, bounded, custom };

// Asymptotic tail description P(xi = +-k) ~ C * L(k) * k^-(1+beta), the
// form the prediction formulas consume.  Internal tail sums use an exact
// per-family formula where one exists; this struct is only the asymptotic
// model.
struct tail_model {
  double beta = 0.0;
  sv_spec L;
  double C = 0.0;
};

namespace detail {

inline double simpson_rec(const std::function<double(double)>& f, double a, double b,
                          double fa, double fm, double fb, double whole, double eps,
                          int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  // eps is an absolute error budget for this segment; the second stop
  // is the double-precision floor of the segment itself
  if (depth <= 0 || std::fabs(delta) <= 15.0 * eps ||
      std::fabs(delta) <= 4e-16 * (std::fabs(left) + std::fabs(right)))
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, eps * 0.5, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, eps * 0.5, depth - 1);
}

// adaptive Simpson, tolerance relative to the whole integral, smooth
// integrands
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-14, int max_depth = 48) {
  if (!(b > a)) return 0.0;
  // coarse composite estimate fixes the absolute budget
  constexpr int kPanels = 64;
  double h = (b - a) / kPanels, rough = 0.0;
  double prev = f(a);
  for (int i = 0; i < kPanels; ++i) {
    double mid = f(a + (i + 0.5) * h), next = f(a + (i + 1) * h);
    rough += h / 6.0 * (prev + 4.0 * mid + next);
    prev = next;
  }
  double eps = rel_tol * std::max(std::fabs(rough), 1e-300);
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, eps, max_depth);
}

// Smooth positive tail term: value and logarithmic derivative.
struct smooth_term {
  std::function<double(double)> f;
  std::function<double(double)> dlog; // f'(x)/f(x)
};

// sum_{k=a}^{inf} f(k): exact head up to max(a-1, head_cap), then
// Euler-Maclaurin integral + f/2 - f'/12.  With the head pushed to 2^14
// the dropped f''' term is O(s^4 A^-4) relative, below 1e-15 for the
// polynomial-type tails used here.
inline double em_tail_sum(const smooth_term& t, double a, double head_cap = 16384.0) {
  double head_end = std::max(a - 1.0, head_cap);
  neumaier head;
  for (double k = a; k <= head_end; k += 1.0) head.add(t.f(k));
  double A = head_end + 1.0;
  double fa = t.f(A);
  if (!(fa > 0.0)) return head.value();
  // integrate in u = log x until the integrand decays by 1e-30
  double u0 = std::log(A);
  double ucut = u0;
  double step = 0.5;
  while (true) {
    double x = std::exp(ucut + step);
    double val = t.f(x) * x;
    if (val < fa * A * 1e-30 || ucut + step > u0 + 400.0) { ucut += step; break; }
    ucut += step;
    step = std::min(step * 1.4, 8.0);
  }
  double integral = integrate(
      [&](double u) { double x = std::exp(u); return t.f(x) * x; }, u0, ucut, 1e-14);
  // remainder past the cut, extrapolating the integrand's local power in
  // u; exact when f(x) x is a pure power of log x, which is the only way
  // the cut is reached with anything left
  double xc = std::exp(ucut);
  double gc = t.f(xc) * xc;
  if (gc > 0.0) {
    double s_eff = 1.0 + xc * t.dlog(xc);
    if (s_eff * ucut < -1.0) integral += gc * ucut / (-s_eff * ucut - 1.0);
  }
  double corr = 0.5 * fa - (1.0 / 12.0) * fa * t.dlog(A);
  return head.value() + integral + corr;
}

// sum_{k=a}^{b} f(k), finite b
inline double em_range_sum(const smooth_term& t, double a, double b,
                           double head_cap = 16384.0) {
  if (b < a) return 0.0;
  if (b - a <= 2.0 * head_cap + 8.0) {
    neumaier s;
    for (double k = a; k <= b; k += 1.0) s.add(t.f(k));
    return s.value();
  }
  double ha = std::max(a - 1.0, head_cap); // last k of the direct head
  double hb = b - head_cap;                // first k of the direct tail
  neumaier s;
  for (double k = a; k <= ha; k += 1.0) s.add(t.f(k));
  for (double k = hb; k <= b; k += 1.0) s.add(t.f(k));
  double A = ha + 1.0, B = hb - 1.0;
  double integral = integrate(
      [&](double u) { double x = std::exp(u); return t.f(x) * x; }, std::log(A),
      std::log(B), 1e-14);
  double corr = 0.5 * (t.f(A) + t.f(B)) +
                (1.0 / 12.0) * (t.f(B) * t.dlog(B) - t.f(A) * t.dlog(A));
  return s.value() + integral + corr;
}

inline std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t v) {
  h ^= v;
  return h * 1099511628211ULL;
}

inline std::uint64_t fnv_double(std::uint64_t h, double d) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(d));
  std::memcpy(&bits, &d, sizeof(bits));
  return fnv_mix(h, bits);
}

inline double digamma(double v) {
  double r = 0.0;
  while (v < 12.0) { r -= 1.0 / v; v += 1.0; }
  double iv = 1.0 / v, iv2 = iv * iv;
  return r + std::log(v) - 0.5 * iv -
         iv2 * (1.0 / 12.0 - iv2 * (1.0 / 120.0 - iv2 / 252.0));
}

// lgamma(x+1) - lgamma(x+1+b).  The naive difference cancels
// catastrophically once lgamma exceeds ~1e12, so large x goes through
// the Stirling series in difference form.
inline double lgamma_diff(double x, double b) {
  double z1 = x + 1.0, z2 = x + 1.0 + b;
  if (x < 150.0) return std::lgamma(z1) - std::lgamma(z2);
  auto S = [](double z) {
    double iz = 1.0 / z, iz2 = iz * iz;
    return iz * (1.0 / 12.0 + iz2 * (-1.0 / 360.0 + iz2 * (1.0 / 1260.0)));
  };
  return -(z1 - 0.5) * std::log1p(b / z1) - b * std::log(z2) + b + S(z1) - S(z2);
}

// digamma(x+1) - digamma(x+1+b), same stability concern
inline double digamma_diff(double x, double b) {
  double z1 = x + 1.0, z2 = x + 1.0 + b;
  if (x < 150.0) return digamma(z1) - digamma(z2);
  return -std::log1p(b / z1) - 0.5 * b / (z1 * z2) -
         b * (z1 + z2) / (12.0 * z1 * z1 * z2 * z2);
}

} // namespace detail

enum class zrp_g_form {
  power_ratio, // g(k) = (k/(k-1))^b with g(1) := 1, so w(n) = n^-b exactly
  rational     // g(k) = 1 + b/k, so w(n) = Gamma(n+1)Gamma(1+b)/Gamma(n+1+b)
};

// Integer-lattice law: explicit mass table on [table_lo, table_hi] plus
// optional analytic tails on either side.  Immutable after construction.
class lattice_law {
public:
  // --- builders ---

  // P(xi = k) = C L(k) k^-(1+beta) on k >= 1, C normalizing.  If L is
  // the oscillating-exponent variant the whole tail is given by that
  // variant and beta is ignored (the exponent wanders around -gamma).
  static lattice_law pareto_zeta(double beta, sv_spec L, std::int64_t k_cap) {
    if (!L.is_factor()) return oscillating(L.gamma, k_cap);
    if (beta <= 0.0) throw std::invalid_argument("pareto_zeta: beta <= 0 not normalizable");
    if (k_cap < 1000) throw std::invalid_argument("pareto_zeta: K_cap too small");
    lattice_law law;
    law.family_ = law_family::pareto_zeta;
    law.table_lo_ = 1;
    law.pmf_.resize(static_cast<std::size_t>(k_cap));
    double s = 1.0 + beta;
    for (std::int64_t k = 1; k <= k_cap; ++k)
      law.pmf_[static_cast<std::size_t>(k - 1)] =
          L.eval(static_cast<double>(k)) * std::pow(static_cast<double>(k), -s);
    law.right_ = analytic_side{tail_kind::power, 1.0, beta, L, 0.0, 1.0};
    law.normalize_and_finish();
    law.right_model_ = tail_model{beta, L, law.norm_scale_};
    return law;
  }

  // Tail given directly: F_bar(x) = x^(-gamma + sin(log log x)) for
  // x >= 16; support starts at 16 with the sub-threshold mass collected
  // into the first atom.  gamma >= sqrt(2) keeps every mass nonnegative.
  static lattice_law oscillating(double gamma, std::int64_t k_cap) {
    if (gamma < 1.4142135623730951)
      throw std::invalid_argument("oscillating: gamma < sqrt(2) gives negative masses");
    if (k_cap < 1000) throw std::invalid_argument("oscillating: K_cap too small");
    lattice_law law;
    law.family_ = law_family::custom;
    law.table_lo_ = 16;
    law.pmf_.resize(static_cast<std::size_t>(k_cap - law.table_lo_ + 1));
    auto tail_raw = [gamma](double x) {
      return std::pow(x, -gamma + std::sin(std::log(std::log(x))));
    };
    law.pmf_[0] = 1.0 - tail_raw(16.0);
    for (std::int64_t k = 17; k <= k_cap; ++k)
      law.pmf_[static_cast<std::size_t>(k - law.table_lo_)] =
          tail_raw(static_cast<double>(k - 1)) - tail_raw(static_cast<double>(k));
    law.right_ = analytic_side{tail_kind::oscillating, 1.0, gamma, sv_spec{}, 0.0, 1.0};
    law.normalize_and_finish();
    return law;
  }

  // Zero-range occupation marginal nu(n) = w(n) phi^n / z(phi), n >= 0,
  // with w(0) = 1 and w(n) = prod_{k=1..n} 1/g(k).
  static lattice_law zrp_occupation(zrp_g_form form, double b, double phi,
                                    std::int64_t k_cap) {
    if (b <= 1.0) throw std::invalid_argument("zrp_occupation: b <= 1 not normalizable");
    if (!(phi > 0.0 && phi <= 1.0))
      throw std::invalid_argument("zrp_occupation: phi must lie in (0, 1]");
    if (k_cap < 1000) throw std::invalid_argument("zrp_occupation: K_cap too small");
    lattice_law law;
    law.family_ = law_family::zrp_occupation;
    law.table_lo_ = 0;
    law.pmf_.resize(static_cast<std::size_t>(k_cap + 1));
    law.pmf_[0] = 1.0;
    double lphi = std::log(phi);
    for (std::int64_t n = 1; n <= k_cap; ++n) {
      double nn = static_cast<double>(n);
      double lw = (form == zrp_g_form::power_ratio)
                      ? -b * std::log(nn)
                      : detail::lgamma_diff(nn, b) + std::lgamma(1.0 + b);
      law.pmf_[static_cast<std::size_t>(n)] = std::exp(lw + nn * lphi);
    }
    if (form == zrp_g_form::power_ratio)
      law.right_ =
          analytic_side{tail_kind::power, 1.0, b - 1.0, sv_spec::constant_(1.0), b, phi};
    else
      law.right_ = analytic_side{tail_kind::zrp_rational, 1.0, b - 1.0,
                                 sv_spec::constant_(1.0), b, phi};
    law.normalize_and_finish();
    if (phi == 1.0) {
      double c_asym =
          (form == zrp_g_form::power_ratio) ? 1.0 : std::exp(std::lgamma(1.0 + b));
      law.right_model_ =
          tail_model{b - 1.0, sv_spec::constant_(1.0), law.norm_scale_ * c_asym};
    }
    return law;
  }

  // Two-sided: P(xi = k) = C Lr(k) k^-(1+beta_r) and P(xi = -k) =
  // C rho Ll(k) k^-(1+beta_l) for k >= 1; no atom at 0.
  static lattice_law two_sided_stable(double beta_r, sv_spec Lr, double beta_l, sv_spec Ll,
                                      double rho, std::int64_t k_cap) {
    if (beta_r <= 0.0 || beta_l <= 0.0)
      throw std::invalid_argument("two_sided_stable: beta <= 0 not normalizable");
    if (!(rho > 0.0)) throw std::invalid_argument("two_sided_stable: rho must be positive");
    if (k_cap < 1000) throw std::invalid_argument("two_sided_stable: K_cap too small");
    lattice_law law;
    law.family_ = law_family::two_sided_stable;
    law.table_lo_ = -k_cap;
    law.pmf_.resize(static_cast<std::size_t>(2 * k_cap + 1));
    for (std::int64_t k = 1; k <= k_cap; ++k) {
      double kk = static_cast<double>(k);
      law.pmf_[static_cast<std::size_t>(k_cap + k)] =
          Lr.eval(kk) * std::pow(kk, -(1.0 + beta_r));
      law.pmf_[static_cast<std::size_t>(k_cap - k)] =
          rho * Ll.eval(kk) * std::pow(kk, -(1.0 + beta_l));
    }
    law.right_ = analytic_side{tail_kind::power, 1.0, beta_r, Lr, 0.0, 1.0};
    law.left_ = analytic_side{tail_kind::power, rho, beta_l, Ll, 0.0, 1.0};
    law.normalize_and_finish();
    law.right_model_ = tail_model{beta_r, Lr, law.norm_scale_};
    law.left_model_ = tail_model{beta_l, Ll, law.norm_scale_ * rho};
    return law;
  }

  static lattice_law bounded(const std::vector<std::pair<std::int64_t, double>>& atoms) {
    if (atoms.empty()) throw std::invalid_argument("bounded: no atoms");
    std::int64_t lo = atoms[0].first, hi = atoms[0].first;
    for (const auto& [k, p] : atoms) {
      if (p < 0.0) throw std::invalid_argument("bounded: negative mass");
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
    lattice_law law;
    law.family_ = law_family::bounded;
    law.table_lo_ = lo;
    law.pmf_.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (const auto& [k, p] : atoms) law.pmf_[static_cast<std::size_t>(k - lo)] += p;
    law.normalize_and_finish();
    return law;
  }

  static lattice_law custom(std::int64_t lo, std::vector<double> masses,
                            std::optional<tail_model> right, std::optional<tail_model> left) {
    lattice_law law;
    law.family_ = law_family::custom;
    law.table_lo_ = lo;
    law.pmf_ = std::move(masses);
    if (right)
      law.right_ = analytic_side{tail_kind::power, right->C, right->beta, right->L, 0.0, 1.0};
    if (left)
      law.left_ = analytic_side{tail_kind::power, left->C, left->beta, left->L, 0.0, 1.0};
    law.normalize_and_finish();
    if (right)
      law.right_model_ = tail_model{right->beta, right->L, law.norm_scale_ * right->C};
    if (left) law.left_model_ = tail_model{left->beta, left->L, law.norm_scale_ * left->C};
    return law;
  }

  // --- basic queries ---

  law_family family() const { return family_; }
  std::int64_t table_lo() const { return table_lo_; }
  std::int64_t table_hi() const {
    return table_lo_ + static_cast<std::int64_t>(pmf_.size()) - 1;
  }
  bool left_unbounded() const { return left_.has_value(); }
  bool right_unbounded() const { return right_.has_value(); }
  bool has_finite_mean() const { return finite_mean_; }
  // centering point: the mean when finite, otherwise 0
  double mean() const { return mu_; }
  bool aperiodic() const { return aperiodic_; }
  std::int64_t period() const { return period_; }
  std::uint64_t hash() const { return hash_; }
  double normalization_residual() const { return norm_residual_; }
  const std::optional<tail_model>& right_model() const { return right_model_; }
  const std::optional<tail_model>& left_model() const { return left_model_; }

  double pmf(std::int64_t k) const {
    if (k >= table_lo_ && k <= table_hi()) return pmf_[idx(k)];
    if (k > table_hi() && right_) return model_pmf(*right_, static_cast<double>(k));
    if (k < table_lo_ && left_) return model_pmf(*left_, static_cast<double>(-k));
    return 0.0;
  }

  // P(xi > x)
  double tail(double x) const {
    if (x >= 9.0e15) return right_ ? suffix0_real(x) : 0.0;
    return suffix0(static_cast<std::int64_t>(std::floor(x)) + 1);
  }

  // P(xi <= x)
  double cdf(double x) const {
    if (x <= -9.0e15) return left_ ? prefix0_real(x) : 0.0;
    return prefix0(static_cast<std::int64_t>(std::floor(x)));
  }

  // P(|xi - mu| > x); the left part is strict, P(xi < mu - x)
  double abs_tail_centered(double x) const {
    if (x < 0.0) return 1.0;
    double t = mu_ - x;
    if (t <= -9.0e15) return tail(mu_ + x) + (left_ ? prefix0_real(t) : 0.0);
    return tail(mu_ + x) + prefix0(static_cast<std::int64_t>(std::ceil(t)) - 1);
  }

  // sigma^2(x) = E[(xi - mu)^2 1{|xi - mu| <= x}]
  double sigma2(double x) const {
    if (x < 0.0) return 0.0;
    std::int64_t lo = static_cast<std::int64_t>(std::ceil(mu_ - x));
    std::int64_t hi = static_cast<std::int64_t>(std::floor(mu_ + x));
    auto [m0, m1, m2] = range_raw_moments(lo, hi);
    return std::max(0.0, m2 - 2.0 * mu_ * m1 + mu_ * mu_ * m0);
  }

  // sigma_bar^2(x) = sigma^2(x) + x^2 P(|xi - mu| > x)
  double sigma_bar2(double x) const { return sigma2(x) + x * x * abs_tail_centered(x); }

  // E[xi 1{|xi| <= x}], raw uncentered window
  double truncated_raw_mean(double x) const {
    if (x < 0.0) return 0.0;
    auto [m0, m1, m2] = range_raw_moments(static_cast<std::int64_t>(std::ceil(-x)),
                                          static_cast<std::int64_t>(std::floor(x)));
    (void)m0;
    (void)m2;
    return m1;
  }

  // E[|xi - mu| 1{|xi - mu| > x}]
  double abs_first_moment_beyond(double x) const {
    std::int64_t hi = static_cast<std::int64_t>(std::floor(mu_ - x));
    std::int64_t lo = static_cast<std::int64_t>(std::ceil(mu_ + x));
    if (static_cast<double>(hi) == mu_ - x) hi -= 1;
    if (static_cast<double>(lo) == mu_ + x) lo += 1;
    auto [l0, l1, l2] = range_raw_moments(std::numeric_limits<std::int64_t>::min(), hi);
    auto [r0, r1, r2] = range_raw_moments(lo, std::numeric_limits<std::int64_t>::max());
    (void)l2;
    (void)r2;
    return (mu_ * l0 - l1) + (r1 - mu_ * r0);
  }

  bool has_finite_variance() const { return finite_var_; }

  double variance() const {
    if (!finite_var_) throw std::domain_error("variance: infinite for this law");
    auto [m0, m1, m2] = range_raw_moments(std::numeric_limits<std::int64_t>::min(),
                                          std::numeric_limits<std::int64_t>::max());
    (void)m0;
    (void)m1;
    return m2 - mu_ * mu_;
  }

  // --- q functionals ---

  // q(x) = x^2 F_bar(x) / sigma^2(x), raw right tail
  double q_of(double x) const {
    double s2 = sigma2(x);
    if (s2 <= 0.0) throw std::domain_error("q_of: sigma2(x) == 0");
    return x * x * tail(x) / s2;
  }

  // centered two-sided version
  double q_bar(double x) const {
    double s2 = sigma2(x);
    if (s2 <= 0.0) throw std::domain_error("q_bar: sigma2(x) == 0");
    return x * x * abs_tail_centered(x) / s2;
  }

  // sup_{y >= x} q_bar(y).  Between atom breakpoints q_bar = c y^2 rises
  // to its value at the right edge of the piece, so each grid sample is
  // lifted to its piece maximum analytically; a geometric grid (ratio
  // 1.05) walks the pieces, extended until the envelope is clearly
  // decaying.
  double q_star(double x) const {
    double best = piece_max_q_bar(x);
    double y = x;
    double prev = best;
    int decreasing_run = 0;
    double y_stop = std::max({x * 100.0, static_cast<double>(table_hi()) * 100.0, 1e7});
    while (true) {
      y *= 1.05;
      double v = piece_max_q_bar(y);
      best = std::max(best, v);
      decreasing_run = (v < prev) ? decreasing_run + 1 : 0;
      prev = v;
      if (y > y_stop && (decreasing_run >= 12 || v <= 1e-300)) break;
      if (y > 1e16) break;
    }
    return best;
  }

  // q_tilde(x) = (1/x) int_0^x q_bar(y) dy.  Piecewise exact (between
  // atom breakpoints q_bar = c y^2) up to the table edge, panel
  // integration on the smooth analytic region beyond.  Pieces where
  // sigma^2 vanishes contribute zero.
  double q_tilde(double x) const {
    if (x <= 0.0) throw std::domain_error("q_tilde: x <= 0");
    neumaier acc;
    double cap = std::min(x, static_cast<double>(table_hi()) + std::fabs(mu_) + 2.0);
    double y = 0.0;
    while (y < cap) {
      double ynext = std::min(next_breakpoint(y), cap);
      double mid = 0.5 * (y + ynext);
      double s2 = sigma2(mid);
      if (s2 > 0.0) {
        double c = abs_tail_centered(mid) / s2;
        acc.add(c * (ynext * ynext * ynext - y * y * y) / 3.0);
      }
      y = ynext;
    }
    if (x > cap)
      acc.add(detail::integrate([this](double t) { return q_bar(t); }, cap, x, 3e-10, 22));
    return acc.value() / x;
  }

  // --- regular variation diagnostic ---

  struct regvar_report {
    std::vector<double> lambda;
    std::vector<double> sup_ratio; // sup over the x grid of F_bar(lambda x)/F_bar(x)
    std::vector<double> inf_ratio;
    double matuszewska_lo = 0.0;
    double matuszewska_hi = 0.0;
    bool intermediate_plausible = false;
  };

  regvar_report regvar_diagnostic(const std::vector<double>& lambda_grid,
                                  const std::vector<double>& x_grid) const {
    regvar_report rep;
    double lo_idx = std::numeric_limits<double>::infinity();
    double hi_idx = -std::numeric_limits<double>::infinity();
    for (double lam : lambda_grid) {
      if (lam < 1.0) throw std::invalid_argument("regvar_diagnostic: lambda < 1");
      double sup = -std::numeric_limits<double>::infinity();
      double inf = std::numeric_limits<double>::infinity();
      for (double x : x_grid) {
        double r = tail(lam * x) / tail(x);
        sup = std::max(sup, r);
        inf = std::min(inf, r);
      }
      rep.lambda.push_back(lam);
      rep.sup_ratio.push_back(sup);
      rep.inf_ratio.push_back(inf);
      // index estimates only from genuine stretches; small lambdas are
      // swamped by lattice granularity and feed the intermediate check
      if (lam >= 2.0 && inf > 0.0 && sup > 0.0) {
        lo_idx = std::min(lo_idx, std::log(inf) / std::log(lam));
        hi_idx = std::max(hi_idx, std::log(sup) / std::log(lam));
      }
    }
    rep.matuszewska_lo = lo_idx;
    rep.matuszewska_hi = hi_idx;
    double lam_min = std::numeric_limits<double>::infinity();
    double inf_at_min = 1.0;
    for (std::size_t i = 0; i < rep.lambda.size(); ++i)
      if (rep.lambda[i] > 1.0 && rep.lambda[i] < lam_min) {
        lam_min = rep.lambda[i];
        inf_at_min = rep.inf_ratio[i];
      }
    rep.intermediate_plausible = std::isfinite(lam_min) && (1.0 - inf_at_min) < 0.05;
    return rep;
  }

private:
  enum class tail_kind { power, zrp_rational, oscillating };

  // Analytic mass model on one side, evaluated at distance k >= 1 from
  // zero on that side.
  struct analytic_side {
    tail_kind kind = tail_kind::power;
    double scale = 1.0; // multiplies the model (left weight etc.)
    double beta = 0.0;  // power: pmf ~ scale L(k) k^-(1+beta); oscillating: gamma
    sv_spec L;
    double b = 0.0;   // zrp_rational: g parameter
    double phi = 1.0; // fugacity factor phi^k (1 for the non-driven laws)
  };

  lattice_law() = default;

  std::size_t idx(std::int64_t k) const { return static_cast<std::size_t>(k - table_lo_); }

  double model_pmf(const analytic_side& s, double k) const {
    double fug = (s.phi < 1.0) ? std::exp(k * std::log(s.phi)) : 1.0;
    switch (s.kind) {
      case tail_kind::power:
        return norm_scale_ * s.scale * s.L.eval(k) * std::pow(k, -(1.0 + s.beta)) * fug;
      case tail_kind::zrp_rational: {
        double lw = detail::lgamma_diff(k, s.b) + std::lgamma(1.0 + s.b);
        return norm_scale_ * s.scale * std::exp(lw) * fug;
      }
      case tail_kind::oscillating: {
        double lt_hi = osc_log_tail(s, k - 1.0), lt_lo = osc_log_tail(s, k);
        return norm_scale_ * s.scale * std::exp(lt_lo) * std::expm1(lt_hi - lt_lo);
      }
    }
    return 0.0;
  }

  static double osc_log_tail(const analytic_side& s, double x) {
    double xx = std::max(x, 16.0);
    double lx = std::log(xx);
    return (-s.beta + std::sin(std::log(lx))) * lx;
  }

  static double osc_tail(const analytic_side& s, double x) {
    return std::exp(osc_log_tail(s, x));
  }

  detail::smooth_term model_term(const analytic_side& s, int power) const {
    double c = norm_scale_ * s.scale;
    double lphi = (s.phi < 1.0) ? std::log(s.phi) : 0.0;
    switch (s.kind) {
      case tail_kind::power: {
        double sexp = 1.0 + s.beta - static_cast<double>(power);
        sv_spec L = s.L;
        return {[c, sexp, L, lphi](double x) {
                  return c * L.eval(x) * std::pow(x, -sexp) * std::exp(x * lphi);
                },
                [sexp, L, lphi](double x) {
                  double d = -sexp / x + lphi;
                  if (L.variant == sv_variant::log_power)
                    d += L.a / (x * std::log(std::max(x, L.x_floor)));
                  else if (L.variant == sv_variant::loglog_power) {
                    double lx = std::log(std::max(x, L.x_floor));
                    d += L.a / (x * lx * std::log(lx));
                  } else if (L.variant == sv_variant::exp_log_ratio) {
                    double llx = std::log(std::log(std::max(x, L.x_floor)));
                    d += L.a * (llx - 1.0) / (x * llx * llx);
                  }
                  return d;
                }};
      }
      case tail_kind::zrp_rational: {
        double b = s.b;
        double lgb = std::lgamma(1.0 + b);
        double pw = static_cast<double>(power);
        return {[c, b, lgb, lphi, pw](double x) {
                  double lw = detail::lgamma_diff(x, b) + lgb;
                  return c * std::exp(lw + x * lphi + pw * std::log(x));
                },
                [b, lphi, pw](double x) {
                  return detail::digamma_diff(x, b) + lphi + pw / x;
                }};
      }
      case tail_kind::oscillating:
        throw std::logic_error("model_term: oscillating tails use Abel sums");
    }
    throw std::logic_error("model_term: bad kind");
  }

  // sum of k^power * pmf over the analytic side, distances k in [a, b]
  double side_power_sum(const analytic_side& s, int power, double a, double b) const {
    if (b < a) return 0.0;
    if (s.kind == tail_kind::oscillating) return osc_power_sum(s, power, a, b);
    auto t = model_term(s, power);
    if (std::isinf(b)) return detail::em_tail_sum(t, a);
    return detail::em_range_sum(t, a, b);
  }

  // Abel summation against tail differences:
  //   sum_{k=a}^{b} pmf(k)     = F(a-1) - F(b)
  //   sum_{k=a}^{b} k   pmf(k) = a   F(a-1) - (b+1)   F(b) + sum_{j=a}^{b} F(j)
  //   sum_{k=a}^{b} k^2 pmf(k) = a^2 F(a-1) - (b+1)^2 F(b) + sum_{j=a}^{b} (2j+1) F(j)
  double osc_power_sum(const analytic_side& s, int power, double a, double b) const {
    double c = norm_scale_ * s.scale;
    auto F = [&s](double x) { return osc_tail(s, x); };
    auto dlogF = [&s](double x) {
      double xx = std::max(x, 16.0);
      double u = std::log(std::log(xx));
      return (-s.beta + std::sin(u) + std::cos(u)) / xx;
    };
    bool inf_b = std::isinf(b);
    double Fb = inf_b ? 0.0 : F(b);
    if (power == 0) return c * (F(a - 1.0) - Fb);
    if (power == 1) {
      detail::smooth_term tF{F, dlogF};
      double sumF = inf_b ? detail::em_tail_sum(tF, a) : detail::em_range_sum(tF, a, b);
      return c * (a * F(a - 1.0) - (inf_b ? 0.0 : (b + 1.0) * Fb) + sumF);
    }
    detail::smooth_term tjF{[F](double x) { return (2.0 * x + 1.0) * F(x); },
                            [dlogF](double x) { return 2.0 / (2.0 * x + 1.0) + dlogF(x); }};
    double sumJF = inf_b ? detail::em_tail_sum(tjF, a) : detail::em_range_sum(tjF, a, b);
    return c * (a * a * F(a - 1.0) - (inf_b ? 0.0 : (b + 1.0) * (b + 1.0) * Fb) + sumJF);
  }

  // raw moments (sum pmf, sum k pmf, sum k^2 pmf) over integers [lo, hi];
  // int64 min/max act as unbounded sentinels
  std::tuple<double, double, double> range_raw_moments(std::int64_t lo,
                                                       std::int64_t hi) const {
    if (hi < lo) return {0.0, 0.0, 0.0};
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    const std::int64_t tlo = table_lo_, thi = table_hi();
    if (left_ && lo < tlo) {
      // left atoms at j in [lo, min(hi, tlo-1)], distances d = -j
      double d_lo = static_cast<double>(-std::min(hi, tlo - 1));
      double d_hi = (lo == std::numeric_limits<std::int64_t>::min())
                        ? std::numeric_limits<double>::infinity()
                        : static_cast<double>(-lo);
      m0 += side_power_sum(*left_, 0, d_lo, d_hi);
      m1 -= side_power_sum(*left_, 1, d_lo, d_hi);
      m2 += side_power_sum(*left_, 2, d_lo, d_hi);
    }
    {
      std::int64_t a = std::max(lo, tlo), b = std::min(hi, thi);
      if (b >= a) {
        auto pick = [&](const std::vector<double>& pre, const std::vector<double>& suf) {
          double via_pre = pre[idx(b) + 1] - pre[idx(a)];
          double via_suf = suf[idx(a)] - suf[idx(b) + 1];
          return (std::fabs(pre[idx(a)]) < std::fabs(suf[idx(b) + 1])) ? via_pre : via_suf;
        };
        m0 += pick(pre0_, suf0_);
        m1 += pick(pre1_, suf1_);
        m2 += pick(pre2_, suf2_);
      }
    }
    if (right_ && hi > thi) {
      double a = static_cast<double>(std::max(lo, thi + 1));
      double b = (hi == std::numeric_limits<std::int64_t>::max())
                     ? std::numeric_limits<double>::infinity()
                     : static_cast<double>(hi);
      m0 += side_power_sum(*right_, 0, a, b);
      m1 += side_power_sum(*right_, 1, a, b);
      m2 += side_power_sum(*right_, 2, a, b);
    }
    return {m0, m1, m2};
  }

  // P(xi >= k)
  double suffix0(std::int64_t k) const {
    if (k <= table_lo_) {
      double s = suf0_[0];
      if (left_ && k < table_lo_)
        s += side_power_sum(*left_, 0, static_cast<double>(1 - table_lo_),
                            static_cast<double>(-k));
      return s;
    }
    if (k <= table_hi()) return suf0_[idx(k)];
    if (!right_) return 0.0;
    return side_power_sum(*right_, 0, static_cast<double>(k),
                          std::numeric_limits<double>::infinity());
  }

  // P(xi > x) for x beyond int64 range
  double suffix0_real(double x) const {
    return side_power_sum(*right_, 0, std::floor(x) + 1.0,
                          std::numeric_limits<double>::infinity());
  }

  // P(xi <= k)
  double prefix0(std::int64_t k) const {
    if (k >= table_hi()) {
      double s = left_total0_ + pre0_.back();
      if (right_ && k > table_hi())
        s += side_power_sum(*right_, 0, static_cast<double>(table_hi() + 1),
                            static_cast<double>(k));
      return s;
    }
    if (k >= table_lo_) return left_total0_ + pre0_[idx(k) + 1];
    if (!left_) return 0.0;
    return side_power_sum(*left_, 0, static_cast<double>(-k),
                          std::numeric_limits<double>::infinity());
  }

  double prefix0_real(double x) const {
    return side_power_sum(*left_, 0, -std::floor(x), std::numeric_limits<double>::infinity());
  }

  // max of q_bar over the piece containing y: the piece constants times
  // the squared right-edge position
  double piece_max_q_bar(double y) const {
    double s2 = sigma2(y);
    if (s2 <= 0.0) return 0.0;
    double b = next_breakpoint(y);
    double ye = y + (b - y) * 0.5; // same piece, both constants frozen
    return b * b * abs_tail_centered(ye) / s2;
  }

  // smallest sigma2 breakpoint strictly above y (|k - mu| for integer k)
  double next_breakpoint(double y) const {
    double up = std::floor(mu_ + y) + 1.0 - mu_;
    double dn = mu_ - (std::ceil(mu_ - y) - 1.0);
    double cand = std::min(up > y ? up : std::numeric_limits<double>::infinity(),
                           dn > y ? dn : std::numeric_limits<double>::infinity());
    return std::max(cand, y + 1e-12);
  }

  static bool side_mean_finite(const analytic_side& s) {
    if (s.phi < 1.0) return true;
    if (s.kind == tail_kind::oscillating) return s.beta > 2.0;
    return s.beta > 1.0;
  }

  static bool side_var_finite(const analytic_side& s) {
    if (s.phi < 1.0) return true;
    if (s.kind == tail_kind::oscillating) return s.beta > 3.0;
    if (s.beta == 2.0 && s.kind == tail_kind::power) {
      // borderline index: sum L(k)/k converges only for fast-decaying L
      if (s.L.variant == sv_variant::log_power) return s.L.a < -1.0;
      if (s.L.variant == sv_variant::exp_log_ratio) return s.L.a < 0.0;
      return false;
    }
    return s.beta > 2.0;
  }

  void normalize_and_finish() {
    for (double p : pmf_)
      if (p < 0.0 || !std::isfinite(p))
        throw std::invalid_argument("lattice_law: negative or non-finite mass");
    norm_scale_ = 1.0;
    neumaier tot;
    for (double p : pmf_) tot.add(p);
    if (right_)
      tot.add(side_power_sum(*right_, 0, static_cast<double>(table_hi() + 1),
                             std::numeric_limits<double>::infinity()));
    if (left_)
      tot.add(side_power_sum(*left_, 0, static_cast<double>(1 - table_lo_),
                             std::numeric_limits<double>::infinity()));
    double total = tot.value();
    if (!(total > 0.0) || !std::isfinite(total))
      throw std::invalid_argument("lattice_law: non-normalizable");
    for (double& p : pmf_) p /= total;
    norm_scale_ = 1.0 / total;

    finite_mean_ =
        (!right_ || side_mean_finite(*right_)) && (!left_ || side_mean_finite(*left_));
    finite_var_ = finite_mean_ && (!right_ || side_var_finite(*right_)) &&
                  (!left_ || side_var_finite(*left_));

    left_total0_ = left_ ? side_power_sum(*left_, 0, static_cast<double>(1 - table_lo_),
                                          std::numeric_limits<double>::infinity())
                         : 0.0;
    build_prefixes();

    if (finite_mean_) {
      neumaier m;
      for (std::size_t i = 0; i < pmf_.size(); ++i)
        m.add(static_cast<double>(table_lo_ + static_cast<std::int64_t>(i)) * pmf_[i]);
      if (right_)
        m.add(side_power_sum(*right_, 1, static_cast<double>(table_hi() + 1),
                             std::numeric_limits<double>::infinity()));
      if (left_)
        m.add(-side_power_sum(*left_, 1, static_cast<double>(1 - table_lo_),
                              std::numeric_limits<double>::infinity()));
      mu_ = m.value();
    } else {
      mu_ = 0.0; // centering convention for infinite-mean laws
    }

    if (right_ || left_) {
      aperiodic_ = true;
      period_ = 1;
    } else {
      std::int64_t g = 0, prev = 0;
      bool have_prev = false;
      for (std::size_t i = 0; i < pmf_.size(); ++i) {
        if (pmf_[i] <= 0.0) continue;
        std::int64_t k = table_lo_ + static_cast<std::int64_t>(i);
        if (have_prev) g = std::gcd(g, k - prev);
        prev = k;
        have_prev = true;
      }
      period_ = g;
      aperiodic_ = (g == 1);
    }

    {
      neumaier tot2;
      for (double p : pmf_) tot2.add(p);
      if (right_)
        tot2.add(side_power_sum(*right_, 0, static_cast<double>(table_hi() + 1),
                                std::numeric_limits<double>::infinity()));
      tot2.add(left_total0_);
      norm_residual_ = std::fabs(tot2.value() - 1.0);
      if (norm_residual_ > 1e-12)
        throw std::runtime_error("lattice_law: normalization residual above 1e-12");
    }

    std::uint64_t h = 14695981039346656037ULL;
    h = detail::fnv_mix(h, static_cast<std::uint64_t>(family_));
    h = detail::fnv_mix(h, static_cast<std::uint64_t>(table_lo_));
    for (double p : pmf_) h = detail::fnv_double(h, p);
    for (const auto& s : {right_, left_}) {
      if (!s) {
        h = detail::fnv_mix(h, 0xdeadULL);
        continue;
      }
      h = detail::fnv_mix(h, static_cast<std::uint64_t>(s->kind));
      h = detail::fnv_double(h, s->scale);
      h = detail::fnv_double(h, s->beta);
      h = detail::fnv_double(h, s->b);
      h = detail::fnv_double(h, s->phi);
    }
    hash_ = h;
  }

  void build_prefixes() {
    std::size_t n = pmf_.size();
    pre0_.assign(n + 1, 0.0);
    pre1_.assign(n + 1, 0.0);
    pre2_.assign(n + 1, 0.0);
    suf0_.assign(n + 1, 0.0);
    suf1_.assign(n + 1, 0.0);
    suf2_.assign(n + 1, 0.0);
    neumaier a0, a1, a2;
    for (std::size_t i = 0; i < n; ++i) {
      double k = static_cast<double>(table_lo_ + static_cast<std::int64_t>(i));
      a0.add(pmf_[i]);
      a1.add(k * pmf_[i]);
      a2.add(k * k * pmf_[i]);
      pre0_[i + 1] = a0.value();
      pre1_[i + 1] = a1.value();
      pre2_[i + 1] = a2.value();
    }
    neumaier b0, b1, b2;
    if (right_) {
      double a = static_cast<double>(table_hi() + 1);
      double inf = std::numeric_limits<double>::infinity();
      b0.add(side_power_sum(*right_, 0, a, inf));
      if (side_mean_finite(*right_)) b1.add(side_power_sum(*right_, 1, a, inf));
      if (side_var_finite(*right_)) b2.add(side_power_sum(*right_, 2, a, inf));
      // divergent suffix moments stay zero here; truncated queries route
      // through range_raw_moments with finite hi and never read them
    }
    suf0_[n] = b0.value();
    suf1_[n] = b1.value();
    suf2_[n] = b2.value();
    for (std::size_t i = n; i-- > 0;) {
      double k = static_cast<double>(table_lo_ + static_cast<std::int64_t>(i));
      b0.add(pmf_[i]);
      b1.add(k * pmf_[i]);
      b2.add(k * k * pmf_[i]);
      suf0_[i] = b0.value();
      suf1_[i] = b1.value();
      suf2_[i] = b2.value();
    }
  }

  law_family family_ = law_family::custom;
  std::int64_t table_lo_ = 0;
  std::vector<double> pmf_;
  std::optional<analytic_side> right_, left_;
  std::optional<tail_model> right_model_, left_model_;
  std::vector<double> pre0_, pre1_, pre2_, suf0_, suf1_, suf2_;
  double mu_ = 0.0;
  double norm_scale_ = 1.0;
  double norm_residual_ = 0.0;
  double left_total0_ = 0.0;
  bool finite_mean_ = true;
  bool finite_var_ = true;
  bool aperiodic_ = true;
  std::int64_t period_ = 1;
  std::uint64_t hash_ = 0;
};

} // namespace bigjump

#endif
