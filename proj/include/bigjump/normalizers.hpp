#ifndef BIGJUMP_NORMALIZERS_HPP
#define BIGJUMP_NORMALIZERS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bigjump/csv.hpp"
#include "bigjump/lattice_law.hpp"

namespace bigjump {

// a_n is the root of a^2 = n sigma_bar^2(a).  The ratio
// g(a) = a^2 / sigma_bar^2(a) is continuous (the truncated-variance jump
// at each atom distance cancels against the complement term exactly) and
// non-decreasing, with g >= 1 everywhere and g -> infinity, so the root
// is the unique up-crossing of level n.  Bisection on g(a) > n, then a
// fixed-point polish a <- sqrt(n sigma_bar^2(a)).
inline double solve_a_n(const lattice_law& law, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("solve_a_n: n < 1");
  auto g = [&law](double a) {
    double sb = law.sigma_bar2(a);
    if (sb <= 0.0) return std::numeric_limits<double>::infinity();
    return a * a / sb;
  };
  if (law.sigma_bar2(1.0) <= 0.0 && law.sigma_bar2(1e6) <= 0.0)
    throw std::domain_error("solve_a_n: degenerate law");
  double nn = static_cast<double>(n);
  double hi = 1.0;
  while (g(hi) <= nn) {
    hi *= 2.0;
    if (hi > 1e200) throw std::runtime_error("solve_a_n: no up-crossing found");
  }
  double lo = hi * 0.5;
  if (hi == 1.0) {
    // g already above n at 1: shrink; g(0+) = 1/P(|xi-mu|>0) can exceed n
    lo = 1.0;
    while (g(lo) > nn) {
      lo *= 0.5;
      if (lo < 1e-9)
        throw std::domain_error("solve_a_n: n below g(0+), no root");
    }
    hi = lo * 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (g(mid) > nn ? hi : lo) = mid;
  }
  double a = 0.5 * (lo + hi);
  double best = a, best_res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 6; ++it) {
    double res = std::fabs(a * a - nn * law.sigma_bar2(a)) / (a * a);
    if (res < best_res) {
      best_res = res;
      best = a;
    }
    if (res == 0.0) break;
    a = std::sqrt(nn * law.sigma_bar2(a));
  }
  if (best_res > 1e-10)
    throw std::runtime_error("solve_a_n: residual " + std::to_string(best_res));
  return best;
}

// classical normalizer, defined only for finite variance
inline double sigma_sqrt_n(const lattice_law& law, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("sigma_sqrt_n: n < 1");
  return std::sqrt(law.variance() * static_cast<double>(n));
}

// centering sequence by stability index: none below alpha = 1, truncated
// raw mean at alpha = 1, full mean above
inline double centering_b_n(const lattice_law& law, std::int64_t n, double alpha,
                            double a_n) {
  if (!(alpha > 0.0) || alpha > 2.0)
    throw std::invalid_argument("centering_b_n: alpha outside (0, 2]");
  double nn = static_cast<double>(n);
  if (alpha < 1.0) return 0.0;
  if (alpha == 1.0) return nn * law.truncated_raw_mean(a_n);
  return nn * law.mean();
}

// omega_n = a_n / sqrt(|log q(a_n)|), the boundary between the Gaussian
// and one-big-jump zones; defined only while 0 < q < 1
inline double omega_from(double a_n, double q) {
  if (!(q > 0.0) || q >= 1.0)
    throw std::domain_error("omega_from: q outside (0, 1)");
  return a_n / std::sqrt(-std::log(q));
}

// left-hand side of the sufficient condition for normal approximation on
// [0, omega_n]: n F(mu - omega_n) + |n sigma^2(omega_n) - a_n^2| / omega_n^2.
// Vanishing along n is what the condition asks for.
inline double rozovskii_diagnostic(const lattice_law& law, std::int64_t n,
                                   double a_n) {
  double q = law.q_of(a_n);
  double w = omega_from(a_n, q);
  double nn = static_cast<double>(n);
  double term1 = nn * law.cdf(law.mean() - w);
  double term2 = std::fabs(nn * law.sigma2(w) - a_n * a_n) / (w * w);
  return term1 + term2;
}

// left-hand side of the final smoothness condition:
// [sigma^2(x sqrt(|log q|)) - sigma^2(x)] |log q| / sigma^2(x).
// For q(x) = 0 the window is unbounded; the difference is evaluated at
// the largest exactly-representable integer window, and an exact zero
// difference (variance already saturated) short-circuits the 0 * inf.
inline double final_condition_diagnostic(const lattice_law& law, double x) {
  double q = law.q_of(x);
  if (q >= 1.0)
    throw std::domain_error("final_condition_diagnostic: q(x) >= 1");
  double lq = q > 0.0 ? -std::log(q) : std::numeric_limits<double>::infinity();
  double y = std::isfinite(lq) ? x * std::sqrt(lq) : 9.0e15;
  y = std::min(y, 9.0e15);
  double s2 = law.sigma2(x);
  double diff = law.sigma2(y) - s2;
  if (diff == 0.0) return 0.0;
  return diff * lq / s2;
}

// convergence rule for a diagnostic sampled along doublings of n: the
// last value is below the cut and the last five steps all decrease
inline bool diagnostic_converged(const std::vector<double>& values,
                                 double cut = 0.05) {
  if (values.size() < 6) return false;
  for (std::size_t i = values.size() - 5; i < values.size(); ++i)
    if (!(values[i] < values[i - 1])) return false;
  return values.back() < cut;
}

struct r_result {
  double r = 0.0;
  double residual = 0.0;   // |r / sigma^2(r) - n/x| * x/n
  bool at_floor = false;   // n/x below the map's minimum; r clamped to 2
  bool near_floor = false; // r < 16: continuum asymptotics unreliable here
};

// smallest r >= 2 with r / sigma^2(r) = n / x.  The map rises linearly
// inside each flat piece of sigma^2 and drops at every atom distance, so
// the first up-crossing of the level t = n/x is interior to a piece and
// solved there exactly as r = t sigma^2.  Beyond the tabulated support the
// map is smooth; monotone fixed-point iteration with a bisection fallback.
inline r_result solve_r_n(const lattice_law& law, std::int64_t n, double x) {
  if (n < 1) throw std::invalid_argument("solve_r_n: n < 1");
  if (!(x > 0.0)) throw std::invalid_argument("solve_r_n: x <= 0");
  double t = static_cast<double>(n) / x;
  double mu = law.mean();

  auto finish = [&](double r, bool floor_flag) {
    r_result out;
    out.r = r;
    out.at_floor = floor_flag;
    out.near_floor = r < 16.0;
    double s2 = law.sigma2(r);
    out.residual = s2 > 0.0 ? std::fabs(r / s2 - t) / t
                            : std::numeric_limits<double>::infinity();
    return out;
  };

  // walk the atom-distance breakpoints of sigma^2 in increasing order
  std::int64_t kr = static_cast<std::int64_t>(std::floor(mu)) + 1;
  std::int64_t kl = static_cast<std::int64_t>(std::ceil(mu)) - 1;
  double d_prev = 0.0;
  bool first_piece = true;
  double tab_end = std::max(static_cast<double>(law.table_hi()) - mu,
                            mu - static_cast<double>(law.table_lo()));
  while (d_prev < tab_end) {
    double dr = static_cast<double>(kr) - mu;
    double dl = mu - static_cast<double>(kl);
    double d_next;
    if (dr <= dl) {
      d_next = dr;
      ++kr;
      if (dl == dr) --kl;
    } else {
      d_next = dl;
      --kl;
    }
    if (d_next <= d_prev) continue;
    double start = std::max(d_prev, 2.0);
    d_prev = d_next;
    if (start >= d_next) continue;
    double s2 = law.sigma2(0.5 * (start + d_next));
    if (s2 <= 0.0) continue;
    double m_lo = start / s2, m_hi = d_next / s2;
    if (first_piece && t <= m_lo) return finish(2.0, true);
    first_piece = false;
    if (t < m_hi && t >= m_lo) return finish(t * s2, false);
  }

  // beyond the table: r <- t sigma^2(r) increases monotonically to the
  // root when it is a contraction (variance slowly varying or constant)
  double r = std::max(2.0, tab_end);
  bool contracted = false;
  double prev_gap = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 300; ++it) {
    double rn = t * law.sigma2(r);
    double gap = std::fabs(rn - r);
    if (gap <= 1e-13 * std::fabs(rn)) {
      r = rn;
      contracted = true;
      break;
    }
    if (it > 4 && gap > prev_gap) break; // diverging: fall back to bisection
    prev_gap = gap;
    r = rn;
  }
  if (!contracted) {
    double lo = std::max(2.0, tab_end), hi = lo;
    while (hi / law.sigma2(hi) < t) {
      hi *= 2.0;
      if (hi > 1e300) throw std::runtime_error("solve_r_n: map never reaches n/x");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
      double mid = 0.5 * (lo + hi);
      (mid / law.sigma2(mid) >= t ? hi : lo) = mid;
    }
    r = 0.5 * (lo + hi);
  }
  // sigma^2 is flat across the landed piece, so one exact step zeroes the
  // residual
  r = t * law.sigma2(r);
  if (r < 2.0) return finish(2.0, true);  // map minimum m(2) above n/x
  return finish(r, false);
}

struct normalizer_row {
  std::int64_t n = 0;
  double a_n = 0.0;
  double b_n = 0.0;
  double omega_n = 0.0;
  double q_an = 0.0;
  double rozovskii_lhs = 0.0;
  double final_lhs = 0.0;
};

struct normalizer_table {
  std::vector<normalizer_row> rows;
  // set when the tail's upper Matuszewska estimate sits above -2: then
  // sigma_bar^2 grows like a power and the self-normalizing root leaves
  // the slowly-varying regime the diagnostics assume
  bool sv_warning = false;
};

// one row per n: the self-normalizing root, the centering, the zone
// boundary, and both diagnostics (the final condition evaluated at
// x = a_n).  Rows where q(a_n) falls outside (0, 1) carry NaN diagnostics.
inline normalizer_table build_normalizer_table(const lattice_law& law,
                                               const std::vector<std::int64_t>& ns,
                                               double alpha = 2.0) {
  normalizer_table tab;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::int64_t n : ns) {
    normalizer_row row;
    row.n = n;
    row.a_n = solve_a_n(law, n);
    row.b_n = centering_b_n(law, n, alpha, row.a_n);
    row.q_an = law.q_of(row.a_n);
    if (row.q_an > 0.0 && row.q_an < 1.0) {
      row.omega_n = omega_from(row.a_n, row.q_an);
      row.rozovskii_lhs = rozovskii_diagnostic(law, n, row.a_n);
      row.final_lhs = final_condition_diagnostic(law, row.a_n);
    } else {
      row.omega_n = 0.0;
      row.rozovskii_lhs = nan;
      row.final_lhs = nan;
    }
    tab.rows.push_back(row);
  }
  if (law.right_unbounded()) {
    std::vector<double> xs;
    for (double x = 1e2; x <= 1.01e6; x *= 10.0) xs.push_back(x);
    auto rep = law.regvar_diagnostic({4.0}, xs);
    tab.sv_warning = rep.matuszewska_hi > -1.9;
  }
  return tab;
}

inline void write_normalizer_csv(std::ostream& out, const normalizer_table& tab) {
  csv_row(out, {"n", "a_n", "b_n", "omega_n", "q_an", "rozovskii_lhs", "final_lhs"});
  for (const auto& r : tab.rows)
    csv_row(out, {csv_num(r.n), csv_num(r.a_n), csv_num(r.b_n), csv_num(r.omega_n),
                  csv_num(r.q_an), csv_num(r.rozovskii_lhs), csv_num(r.final_lhs)});
}

}  // namespace bigjump

#endif
