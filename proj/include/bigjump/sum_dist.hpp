#ifndef BIGJUMP_SUM_DIST_HPP
#define BIGJUMP_SUM_DIST_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "csv.hpp"
#include "lattice_law.hpp"
#include "normalizers.hpp"
#include "rng.hpp"
#include "xfloat.hpp"

namespace bigjump {

// Exact distribution of S_n = xi_1 + ... + xi_n on an integer window,
// optionally under the constraint max_i xi_i <= m (realized by truncating
// the step law, never by filtering paths).  Mass that leaves the window
// during construction is absorbed into the under/over buckets, so the
// total is conserved exactly; bucket placement is only approximate near
// the window edges, which is why windows carry a guard band beyond any
// queried point.
struct sum_window {
  std::int64_t lo = 0;
  std::int64_t hi = -1;
};

struct sum_distribution {
  std::int64_t n = 0;
  sum_window window;
  std::vector<xfloat> mass; // mass[i] = P(S_n = window.lo + i [, M_n <= m])
  xfloat under, over;       // mass absorbed below/above the window
  std::optional<std::int64_t> max_constraint;
  std::optional<std::int64_t> min_constraint;
  // n * P(one step outside its table); the budget subject to bucket
  // placement, not mass lost
  double truncation_error_bound = 0.0;

  xfloat at(std::int64_t s) const {
    if (s < window.lo || s > window.hi) return xfloat::zero();
    return mass[static_cast<std::size_t>(s - window.lo)];
  }

  xfloat interior_total() const { return range_sum(0, mass.size()); }

  xfloat total() const { return interior_total() + under + over; }

  // P(S_n >= x); the over bucket is above every window point by
  // construction, so this is bucket-placement-exact for x in the window
  xfloat tail_geq(std::int64_t x) const {
    std::size_t b = 0;
    if (x > window.lo) {
      if (x > window.hi) return over;
      b = static_cast<std::size_t>(x - window.lo);
    }
    return range_sum(b, mass.size()) + over;
  }

  xfloat cdf_leq(std::int64_t s) const {
    if (s < window.lo) return under;
    std::size_t e = mass.size();
    if (s < window.hi) e = static_cast<std::size_t>(s - window.lo + 1);
    return range_sum(0, e) + under;
  }

  // compensated sum of mass[b..e) at the scale of the largest cell
  xfloat range_sum(std::size_t b, std::size_t e) const {
    std::int64_t emax = std::numeric_limits<std::int64_t>::min();
    for (std::size_t i = b; i < e; ++i)
      if (mass[i].m != 0.0) emax = std::max(emax, mass[i].e);
    if (emax == std::numeric_limits<std::int64_t>::min()) return xfloat::zero();
    neumaier acc;
    for (std::size_t i = b; i < e; ++i) {
      if (mass[i].m == 0.0) continue;
      std::int64_t sh = mass[i].e - emax;
      if (sh < -1070) continue;
      acc.add(std::ldexp(mass[i].m, static_cast<int>(sh)));
    }
    return xfloat(acc.value(), emax);
  }
};

struct sum_build_options {
  std::optional<std::int64_t> max_step; // realizes {M_n <= m}
  std::optional<std::int64_t> min_step; // lower truncation of the step
  std::optional<sum_window> window;     // final window; policy below if unset
  // recentered upper query level feeding the default window policy
  // [floor(n mu) - guard * a_n, floor(n mu) + window_x + guard * a_n]
  double window_x = 0.0;
  double guard = 40.0;
  int threads = 0;      // 0: min(4, hardware)
  int accumulation = 0; // 0: exact when n <= 256; 1: force exact; 2: force fast
  std::string cache_dir;
};

inline std::int64_t b_floor(const lattice_law& law, std::int64_t n) {
  return static_cast<std::int64_t>(std::floor(law.mean() * static_cast<double>(n)));
}

namespace detail_sum {

// contiguous nonzero run sharing one binary exponent offset, so the inner
// convolution loops run on raw doubles
struct seg {
  std::size_t b, e;
  std::int64_t off;
};

inline void make_segments(const std::vector<xfloat>& v, std::vector<seg>& out) {
  out.clear();
  std::size_t i = 0;
  const std::size_t n = v.size();
  while (i < n) {
    if (v[i].m == 0.0) {
      ++i;
      continue;
    }
    std::size_t b = i, last = i, zrun = 0;
    std::int64_t emin = v[i].e, emax = v[i].e;
    ++i;
    while (i < n) {
      if (v[i].m == 0.0) {
        if (++zrun >= 64) break;
        ++i;
        continue;
      }
      std::int64_t lo2 = std::min(emin, v[i].e), hi2 = std::max(emax, v[i].e);
      if (hi2 - lo2 > 480) break;
      emin = lo2;
      emax = hi2;
      zrun = 0;
      last = i;
      ++i;
    }
    out.push_back({b, last + 1, emax});
    i = last + 1;
  }
}

inline std::vector<double> extract(const std::vector<xfloat>& v, const seg& s,
                                   bool reversed) {
  std::vector<double> d(s.e - s.b, 0.0);
  for (std::size_t k = 0; k < d.size(); ++k) {
    const xfloat& c = v[s.b + k];
    if (c.m == 0.0) continue;
    double val = std::ldexp(c.m, static_cast<int>(c.e - s.off));
    d[reversed ? d.size() - 1 - k : k] = val;
  }
  return d;
}

// dot product with 64-term blocks folded through a compensated sum; the
// blocks keep the error near eps while the inner loop stays vectorizable
inline double dot_blocked(const double* a, const double* b, std::size_t len) {
  neumaier acc;
  std::size_t i = 0;
  while (i < len) {
    std::size_t stop = std::min(len, i + 64);
    double s = 0.0;
    for (; i < stop; ++i) s += a[i] * b[i];
    acc.add(s);
  }
  return acc.value();
}

inline double dot_exact(const double* a, const double* b, std::size_t len) {
  neumaier acc;
  for (std::size_t i = 0; i < len; ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

// C = A * B restricted to [out_lo, out_hi], spill into buckets.  Per-cell
// sums have a fixed order, so results are bitwise reproducible for any
// thread count.
inline sum_distribution convolve(const sum_distribution& A, const sum_distribution& B,
                                 std::int64_t out_lo, std::int64_t out_hi, bool exact,
                                 int threads) {
  sum_distribution C;
  C.n = A.n + B.n;
  C.window = {out_lo, out_hi};
  if (out_hi >= out_lo) C.mass.assign(static_cast<std::size_t>(out_hi - out_lo + 1), {});
  xfloat Ai = A.interior_total(), Bi = B.interior_total();
  C.under = A.under * (B.under + Bi) + B.under * Ai;
  C.over = A.over * (B.over + Bi) + B.over * Ai + A.under * B.over + A.over * B.under;

  std::vector<seg> sa, sb;
  make_segments(A.mass, sa);
  make_segments(B.mass, sb);
  std::vector<std::vector<double>> db_rev(sb.size());
  for (std::size_t j = 0; j < sb.size(); ++j) db_rev[j] = extract(B.mass, sb[j], true);

  for (const seg& pa : sa) {
    std::vector<double> da = extract(A.mass, pa, false);
    for (std::size_t j = 0; j < sb.size(); ++j) {
      const seg& pb = sb[j];
      const std::vector<double>& dbr = db_rev[j];
      const std::int64_t la = static_cast<std::int64_t>(da.size());
      const std::int64_t lb = static_cast<std::int64_t>(dbr.size());
      const std::int64_t g0 = A.window.lo + static_cast<std::int64_t>(pa.b) +
                              B.window.lo + static_cast<std::int64_t>(pb.b);
      const std::int64_t off = pa.off + pb.off;
      const std::int64_t ntau = la + lb - 1;

      // fixed-size chunks so bucket partials (and hence every output bit)
      // do not depend on the thread count
      const std::int64_t chunk = 8192;
      const std::size_t nch = static_cast<std::size_t>((ntau + chunk - 1) / chunk);
      std::vector<double> us(nch, 0.0), os(nch, 0.0);

      auto run = [&](std::size_t c) {
        std::int64_t t0 = static_cast<std::int64_t>(c) * chunk;
        std::int64_t t1 = std::min(ntau, t0 + chunk);
        neumaier uacc, oacc;
        for (std::int64_t tau = t0; tau < t1; ++tau) {
          std::int64_t ia0 = std::max<std::int64_t>(0, tau - lb + 1);
          std::int64_t ia1 = std::min(la - 1, tau);
          if (ia0 > ia1) continue;
          const double* pa_ = da.data() + ia0;
          const double* pb_ = dbr.data() + (lb - 1 - tau + ia0);
          std::size_t len = static_cast<std::size_t>(ia1 - ia0 + 1);
          double v = exact ? dot_exact(pa_, pb_, len) : dot_blocked(pa_, pb_, len);
          if (v == 0.0) continue;
          std::int64_t g = g0 + tau;
          if (g < out_lo)
            uacc.add(v);
          else if (g > out_hi)
            oacc.add(v);
          else
            C.mass[static_cast<std::size_t>(g - out_lo)] += xfloat(v, off);
        }
        us[c] = uacc.value();
        os[c] = oacc.value();
      };

      int T = std::min<int>(threads, static_cast<int>(nch));
      if (T <= 1) {
        for (std::size_t c = 0; c < nch; ++c) run(c);
      } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(T));
        for (int t = 0; t < T; ++t)
          pool.emplace_back([&run, t, T, nch] {
            for (std::size_t c = static_cast<std::size_t>(t); c < nch; c += static_cast<std::size_t>(T)) run(c);
          });
        for (auto& th : pool) th.join();
      }
      for (std::size_t c = 0; c < nch; ++c) {
        if (us[c] != 0.0) C.under += xfloat(us[c], off);
        if (os[c] != 0.0) C.over += xfloat(os[c], off);
      }
    }
  }
  return C;
}

struct build_plan {
  std::int64_t flo = 0, fhi = -1;   // requested final window
  std::int64_t swin_lo = 0, swin_hi = -1; // step table range
  double mu_step = 0.0;             // interior mean of one step
  std::int64_t wm = 0, wp = 0;      // level margins around the drifting center
  bool empty = false;               // constraint excludes the whole step law
  bool exact = true;
  int threads = 1;
};

// intermediate levels track the drifting bulk; the last level snaps to the
// requested window, spilling anything else into the buckets
inline sum_window level_window(const build_plan& p, std::int64_t k, std::int64_t n) {
  if (k == n)
    return {std::max(p.flo, k * p.swin_lo), std::min(p.fhi, k * p.swin_hi)};
  std::int64_t c = static_cast<std::int64_t>(std::llround(p.mu_step * static_cast<double>(k)));
  std::int64_t lo = std::max(c - p.wm, k * p.swin_lo);
  std::int64_t hi = std::min(c + p.wp, k * p.swin_hi);
  return {lo, hi};
}

inline sum_distribution make_step(const lattice_law& law, const build_plan& p,
                                  std::int64_t s_lo_bound, std::int64_t s_hi_bound) {
  sum_distribution s;
  s.n = 1;
  s.window = {p.swin_lo, p.swin_hi};
  if (p.swin_hi >= p.swin_lo)
    s.mass.assign(static_cast<std::size_t>(p.swin_hi - p.swin_lo + 1), {});
  for (std::int64_t k = p.swin_lo; k <= p.swin_hi; ++k) {
    double v = law.pmf(k);
    if (v > 0.0) s.mass[static_cast<std::size_t>(k - p.swin_lo)] = xfloat(v);
  }
  double lo_excl = (s_lo_bound > std::numeric_limits<std::int64_t>::min())
                       ? law.cdf(static_cast<double>(s_lo_bound) - 1.0)
                       : 0.0;
  double hi_excl = (s_hi_bound < std::numeric_limits<std::int64_t>::max())
                       ? law.tail(static_cast<double>(s_hi_bound))
                       : 0.0;
  double u = law.cdf(static_cast<double>(p.swin_lo) - 1.0) - lo_excl;
  double o = law.tail(static_cast<double>(p.swin_hi)) - hi_excl;
  s.under = xfloat(std::max(0.0, u));
  s.over = xfloat(std::max(0.0, o));
  return s;
}

inline std::uint64_t fnv_step(std::uint64_t h, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) {
    h ^= (x >> (8 * i)) & 0xffu;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t cache_key(const lattice_law& law, std::int64_t n,
                               const sum_build_options& o, std::int64_t flo,
                               std::int64_t fhi, bool exact) {
  std::uint64_t h = 14695981039346656037ULL;
  h = fnv_step(h, 0x53554d4431ULL); // format tag
  h = fnv_step(h, law.hash());
  h = fnv_step(h, static_cast<std::uint64_t>(n));
  h = fnv_step(h, static_cast<std::uint64_t>(o.max_step ? *o.max_step : INT64_MIN));
  h = fnv_step(h, static_cast<std::uint64_t>(o.min_step ? *o.min_step : INT64_MIN));
  h = fnv_step(h, static_cast<std::uint64_t>(flo));
  h = fnv_step(h, static_cast<std::uint64_t>(fhi));
  h = fnv_step(h, exact ? 1u : 2u);
  return h;
}

constexpr std::uint64_t cache_magic = 0x31445355534a4242ULL;

inline bool cache_load(const std::string& dir, std::uint64_t key, sum_distribution& d) {
  std::filesystem::path p = std::filesystem::path(dir) /
                            ("sum_" + std::to_string(key) + ".bin");
  std::ifstream in(p, std::ios::binary);
  if (!in) return false;
  auto rd = [&](void* q, std::size_t len) {
    in.read(reinterpret_cast<char*>(q), static_cast<std::streamsize>(len));
    return static_cast<bool>(in);
  };
  std::uint64_t magic = 0, k2 = 0, sz = 0;
  std::int64_t fields[7];
  if (!rd(&magic, 8) || magic != cache_magic) return false;
  if (!rd(&k2, 8) || k2 != key) return false;
  if (!rd(fields, sizeof fields) || !rd(&sz, 8)) return false;
  if (sz > (1u << 27)) return false;
  d.n = fields[0];
  d.window = {fields[1], fields[2]};
  d.max_constraint.reset();
  d.min_constraint.reset();
  if (fields[3] != std::numeric_limits<std::int64_t>::min()) d.max_constraint = fields[3];
  if (fields[4] != std::numeric_limits<std::int64_t>::min()) d.min_constraint = fields[4];
  std::memcpy(&d.truncation_error_bound, &fields[5], 8);
  d.mass.assign(static_cast<std::size_t>(sz), {});
  if (sz && !rd(d.mass.data(), sz * sizeof(xfloat))) return false;
  xfloat buckets[2];
  if (!rd(buckets, sizeof buckets)) return false;
  d.under = buckets[0];
  d.over = buckets[1];
  return true;
}

inline void cache_store(const std::string& dir, std::uint64_t key,
                        const sum_distribution& d) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::filesystem::path fin = std::filesystem::path(dir) /
                              ("sum_" + std::to_string(key) + ".bin");
  std::filesystem::path tmp = fin;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return;
    auto wr = [&](const void* q, std::size_t len) {
      out.write(reinterpret_cast<const char*>(q), static_cast<std::streamsize>(len));
    };
    std::uint64_t sz = d.mass.size();
    std::int64_t fields[7] = {
        d.n, d.window.lo, d.window.hi,
        d.max_constraint ? *d.max_constraint : std::numeric_limits<std::int64_t>::min(),
        d.min_constraint ? *d.min_constraint : std::numeric_limits<std::int64_t>::min(),
        0, 0};
    std::memcpy(&fields[5], &d.truncation_error_bound, 8);
    wr(&cache_magic, 8);
    wr(&key, 8);
    wr(fields, sizeof fields);
    wr(&sz, 8);
    if (sz) wr(d.mass.data(), sz * sizeof(xfloat));
    xfloat buckets[2] = {d.under, d.over};
    wr(buckets, sizeof buckets);
  }
  std::filesystem::rename(tmp, fin, ec);
}

inline build_plan resolve_plan(const lattice_law& law, std::int64_t n,
                               const sum_build_options& opts) {
  if (n < 1) throw std::invalid_argument("sum_distribution: n must be >= 1");
  build_plan p;
  if (opts.window) {
    if (opts.window->hi < opts.window->lo)
      throw std::invalid_argument("sum_distribution: empty window");
    p.flo = opts.window->lo;
    p.fhi = opts.window->hi;
  } else {
    double a = 1.0;
    try {
      a = solve_a_n(law, n);
    } catch (const std::exception&) {
      a = 1.0; // near-degenerate law: fall back to a unit guard scale
    }
    double g = opts.guard * std::max(a, 1.0);
    if (!(g > 0.0) || g > 4.0e17)
      throw std::invalid_argument("sum_distribution: window guard out of range");
    std::int64_t b = b_floor(law, n);
    p.flo = b - static_cast<std::int64_t>(std::ceil(g));
    p.fhi = b + static_cast<std::int64_t>(std::ceil(std::max(0.0, opts.window_x))) +
            static_cast<std::int64_t>(std::ceil(g));
  }

  std::int64_t s_hi_bound = std::numeric_limits<std::int64_t>::max();
  if (!law.right_unbounded()) s_hi_bound = law.table_hi();
  if (opts.max_step) s_hi_bound = std::min(s_hi_bound, *opts.max_step);
  std::int64_t s_lo_bound = std::numeric_limits<std::int64_t>::min();
  if (!law.left_unbounded()) s_lo_bound = law.table_lo();
  if (opts.min_step) s_lo_bound = std::max(s_lo_bound, *opts.min_step);

  if (s_hi_bound < s_lo_bound) {
    p.empty = true;
    return p;
  }

  // provisional step range wide enough to read off the truncated mean,
  // pulled toward the constraint cap when that cap sits far below the
  // unconstrained bulk
  std::int64_t span = p.fhi - p.flo + 1;
  std::int64_t mu0 = static_cast<std::int64_t>(std::llround(law.mean()));
  std::int64_t r_hi = std::min(s_hi_bound, std::max(mu0 + span, p.fhi));
  std::int64_t r_lo = std::max(s_lo_bound, std::min(mu0 - span, r_hi - 2 * span));
  neumaier m0, m1, m2;
  for (std::int64_t k = r_lo; k <= r_hi; ++k) {
    double v = law.pmf(k);
    if (v <= 0.0) continue;
    double kd = static_cast<double>(k);
    m0.add(v);
    m1.add(v * kd);
    m2.add(v * kd * kd);
  }
  p.mu_step = m0.value() > 0.0 ? m1.value() / m0.value() : 0.0;
  double var_step = m0.value() > 0.0
                        ? std::max(0.0, m2.value() / m0.value() - p.mu_step * p.mu_step)
                        : 0.0;

  std::int64_t cn = static_cast<std::int64_t>(std::llround(p.mu_step * static_cast<double>(n)));
  p.wm = cn - p.flo;
  p.wp = p.fhi - cn;
  // a requested window entirely to one side of the (possibly constrained)
  // bulk makes a margin negative; replace it by the bulk's own guard so
  // intermediate levels keep the bulk interior
  std::int64_t bulk_guard = static_cast<std::int64_t>(
      std::ceil(opts.guard * std::max(1.0, std::sqrt(var_step * static_cast<double>(n)))));
  if (p.wm < 0) p.wm = bulk_guard;
  if (p.wp < 0) p.wp = bulk_guard;
  std::int64_t c1 = static_cast<std::int64_t>(std::llround(p.mu_step));
  p.swin_lo = std::max(s_lo_bound, c1 - p.wm);
  p.swin_hi = std::min(s_hi_bound, c1 + p.wp);
  if (p.swin_hi < p.swin_lo) {
    p.swin_lo = r_lo;
    p.swin_hi = r_hi;
  }

  p.exact = opts.accumulation == 1 || (opts.accumulation == 0 && n <= 256);
  p.threads = opts.threads > 0
                  ? opts.threads
                  : static_cast<int>(std::min(4u, std::max(1u, std::thread::hardware_concurrency())));
  return p;
}

inline sum_distribution finish_empty(const lattice_law&, std::int64_t n,
                                     const sum_build_options& opts, const build_plan& p) {
  sum_distribution d;
  d.n = n;
  d.window = {p.flo, p.fhi};
  d.mass.assign(static_cast<std::size_t>(std::max<std::int64_t>(0, p.fhi - p.flo + 1)), {});
  d.max_constraint = opts.max_step;
  d.min_constraint = opts.min_step;
  return d;
}

inline sum_distribution unit_level() {
  sum_distribution u;
  u.n = 0;
  u.window = {0, 0};
  u.mass.assign(1, xfloat(1.0));
  return u;
}

} // namespace detail_sum

inline sum_distribution build_sum_distribution(const lattice_law& law, std::int64_t n,
                                               const sum_build_options& opts = {}) {
  using namespace detail_sum;
  build_plan p = resolve_plan(law, n, opts);
  if (p.empty) return finish_empty(law, n, opts, p);

  std::uint64_t key = 0;
  if (!opts.cache_dir.empty()) {
    key = cache_key(law, n, opts, p.flo, p.fhi, p.exact);
    sum_distribution cached;
    if (cache_load(opts.cache_dir, key, cached) && cached.n == n) return cached;
  }

  std::int64_t s_lo_bound = opts.min_step ? *opts.min_step
                                          : std::numeric_limits<std::int64_t>::min();
  std::int64_t s_hi_bound = opts.max_step ? *opts.max_step
                                          : std::numeric_limits<std::int64_t>::max();
  sum_distribution step = make_step(law, p, s_lo_bound, s_hi_bound);
  double per_step_outside = (step.under + step.over).to_double();

  sum_distribution acc;
  if (n == 1) {
    sum_window w = level_window(p, 1, 1);
    acc = convolve(step, unit_level(), w.lo, w.hi, p.exact, p.threads);
    acc.n = 1;
  } else {
    // binary exponentiation over the bits of n
    int top = 63;
    while (top > 0 && ((n >> top) & 1) == 0) --top;
    acc = step;
    std::int64_t k = 1;
    for (int bit = top - 1; bit >= 0; --bit) {
      sum_window w = level_window(p, 2 * k, n);
      acc = convolve(acc, acc, w.lo, w.hi, p.exact, p.threads);
      k *= 2;
      if ((n >> bit) & 1) {
        sum_window w2 = level_window(p, k + 1, n);
        acc = convolve(acc, step, w2.lo, w2.hi, p.exact, p.threads);
        k += 1;
      }
    }
  }
  acc.n = n;
  acc.max_constraint = opts.max_step;
  acc.min_constraint = opts.min_step;
  acc.truncation_error_bound = static_cast<double>(n) * per_step_outside;
  if (!opts.cache_dir.empty()) cache_store(opts.cache_dir, key, acc);
  return acc;
}

// step-by-step construction; same windows and kernels as the doubling
// route, used for cross-validation and by the backward sampler
inline sum_distribution build_sum_distribution_sequential(const lattice_law& law,
                                                          std::int64_t n,
                                                          const sum_build_options& opts = {}) {
  using namespace detail_sum;
  build_plan p = resolve_plan(law, n, opts);
  if (p.empty) return finish_empty(law, n, opts, p);
  std::int64_t s_lo_bound = opts.min_step ? *opts.min_step
                                          : std::numeric_limits<std::int64_t>::min();
  std::int64_t s_hi_bound = opts.max_step ? *opts.max_step
                                          : std::numeric_limits<std::int64_t>::max();
  sum_distribution step = make_step(law, p, s_lo_bound, s_hi_bound);
  double per_step_outside = (step.under + step.over).to_double();
  sum_distribution acc;
  if (n == 1) {
    sum_window w = level_window(p, 1, 1);
    acc = convolve(step, unit_level(), w.lo, w.hi, p.exact, p.threads);
  } else {
    acc = step;
    for (std::int64_t k = 2; k <= n; ++k) {
      sum_window w = level_window(p, k, n);
      acc = convolve(acc, step, w.lo, w.hi, p.exact, p.threads);
    }
  }
  acc.n = n;
  acc.max_constraint = opts.max_step;
  acc.min_constraint = opts.min_step;
  acc.truncation_error_bound = static_cast<double>(n) * per_step_outside;
  return acc;
}

// --- tail queries in the recentered lattice x~ = x - floor(n mu) ---

inline double p_sum_geq(const lattice_law& law, std::int64_t n, std::int64_t x,
                        std::optional<std::int64_t> m = {}, sum_build_options base = {}) {
  base.max_step = m ? m : base.max_step;
  base.window_x = std::max(base.window_x, static_cast<double>(std::max<std::int64_t>(0, x)));
  sum_distribution d = build_sum_distribution(law, n, base);
  return d.tail_geq(b_floor(law, n) + x).to_double();
}

inline double p_sum_eq(const lattice_law& law, std::int64_t n, std::int64_t x,
                       std::optional<std::int64_t> m = {}, sum_build_options base = {}) {
  base.max_step = m ? m : base.max_step;
  base.window_x = std::max(base.window_x, static_cast<double>(std::max<std::int64_t>(0, x)));
  sum_distribution d = build_sum_distribution(law, n, base);
  return d.at(b_floor(law, n) + x).to_double();
}

// --- Gaussian-window / big-jump split of the tail at level x ---

struct sum_decomposition {
  double total = 0.0;      // P(S_n - floor(n mu) >= x), or = x in local mode
  double gauss_part = 0.0; // same event intersected with {M_n <= r_n}
  double jump_part = 0.0;  // total - gauss_part
  double s_ratio = 0.0;    // n F(x) / total (local mode: n P(xi = x) / total)
  double r_n = 0.0;
  bool r_at_floor = false;
};

inline sum_decomposition decompose_sum_tail(const lattice_law& law, std::int64_t n,
                                            std::int64_t x, bool local = false,
                                            sum_build_options base = {}) {
  sum_decomposition out;
  r_result rr = solve_r_n(law, n, static_cast<double>(x));
  out.r_n = rr.r;
  out.r_at_floor = rr.at_floor;
  base.window_x = std::max(base.window_x, static_cast<double>(std::max<std::int64_t>(0, x)));
  std::int64_t raw = b_floor(law, n) + x;
  sum_distribution full = build_sum_distribution(law, n, base);
  sum_build_options cons = base;
  cons.max_step = static_cast<std::int64_t>(std::floor(rr.r));
  sum_distribution gw = build_sum_distribution(law, n, cons);
  xfloat tot = local ? full.at(raw) : full.tail_geq(raw);
  xfloat gau = local ? gw.at(raw) : gw.tail_geq(raw);
  out.total = tot.to_double();
  out.gauss_part = gau.to_double();
  out.jump_part = (tot - gau).to_double();
  double num = local ? static_cast<double>(n) * law.pmf(x)
                     : static_cast<double>(n) * law.tail(static_cast<double>(x));
  out.s_ratio = out.total > 0.0 ? num / out.total
                                : std::numeric_limits<double>::quiet_NaN();
  return out;
}

// --- conditional law of the maximum ---

enum class sum_condition { sum_eq, sum_geq };

inline std::vector<double> conditional_max_cdf(const lattice_law& law, std::int64_t n,
                                               std::int64_t x, sum_condition cond,
                                               const std::vector<std::int64_t>& ms,
                                               sum_build_options base = {}) {
  base.window_x = std::max(base.window_x, static_cast<double>(std::max<std::int64_t>(0, x)));
  std::int64_t raw = b_floor(law, n) + x;
  sum_distribution full = build_sum_distribution(law, n, base);
  xfloat den = cond == sum_condition::sum_eq ? full.at(raw) : full.tail_geq(raw);
  if (den.is_zero())
    throw std::domain_error("conditional_max_cdf: conditioning event has zero mass");
  std::vector<double> out;
  out.reserve(ms.size());
  for (std::int64_t m : ms) {
    sum_build_options cons = base;
    cons.max_step = m;
    cons.window = full.window;
    sum_distribution gw = build_sum_distribution(law, n, cons);
    xfloat num = cond == sum_condition::sum_eq ? gw.at(raw) : gw.tail_geq(raw);
    out.push_back((num / den).to_double());
  }
  return out;
}

// --- conditional overshoot above level x ---

enum class max_regime { max_le_r, max_gt_r };

inline std::vector<double> conditional_overshoot_tail(const lattice_law& law,
                                                      std::int64_t n, std::int64_t x,
                                                      max_regime regime,
                                                      const std::vector<std::int64_t>& ts,
                                                      std::optional<double> r_override = {},
                                                      sum_build_options base = {}) {
  double r = r_override ? *r_override : solve_r_n(law, n, static_cast<double>(x)).r;
  std::int64_t tmax = 0;
  for (std::int64_t t : ts) tmax = std::max(tmax, t);
  base.window_x = std::max(base.window_x, static_cast<double>(std::max<std::int64_t>(0, x + tmax)));
  std::int64_t raw = b_floor(law, n) + x;
  sum_build_options cons = base;
  cons.max_step = static_cast<std::int64_t>(std::floor(r));
  sum_distribution gw = build_sum_distribution(law, n, cons);
  std::optional<sum_distribution> full;
  if (regime == max_regime::max_gt_r) full = build_sum_distribution(law, n, base);
  xfloat den = regime == max_regime::max_le_r ? gw.tail_geq(raw)
                                              : full->tail_geq(raw) - gw.tail_geq(raw);
  if (!(den > xfloat::zero()))
    throw std::domain_error("conditional_overshoot_tail: conditioning event has zero mass");
  std::vector<double> out;
  out.reserve(ts.size());
  for (std::int64_t t : ts) {
    xfloat num = regime == max_regime::max_le_r
                     ? gw.tail_geq(raw + t)
                     : full->tail_geq(raw + t) - gw.tail_geq(raw + t);
    double v = (num / den).to_double();
    out.push_back(num.is_zero() ? 0.0 : v);
  }
  return out;
}

// --- exact backward sampling from P(. | S_n = x + floor(n mu)) ---

class backward_sampler {
public:
  backward_sampler(const lattice_law& law, std::int64_t n, std::int64_t x,
                   sum_build_options base = {}, std::size_t max_cells = 30000000)
      : n_(n) {
    if (n < 1) throw std::invalid_argument("backward_sampler: n must be >= 1");
    if (law.left_unbounded())
      throw std::invalid_argument("backward_sampler: step law must be bounded below");
    raw_ = b_floor(law, n) + x;
    std::int64_t s_lo = law.table_lo();
    if (base.min_step) s_lo = std::max(s_lo, *base.min_step);
    std::int64_t s_hi_b = law.right_unbounded() ? std::numeric_limits<std::int64_t>::max()
                                                : law.table_hi();
    if (base.max_step) s_hi_b = std::min(s_hi_b, *base.max_step);
    // a step above raw - (n-1) s_lo can never complete to the target, so
    // capping there loses nothing: the sampler is exact
    std::int64_t s_hi = std::min(s_hi_b, raw_ - (n - 1) * s_lo);
    if (s_hi < s_lo) throw std::domain_error("backward_sampler: target unreachable");
    s_lo_ = s_lo;
    s_hi_ = s_hi;

    std::size_t cells = 0;
    for (std::int64_t k = 1; k <= n; ++k) {
      auto w = window_k(k);
      if (w.hi >= w.lo) cells += static_cast<std::size_t>(w.hi - w.lo + 1);
    }
    if (cells > max_cells)
      throw std::runtime_error("backward_sampler: level tables exceed the cell budget");

    pmf_.assign(static_cast<std::size_t>(s_hi - s_lo + 1), 0.0);
    for (std::int64_t y = s_lo; y <= s_hi; ++y)
      pmf_[static_cast<std::size_t>(y - s_lo)] = law.pmf(y);

    levels_.reserve(static_cast<std::size_t>(n));
    sum_distribution step;
    step.n = 1;
    {
      auto w = window_k(1);
      step.window = {w.lo, w.hi};
      step.mass.assign(static_cast<std::size_t>(w.hi - w.lo + 1), {});
      for (std::int64_t y = w.lo; y <= w.hi; ++y) {
        double v = pmf_at(y);
        if (v > 0.0) step.mass[static_cast<std::size_t>(y - w.lo)] = xfloat(v);
      }
    }
    bool exact = base.accumulation != 2 && (base.accumulation == 1 || n <= 256);
    levels_.push_back(step);
    sum_distribution wide_step;
    wide_step.n = 1;
    wide_step.window = {s_lo, s_hi};
    wide_step.mass.assign(static_cast<std::size_t>(s_hi - s_lo + 1), {});
    for (std::int64_t y = s_lo; y <= s_hi; ++y) {
      double v = pmf_at(y);
      if (v > 0.0) wide_step.mass[static_cast<std::size_t>(y - s_lo)] = xfloat(v);
    }
    for (std::int64_t k = 2; k <= n; ++k) {
      auto w = window_k(k);
      levels_.push_back(detail_sum::convolve(levels_.back(), wide_step, w.lo, w.hi,
                                             exact, 1));
    }
    if (levels_.back().at(raw_).is_zero())
      throw std::domain_error("backward_sampler: target has zero mass");
  }

  std::int64_t raw_target() const { return raw_; }

  const sum_distribution& level(std::int64_t k) const {
    return levels_[static_cast<std::size_t>(k - 1)];
  }

  // coordinates are exchangeable; positions are filled from the last
  std::vector<std::int64_t> sample(rng& g) const {
    std::vector<std::int64_t> out(static_cast<std::size_t>(n_));
    std::int64_t rem = raw_;
    for (std::int64_t k = n_; k >= 2; --k) {
      const sum_distribution& prev = levels_[static_cast<std::size_t>(k - 2)];
      xfloat total = levels_[static_cast<std::size_t>(k - 1)].at(rem);
      double u = g.next_unit();
      xfloat target = total * xfloat(u);
      xfloat cum = xfloat::zero();
      std::int64_t pick = s_lo_;
      bool picked = false;
      std::int64_t y_lo = std::max(s_lo_, rem - prev.window.hi);
      std::int64_t y_hi = std::min(s_hi_, rem - prev.window.lo);
      for (std::int64_t y = y_lo; y <= y_hi; ++y) {
        double pv = pmf_at(y);
        if (pv <= 0.0) continue;
        xfloat w = xfloat(pv) * prev.at(rem - y);
        if (w.is_zero()) continue;
        cum += w;
        pick = y;
        picked = true;
        if (cum > target) break;
      }
      if (!picked) throw std::runtime_error("backward_sampler: no admissible step");
      out[static_cast<std::size_t>(k - 1)] = pick;
      rem -= pick;
    }
    out[0] = rem;
    return out;
  }

  // P(xi_1 = y | S_n = raw target)
  double marginal_pmf(std::int64_t y) const {
    if (n_ == 1) return y == raw_ ? 1.0 : 0.0;
    double pv = (y >= s_lo_ && y <= s_hi_) ? pmf_at(y) : 0.0;
    if (pv <= 0.0) return 0.0;
    const sum_distribution& prev = levels_[static_cast<std::size_t>(n_ - 2)];
    xfloat num = xfloat(pv) * prev.at(raw_ - y);
    return (num / levels_[static_cast<std::size_t>(n_ - 1)].at(raw_)).to_double();
  }

private:
  sum_window window_k(std::int64_t k) const {
    std::int64_t lo = std::max(k * s_lo_, raw_ - (n_ - k) * s_hi_);
    std::int64_t hi = std::min(k * s_hi_, raw_ - (n_ - k) * s_lo_);
    return {lo, hi};
  }

  double pmf_at(std::int64_t y) const {
    return pmf_[static_cast<std::size_t>(y - s_lo_)];
  }

  std::int64_t n_, raw_ = 0, s_lo_ = 0, s_hi_ = 0;
  std::vector<double> pmf_;
  std::vector<sum_distribution> levels_;
};

// --- one/two-jump expansion of P(S_n - floor(n mu) >= x, M_n > m) ---
// exactly-k-exceedance partition; the k >= 3 remainder is bounded, not
// computed, so `value` is exact up to `remainder_bound`

struct big_jump_eval {
  double value = 0.0;
  double remainder_bound = 0.0;
  double term1 = 0.0; // one exceedance, distinguished coordinate
  double term2 = 0.0; // ordered exceedance pair at two fixed coordinates
};

inline big_jump_eval p_sum_geq_big_jump(const lattice_law& law, std::int64_t n,
                                        std::int64_t x, std::int64_t m,
                                        sum_build_options base = {}) {
  if (n < 1) throw std::invalid_argument("p_sum_geq_big_jump: n must be >= 1");
  big_jump_eval out;
  std::int64_t raw = b_floor(law, n) + x;
  double fbar = law.tail(static_cast<double>(m));
  if (n == 1) {
    out.term1 = law.tail(static_cast<double>(std::max(m, raw - 1)));
    out.value = out.term1;
    return out;
  }

  auto constrained_suffix = [&](std::int64_t k, sum_distribution& dist,
                                std::vector<xfloat>& sfx) {
    sum_build_options o = base;
    o.max_step = m;
    o.window_x = std::max(o.window_x,
                          static_cast<double>(std::max<std::int64_t>(0, raw - m - b_floor(law, k))));
    dist = build_sum_distribution(law, k, o);
    sfx.assign(dist.mass.size() + 1, xfloat::zero());
    sfx[dist.mass.size()] = dist.over;
    for (std::size_t i = dist.mass.size(); i-- > 0;)
      sfx[i] = sfx[i + 1] + dist.mass[i];
  };

  auto tail_from = [&](const sum_distribution& dist, const std::vector<xfloat>& sfx,
                       std::int64_t v) -> xfloat {
    if (v <= dist.window.lo) return sfx[0];
    if (v > dist.window.hi) return dist.over;
    return sfx[static_cast<std::size_t>(v - dist.window.lo)];
  };

  sum_distribution a1;
  std::vector<xfloat> sfx1;
  constrained_suffix(n - 1, a1, sfx1);
  std::int64_t y_hi = raw - a1.window.lo; // beyond this the rest-tail saturates
  xfloat sat1 = a1.interior_total() + a1.over;
  neumaier t1;
  for (std::int64_t y = m + 1; y <= y_hi; ++y) {
    double pv = law.pmf(y);
    if (pv <= 0.0) continue;
    t1.add(pv * tail_from(a1, sfx1, raw - y).to_double());
  }
  double sat_mass1 = law.tail(static_cast<double>(std::max(m, y_hi)));
  out.term1 = t1.value() + sat_mass1 * sat1.to_double();

  double under_slop = static_cast<double>(n) * fbar * a1.under.to_double();
  if (n >= 2) {
    sum_distribution a2;
    std::vector<xfloat> sfx2;
    if (n == 2) {
      a2.n = 0;
      a2.window = {0, 0};
      a2.mass.assign(1, xfloat(1.0));
      sfx2.assign(2, xfloat::zero());
      sfx2[0] = xfloat(1.0);
    } else {
      constrained_suffix(n - 2, a2, sfx2);
    }
    std::int64_t u_sat = raw - a2.window.lo;
    std::int64_t ycap = u_sat - (m + 1);
    double t2 = 0.0;
    if (ycap > m) {
      std::vector<double> jp(static_cast<std::size_t>(ycap - m), 0.0);
      for (std::int64_t y = m + 1; y <= ycap; ++y) jp[static_cast<std::size_t>(y - m - 1)] = law.pmf(y);
      neumaier acc, covered;
      for (std::int64_t u = 2 * (m + 1); u < u_sat; ++u) {
        neumaier cell;
        std::int64_t j0 = std::max<std::int64_t>(m + 1, u - ycap);
        std::int64_t j1 = u - (m + 1);
        for (std::int64_t j = j0; j <= j1; ++j)
          cell.add(jp[static_cast<std::size_t>(j - m - 1)] *
                   jp[static_cast<std::size_t>(u - j - m - 1)]);
        double c = cell.value();
        covered.add(c);
        acc.add(c * tail_from(a2, sfx2, raw - u).to_double());
      }
      double pair_sat = fbar * fbar - covered.value();
      t2 = acc.value() + std::max(0.0, pair_sat) * (a2.interior_total() + a2.over).to_double();
      under_slop += 0.5 * static_cast<double>(n) * static_cast<double>(n - 1) * fbar * fbar *
                    a2.under.to_double();
    } else {
      t2 = fbar * fbar * (a2.interior_total() + a2.over).to_double();
    }
    out.term2 = t2;
  }

  double c3 = n >= 3 ? static_cast<double>(n) * static_cast<double>(n - 1) *
                           static_cast<double>(n - 2) / 6.0
                     : 0.0;
  out.value = static_cast<double>(n) * out.term1 +
              0.5 * static_cast<double>(n) * static_cast<double>(n - 1) * out.term2;
  out.remainder_bound = c3 * fbar * fbar * fbar + under_slop;
  return out;
}

// --- distance of the conditioned walk, largest coordinate removed, from
// the unconditioned product law ---

enum class tv_condition {
  sum_eq_max_le,
  sum_eq_max_gt,
  sum_geq_max_le,
  sum_geq_max_gt,
  max_geq,
  max_eq
};

// Exact enumeration over support^(n-1); x and r are raw lattice values.
// R drops the largest-|.| coordinate (first index on ties); conditions on
// M use the signed maximum.
inline double tv_remaining_vs_product(const lattice_law& law, int n, tv_condition cond,
                                      std::int64_t x, std::optional<std::int64_t> r = {}) {
  if (n < 2) throw std::invalid_argument("tv_remaining_vs_product: n must be >= 2");
  if (law.left_unbounded() || law.right_unbounded())
    throw std::invalid_argument("tv_remaining_vs_product: law must have finite support");
  bool needs_r = cond != tv_condition::max_geq && cond != tv_condition::max_eq;
  if (needs_r && !r)
    throw std::invalid_argument("tv_remaining_vs_product: condition needs r");
  std::vector<std::int64_t> vals;
  std::vector<double> probs;
  for (std::int64_t k = law.table_lo(); k <= law.table_hi(); ++k) {
    double v = law.pmf(k);
    if (v > 0.0) {
      vals.push_back(k);
      probs.push_back(v);
    }
  }
  const std::size_t K = vals.size();
  double budget = std::pow(static_cast<double>(K), n - 1);
  if (budget > 2.0e8)
    throw std::runtime_error("tv_remaining_vs_product: enumeration budget exceeded");

  std::int64_t rr = r ? *r : 0;
  auto cond_ok = [&](std::int64_t s, std::int64_t mx) {
    switch (cond) {
      case tv_condition::sum_eq_max_le: return s == x && mx <= rr;
      case tv_condition::sum_eq_max_gt: return s == x && mx > rr;
      case tv_condition::sum_geq_max_le: return s >= x && mx <= rr;
      case tv_condition::sum_geq_max_gt: return s >= x && mx > rr;
      case tv_condition::max_geq: return mx >= x;
      case tv_condition::max_eq: return mx == x;
    }
    return false;
  };

  // leaf state: product weight q, sum, signed max, |.|-max and its first index
  struct frame {
    double q;
    std::int64_t sum, smax, amax;
    int apos;
  };
  double nd = static_cast<double>(n);

  auto scan = [&](double pcond, bool second_pass) {
    neumaier pc_acc, tv_acc;
    std::vector<std::size_t> idx(static_cast<std::size_t>(n - 1), 0);
    std::vector<frame> st(static_cast<std::size_t>(n));
    st[0] = {1.0, 0, std::numeric_limits<std::int64_t>::min(), -1, -1};
    int depth = 0;
    for (;;) {
      if (depth == n - 1) {
        const frame& f = st[static_cast<std::size_t>(depth)];
        double pr_y = 0.0;
        for (std::size_t zi = 0; zi < K; ++zi) {
          std::int64_t z = vals[zi];
          std::int64_t s = f.sum + z;
          std::int64_t mx = std::max(f.smax, z);
          if (!cond_ok(s, mx)) continue;
          double w = f.q * probs[zi];
          if (!second_pass) pc_acc.add(w);
          std::int64_t za = std::abs(z);
          double mult = za > f.amax ? nd : (za == f.amax ? f.apos + 1 : 0.0);
          pr_y += w * mult;
        }
        if (second_pass) tv_acc.add(std::fabs(pr_y - f.q * pcond));
        // unwind
        do {
          if (depth == 0) return second_pass ? tv_acc.value() : pc_acc.value();
          --depth;
        } while (++idx[static_cast<std::size_t>(depth)] == K &&
                 (idx[static_cast<std::size_t>(depth)] = 0, true));
        // fallthrough: redo the frame below
      }
      const frame& f = st[static_cast<std::size_t>(depth)];
      std::size_t i = idx[static_cast<std::size_t>(depth)];
      std::int64_t v = vals[i];
      std::int64_t va = std::abs(v);
      frame nf = f;
      nf.q = f.q * probs[i];
      nf.sum = f.sum + v;
      nf.smax = std::max(f.smax, v);
      if (va > f.amax) {
        nf.amax = va;
        nf.apos = depth;
      }
      st[static_cast<std::size_t>(depth + 1)] = nf;
      ++depth;
    }
  };

  double pcond = scan(0.0, false);
  if (pcond <= 0.0)
    throw std::domain_error("tv_remaining_vs_product: conditioning event has zero mass");
  double num = scan(pcond, true);
  return 0.5 * num / pcond;
}

// Single-big-jump route for {S_n >= x, M_n > r} at n beyond enumeration
// reach.  On {max|y_i| <= r} the removed-coordinate law is exact; the rest
// is bounded, so tv lies in [exact_part, upper].
struct tv_big_jump_parts {
  double exact_part = 0.0;
  double slack = 0.0;
  double upper = 0.0;
};

inline tv_big_jump_parts tv_remaining_big_jump(const lattice_law& law, std::int64_t n,
                                               std::int64_t x, std::int64_t r,
                                               sum_build_options base = {}) {
  if (n < 2) throw std::invalid_argument("tv_remaining_big_jump: n must be >= 2");
  std::int64_t b = b_floor(law, n);
  base.window_x = std::max(base.window_x, static_cast<double>(std::max<std::int64_t>(0, x - b)));
  sum_distribution full = build_sum_distribution(law, n, base);
  sum_build_options cons = base;
  cons.max_step = r;
  sum_distribution gw = build_sum_distribution(law, n, cons);
  double p = (full.tail_geq(x) - gw.tail_geq(x)).to_double();
  if (!(p > 0.0))
    throw std::domain_error("tv_remaining_big_jump: conditioning event has zero mass");

  sum_build_options two = base;
  two.max_step = r;
  two.min_step = -r;
  two.window_x = std::max(0.0, static_cast<double>(x - b));
  sum_distribution a2 = build_sum_distribution(law, n - 1, two);

  double nd = static_cast<double>(n);
  neumaier exact_num, pr_in;
  for (std::size_t i = 0; i < a2.mass.size(); ++i) {
    if (a2.mass[i].is_zero()) continue;
    double q = a2.mass[i].to_double();
    std::int64_t s = a2.window.lo + static_cast<std::int64_t>(i);
    double t = law.tail(std::max(static_cast<double>(r), static_cast<double>(x - s - 1)));
    exact_num.add(q * std::fabs(nd * t - p));
    pr_in.add(q * nd * t);
  }
  double q_out = 1.0 - (law.cdf(static_cast<double>(r)) -
                        law.cdf(-static_cast<double>(r) - 1.0));
  double q_outside = 1.0 - std::pow(1.0 - q_out, static_cast<double>(n - 1)) +
                     (a2.under + a2.over).to_double();
  double pr_outside = std::max(0.0, 1.0 - pr_in.value() / p);
  tv_big_jump_parts out;
  out.exact_part = 0.5 * exact_num.value() / p;
  out.slack = 0.5 * (pr_outside + q_outside);
  out.upper = std::min(1.0, out.exact_part + out.slack);
  return out;
}

// --- export ---

inline void write_sum_csv(std::ostream& out, const sum_distribution& d) {
  csv_row(out, {"s", "mass", "log_mass"});
  for (std::size_t i = 0; i < d.mass.size(); ++i) {
    const xfloat& v = d.mass[i];
    csv_row(out, {csv_num(d.window.lo + static_cast<std::int64_t>(i)),
                  csv_num(v.to_double()),
                  v.is_zero() ? "-inf" : csv_num(v.log())});
  }
  csv_row(out, {"under", csv_num(d.under.to_double()),
                d.under.is_zero() ? "-inf" : csv_num(d.under.log())});
  csv_row(out, {"over", csv_num(d.over.to_double()),
                d.over.is_zero() ? "-inf" : csv_num(d.over.log())});
}

} // namespace bigjump

#endif
