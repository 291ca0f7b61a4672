// Tests for exponential tilting under a hard upper truncation: exact
// moment sums, inversion of the tilted mean, entropy asymptotics, the
// Gaussian-window predictors and the finite-n change-of-measure
// identity.  Reference digits come from a 30-digit mpmath evaluation
// of the same quantities; predictor/oracle ratios are measured against
// the exact convolution engine and pinned as regression values.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bigjump/stdnormal.hpp"
#include "bigjump/tilt.hpp"
#include "test_laws.hpp"

using namespace bigjump;
using Catch::Approx;

namespace {

lattice_law gapped_law() {
  return lattice_law::bounded({{0, 0.4}, {1, 0.3}, {2, 0.2}, {5, 0.1}});
}

lattice_law coin_pm1() { return lattice_law::bounded({{-1, 0.5}, {1, 0.5}}); }

lattice_law geom_half(std::int64_t cap) {
  std::vector<double> ms(static_cast<std::size_t>(cap) + 1);
  for (std::int64_t k = 0; k <= cap; ++k)
    ms[static_cast<std::size_t>(k)] = std::ldexp(1.0, -static_cast<int>(k) - 1);
  return lattice_law::custom(0, std::move(ms), {}, {});
}

} // namespace

TEST_CASE("truncated moments match hand sums on a bounded law") {
  auto law = gapped_law();
  REQUIRE(law.mean() == Approx(1.2).margin(1e-15));

  SECTION("cut between atoms keeps {0,1,2}") {
    auto e = truncated_mgf(law, 0.0, 3.2);
    REQUIRE(e.M == Approx(0.9).margin(1e-15));
    REQUIRE(e.Mp == Approx(-0.38).margin(1e-15));
    REQUIRE(e.Mpp == Approx(0.716).margin(1e-15));
    REQUIRE(e.log_M == Approx(std::log(0.9)).margin(1e-15));
    REQUIRE(e.m == Approx(-0.38 / 0.9).margin(1e-15));
    REQUIRE(e.var > 0.0);

    double u = 0.7;
    auto eu = truncated_mgf(law, u, 3.2);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::int64_t k : {0, 1, 2}) {
      double d = static_cast<double>(k) - 1.2;
      double w = std::exp(u * d) * law.pmf(k);
      s0 += w;
      s1 += d * w;
      s2 += d * d * w;
    }
    REQUIRE(eu.M == Approx(s0).epsilon(1e-14));
    REQUIRE(eu.Mp == Approx(s1).epsilon(1e-14));
    REQUIRE(eu.Mpp == Approx(s2).epsilon(1e-14));
  }

  SECTION("truncation beyond the support gives plain moments") {
    auto e = truncated_mgf(law, 0.0, 1e6);
    REQUIRE(e.M == Approx(1.0).margin(1e-14));
    REQUIRE(std::fabs(e.Mp) < 1e-14);
    REQUIRE(e.Mpp == Approx(law.variance()).epsilon(1e-14));
  }

  SECTION("rejects negative u and cuts below the support") {
    REQUIRE_THROWS_AS(truncated_mgf(law, -0.1, 3.2), std::invalid_argument);
    REQUIRE_THROWS_AS(truncated_mgf(law, 0.5, -2.0), std::invalid_argument);
  }
}

TEST_CASE("plus-minus-one law: cosh moments, atanh inversion") {
  auto law = coin_pm1();

  SECTION("moments are cosh and tanh") {
    for (double u : {0.1, 1.0, 5.0, 50.0}) {
      auto e = truncated_mgf(law, u, 1.0);
      REQUIRE(e.M == Approx(std::cosh(u)).epsilon(1e-14));
      REQUIRE(e.m == Approx(std::tanh(u)).epsilon(1e-13));
      REQUIRE(e.log_M == Approx(std::log(std::cosh(u))).epsilon(1e-13));
    }
  }

  SECTION("huge u overflows M but not log M") {
    auto e = truncated_mgf(law, 800.0, 1.0);
    REQUIRE(std::isinf(e.M));
    REQUIRE(e.log_M == Approx(800.0 - std::log(2.0)).epsilon(1e-12));
    REQUIRE(e.m == Approx(1.0).margin(1e-12));
  }

  SECTION("inversion is atanh") {
    for (double t : {0.05, 0.3, 0.5, 0.9}) {
      auto sol = solve_lambda(law, t, 1.0);
      REQUIRE(sol.lambda == Approx(std::atanh(t)).epsilon(1e-11));
      REQUIRE(sol.residual <= 1e-10 * std::max(1.0, std::fabs(t)));
      REQUIRE(sol.H == Approx(-sol.log_M + t * sol.lambda).margin(1e-15));
      REQUIRE(sol.H >= 0.0);
      REQUIRE(sol.iterations < 120);
    }
    auto s3 = solve_lambda(law, 0.3, 1.0);
    REQUIRE(s3.lambda == Approx(0.3095196042031117154741).epsilon(1e-12));
    REQUIRE(s3.H == Approx(0.04570054152531285120365).epsilon(1e-12));
  }

  SECTION("floor and cap behaviour") {
    auto s0 = solve_lambda(law, 0.0, 1.0);
    REQUIRE(s0.lambda == 0.0);
    REQUIRE(s0.H == Approx(0.0).margin(1e-15));
    REQUIRE_THROWS_AS(solve_lambda(law, -0.1, 1.0), std::domain_error);
    REQUIRE_THROWS_AS(solve_lambda(law, 1.0, 1.0), std::domain_error);
  }

  SECTION("truncation down to the lower atom pins the mean") {
    // floor(0.5 + 0) = 0 keeps only the atom at -1, so the truncated
    // law is deterministic and H(-1) = -log P(xi <= 0)
    auto s = solve_lambda(law, -1.0, 0.5);
    REQUIRE(s.lambda == 0.0);
    REQUIRE(s.H == Approx(std::log(2.0)).epsilon(1e-15));
    REQUIRE_THROWS_AS(solve_lambda(law, -0.9, 0.5), std::domain_error);
  }
}

TEST_CASE("truncated moments agree with law window sums") {
  auto par = lattice_law::pareto_zeta(2.5, sv_spec::constant_(1.0), 2000);
  double mu = par.mean();
  for (double r : {7.3, 40.0, 333.0}) {
    auto e = truncated_mgf(par, 0.0, r);
    std::int64_t khi = static_cast<std::int64_t>(std::floor(r + mu));
    REQUIRE(e.Mpp == Approx(par.sigma2(r)).epsilon(1e-12));
    REQUIRE(e.M == Approx(par.cdf(khi)).epsilon(1e-14));
    REQUIRE(e.Mp ==
            Approx(par.truncated_raw_mean(khi) - mu * par.cdf(khi)).margin(1e-13));
  }
  auto z4 = lattice_law::zrp_occupation(zrp_g_form::power_ratio, 4.0, 1.0, 2048);
  auto ez = truncated_mgf(z4, 0.0, 77.3);
  REQUIRE(ez.Mpp == Approx(z4.sigma2(77.3)).epsilon(1e-12));
}

TEST_CASE("tilted moments approach window moments for a critical tail") {
  // pmf ~ k^-3: the window variance grows like log r, and at u = 1/r
  // the tilted curvature stays a strictly shrinking factor above it
  auto law = lattice_law::pareto_zeta(2.0, sv_spec::constant_(1.0), 4000);
  REQUIRE(law.mean() == Approx(1.368432777620205875737).epsilon(1e-12));
  const double want_c2[3] = {1.427893770647805791, 1.24563722011383250669,
                             1.163826663664861609025};
  const double want_c1[3] = {0.81378862961935431, 0.92197848178031665,
                             0.95002063886598631};
  double prev2 = HUGE_VAL, prev1 = -HUGE_VAL;
  int i = 0;
  for (int j : {6, 10, 14}) {
    double r = std::ldexp(1.0, j);
    auto e = truncated_mgf(law, 1.0 / r, r);
    double s2 = law.sigma2(r);
    double c2 = e.Mpp / s2;
    double c1 = e.Mp / ((1.0 / r) * s2);
    double c0 = (e.M - 1.0) * r / s2;
    REQUIRE(c2 == Approx(want_c2[i]).epsilon(1e-8));
    REQUIRE(c1 == Approx(want_c1[i]).epsilon(1e-9));
    REQUIRE(std::fabs(c0) < 3e-4);
    REQUIRE(c2 > 1.0);
    REQUIRE(c2 < prev2);
    REQUIRE(c1 < 1.0);
    REQUIRE(c1 > prev1);
    prev2 = c2;
    prev1 = c1;
    ++i;
  }
}

TEST_CASE("inverse rate tracks the reciprocal truncation radius") {
  auto law = lattice_law::zrp_occupation(zrp_g_form::power_ratio, 3.0, 1.0, 4096);
  const double want_a[3] = {195.3887788645411399888, 610.685781583711376342,
                            1875.359681154879427534};
  const double want_r[3] = {171.6436318256872333769, 552.2174657072737993284,
                            1727.714054669121556421};
  // lambda(s a_n / n) * r_n / s along n = 2^14, 2^17, 2^20 for s = 1/2, 1, 2
  const double want_ratio[3][3] = {
      {1.335651320730977872533, 1.073338243569908668327, 0.8802329549578696589725},
      {1.274307834686224554239, 1.058905295018721013787, 0.8928477304437207134848},
      {1.232110891249334415605, 1.049607096974844721232, 0.903723685906779529855}};
  const double svals[3] = {0.5, 1.0, 2.0};

  double gap[3][3];
  for (int i = 0; i < 3; ++i) {
    std::int64_t n = INT64_C(1) << (14 + 3 * i);
    double a = solve_a_n(law, n);
    REQUIRE(a == Approx(want_a[i]).epsilon(1e-9));
    r_result rr = solve_r_n(law, n, a);
    REQUIRE(rr.r == Approx(want_r[i]).epsilon(1e-9));
    REQUIRE_FALSE(rr.at_floor);
    for (int k = 0; k < 3; ++k) {
      double t = svals[k] * a / static_cast<double>(n);
      auto sol = solve_lambda(law, t, rr.r);
      double ratio = sol.lambda * rr.r / svals[k];
      REQUIRE(ratio == Approx(want_ratio[i][k]).epsilon(1e-8));
      gap[i][k] = std::fabs(ratio - 1.0);
    }
  }
  for (int k = 0; k < 3; ++k) {
    REQUIRE(gap[1][k] < gap[0][k]);
    REQUIRE(gap[2][k] < gap[1][k]);
  }
}

TEST_CASE("entropy ratio tends to one in the moderate regime") {
  SECTION("closed-form law, deep moderate deviation") {
    auto law = coin_pm1();
    double x = std::pow(10.0, 3.6);
    auto ec = entropy_asymptotic_check(law, 1000000, x);
    REQUIRE_FALSE(ec.at_mean_floor);
    REQUIRE(ec.n_entropy == Approx(7.924486894825200189417).epsilon(1e-11));
    REQUIRE(ec.ratio == Approx(1.000002641505400153582).epsilon(1e-11));
    REQUIRE(std::fabs(ec.ratio - 1.0) <= 0.02);
  }

  SECTION("heavy-tailed occupation law at x = a_n") {
    auto law = lattice_law::zrp_occupation(zrp_g_form::power_ratio, 4.0, 1.0, 2048);
    std::int64_t n = 100000;
    double a = solve_a_n(law, n);
    REQUIRE(a == Approx(213.3587265505693923542).epsilon(1e-10));
    auto ec = entropy_asymptotic_check(law, n, a);
    REQUIRE_FALSE(ec.at_mean_floor);
    REQUIRE(ec.r_n == Approx(213.0077786819899850034).epsilon(1e-9));
    REQUIRE(ec.lambda == Approx(0.004657423910962672311038).epsilon(1e-9));
    REQUIRE(ec.n_entropy == Approx(0.5015207128129121225328).epsilon(1e-9));
    REQUIRE(ec.ratio == Approx(1.001391550525277092248).epsilon(1e-9));
    REQUIRE(std::fabs(ec.ratio - 1.0) <= 0.1);
  }

  SECTION("input guards") {
    auto law = coin_pm1();
    REQUIRE_THROWS_AS(entropy_asymptotic_check(law, 100, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(entropy_asymptotic_check(law, 100, -3.0), std::invalid_argument);
    REQUIRE_THROWS_AS(entropy_asymptotic_check(law, 0, 5.0), std::invalid_argument);
  }
}

TEST_CASE("tilt solver properties on a heavy-tailed law") {
  auto law = lattice_law::pareto_zeta(2.5, sv_spec::constant_(1.0), 2000);
  double r = 50.0;

  SECTION("tilted mean is strictly increasing with positive variance") {
    double prev = -HUGE_VAL;
    for (int j = 0; j <= 20; ++j) {
      auto e = truncated_mgf(law, 0.05 * j, r);
      REQUIRE(e.var > 0.0);
      REQUIRE(e.m > prev);
      prev = e.m;
    }
  }

  SECTION("solution curve: tight residuals, increasing rate, convex entropy") {
    std::vector<double> lams;
    std::vector<double> hs;
    for (int j = 1; j <= 90; ++j) {
      double t = 0.5 * j;
      auto sol = solve_lambda(law, t, r);
      REQUIRE(sol.residual <= 1e-10 * std::max(std::fabs(t), 1e-3));
      REQUIRE(sol.H >= 0.0);
      REQUIRE(sol.H == Approx(-sol.log_M + t * sol.lambda).margin(1e-15));
      REQUIRE(sol.iterations < 120);
      if (!lams.empty()) REQUIRE(sol.lambda > lams.back());
      lams.push_back(sol.lambda);
      hs.push_back(sol.H);
    }
    for (std::size_t i = 1; i + 1 < hs.size(); ++i)
      REQUIRE(hs[i + 1] - 2.0 * hs[i] + hs[i - 1] >= -1e-9);
  }

  SECTION("domain guards") {
    REQUIRE_THROWS_AS(solve_lambda(law, -5.0, r), std::domain_error);
    REQUIRE_THROWS_AS(solve_lambda(law, 49.9, r), std::domain_error);
  }
}

TEST_CASE("change-of-measure identity is exact at small n") {
  struct cfg {
    lattice_law law;
    std::int64_t n, x;
    double r;
    std::int64_t khi;
  };
  std::vector<cfg> cases;
  cases.push_back({gapped_law(), 5, 13, 4.0, 5});
  cases.push_back({gapped_law(), 10, 19, 4.2, 5});
  cases.push_back({gapped_law(), 20, 33, 3.9, 5});
  cases.push_back({coin_pm1(), 8, 4, 1.0, 1});
  cases.push_back({geom_half(400), 12, 30, 9.3, 10});
  cases.push_back({lattice_law::pareto_zeta(2.5, sv_spec::constant_(1.0), 2000), 20,
                   45, 12.7, 13});
  cases.push_back({lattice_law::zrp_occupation(zrp_g_form::rational, 4.0, 1.0, 2000),
                   10, 15, 6.2, 6});

  for (const auto& c : cases) {
    auto cc = change_of_measure_check(c.law, c.n, c.x, c.r);
    REQUIRE(cc.khi == c.khi);
    REQUIRE(cc.lambda > 0.0);
    REQUIRE_FALSE(cc.lhs.is_zero());
    REQUIRE_FALSE(cc.rhs.is_zero());
    REQUIRE(cc.rel_gap <= 1e-10);
  }

  SECTION("guards") {
    // cutting at 3.2 drops the atom at 5, leaving a mean cap of 0.8
    REQUIRE_THROWS_AS(change_of_measure_check(gapped_law(), 5, 13, 3.2),
                      std::domain_error);
    REQUIRE_THROWS_AS(change_of_measure_check(gapped_law(), 0, 3, 4.0),
                      std::invalid_argument);
    auto ts = lattice_law::two_sided_stable(2.5, sv_spec::constant_(1.0), 2.5,
                                            sv_spec::constant_(1.0), 1.0, 2000);
    REQUIRE_THROWS_AS(change_of_measure_check(ts, 5, 10, 8.0), std::invalid_argument);
    // a target mean this deep into the geometric tail needs a tilt so
    // strong that the exponential factors would not be representable
    REQUIRE_THROWS_AS(change_of_measure_check(geom_half(500), 1, 499, 499.5),
                      std::runtime_error);
  }
}

TEST_CASE("left-unbounded laws tilt for positive u only") {
  auto ts = lattice_law::two_sided_stable(2.5, sv_spec::constant_(1.0), 2.5,
                                          sv_spec::constant_(1.0), 1.0, 2000);
  double mu = ts.mean();
  auto e = truncated_mgf(ts, 0.3, 25.0);
  std::int64_t khi = static_cast<std::int64_t>(std::floor(25.0 + mu));
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::int64_t k = -100000; k <= khi; ++k) {
    double d = static_cast<double>(k) - mu;
    double w = std::exp(0.3 * d) * ts.pmf(k);
    s0 += w;
    s1 += d * w;
    s2 += d * d * w;
  }
  REQUIRE(e.M == Approx(s0).epsilon(1e-10));
  REQUIRE(e.Mp == Approx(s1).epsilon(1e-10));
  REQUIRE(e.Mpp == Approx(s2).epsilon(1e-10));
  REQUIRE_THROWS_AS(truncated_mgf(ts, 0.0, 25.0), std::invalid_argument);
  REQUIRE_THROWS_AS(truncated_mgf(ts, 1e-7, 25.0), std::runtime_error);
  REQUIRE_THROWS_AS(solve_lambda(ts, 0.5, 25.0), std::invalid_argument);
}

TEST_CASE("strong tilt keeps the log moment finite") {
  auto par = lattice_law::pareto_zeta(2.5, sv_spec::constant_(1.0), 2000);
  auto e = truncated_mgf(par, 5.0, 300.0);
  REQUIRE(std::isinf(e.M));
  REQUIRE(std::isfinite(e.log_M));
  double mu = par.mean();
  double lead = 5.0 * (301.0 - mu) + std::log(par.pmf(301));
  REQUIRE(e.log_M > lead);
  REQUIRE(e.log_M < lead + 0.01);
  REQUIRE(e.m > 295.0);
  REQUIRE(e.var > 0.0);
}

TEST_CASE("window predictors track exact probabilities") {
  auto law = lattice_law::zrp_occupation(zrp_g_form::power_ratio, 4.0, 1.0, 2048);
  std::int64_t n = 100000;
  double mu = law.mean();
  double a = solve_a_n(law, n);
  std::int64_t b = static_cast<std::int64_t>(b_floor(law, n));
  sum_build_options base;
  base.guard = 12.0;

  SECTION("integral and local modes inside the window regime") {
    struct probe {
      double mult, ri, rl;
    };
    const probe want[2] = {{3.0, 1.0963845663668599, 1.024258405146647},
                           {5.0, 1.0395478548930299, 1.0346267604887376}};
    for (const auto& w : want) {
      std::int64_t xi = std::llround(w.mult * a);
      double xc = static_cast<double>(b + xi) - static_cast<double>(n) * mu;
      auto gi = gaussian_window_predictor(law, n, xc, gw_mode::integral);
      auto gl = gaussian_window_predictor(law, n, xc, gw_mode::local);
      REQUIRE(gi.in_regime);
      std::int64_t khi = static_cast<std::int64_t>(std::floor(gi.r_used + mu));
      double ri = gi.value / p_sum_geq(law, n, xi, khi, base);
      double rl = gl.value / p_sum_eq(law, n, xi, khi, base);
      REQUIRE(ri == Approx(w.ri).epsilon(1e-6));
      REQUIRE(rl == Approx(w.rl).epsilon(1e-6));
      REQUIRE(ri > 0.9);
      REQUIRE(ri < 1.1);
      REQUIRE(rl > 0.9);
      REQUIRE(rl < 1.1);
    }
  }

  SECTION("low-skew heavy law reaches its asymptote by n = 1e5") {
    auto mix = bigjump_tests::low_skew_pareto25();
    REQUIRE(mix.mean() == Approx(0.88086855772695871).epsilon(1e-12));
    REQUIRE(mix.variance() == Approx(3.1347036526781662).epsilon(1e-12));
    double am = solve_a_n(mix, n);
    REQUIRE(am == Approx(558.28990078571974).epsilon(1e-10));
    std::int64_t bm = static_cast<std::int64_t>(b_floor(mix, n));
    std::int64_t xi = std::llround(3.0 * am);
    double xc = static_cast<double>(bm + xi) - static_cast<double>(n) * mix.mean();
    auto gi = gaussian_window_predictor(mix, n, xc, gw_mode::integral);
    auto gl = gaussian_window_predictor(mix, n, xc, gw_mode::local);
    std::int64_t khi = static_cast<std::int64_t>(std::floor(gi.r_used + mix.mean()));
    double ri = gi.value / p_sum_geq(mix, n, xi, khi, base);
    double rl = gl.value / p_sum_eq(mix, n, xi, khi, base);
    REQUIRE(ri == Approx(1.0959501449951483).epsilon(1e-6));
    REQUIRE(rl == Approx(1.0020727869053263).epsilon(1e-6));
    REQUIRE(ri > 0.9);
    REQUIRE(ri < 1.1);
    REQUIRE(rl > 0.9);
    REQUIRE(rl < 1.1);
  }

  SECTION("skew-heavy tail converges more slowly, from above") {
    auto par = lattice_law::pareto_zeta(2.5, sv_spec::constant_(1.0), 4000);
    double ratios[2];
    int i = 0;
    for (std::int64_t np : {INT64_C(100000), INT64_C(200000)}) {
      double ap = solve_a_n(par, np);
      std::int64_t bp = static_cast<std::int64_t>(b_floor(par, np));
      std::int64_t xi = std::llround(3.0 * ap);
      double xc = static_cast<double>(bp + xi) - static_cast<double>(np) * par.mean();
      auto gi = gaussian_window_predictor(par, np, xc, gw_mode::integral);
      std::int64_t khi = static_cast<std::int64_t>(std::floor(gi.r_used + par.mean()));
      ratios[i++] = gi.value / p_sum_geq(par, np, xi, khi, base);
    }
    REQUIRE(ratios[0] == Approx(1.1865498681174784).epsilon(1e-6));
    REQUIRE(ratios[1] == Approx(1.1697289920096308).epsilon(1e-6));
    REQUIRE(ratios[1] < ratios[0]);
  }

  SECTION("bulk regime against the normal upper tail") {
    double x3 = 3.0 * a;
    auto g3 = gaussian_window_predictor(law, n, x3, gw_mode::integral);
    double r3 = g3.value / normal_upper_tail_x(x3 / a).to_double();
    REQUIRE(r3 == Approx(0.98772958190996341).epsilon(1e-6));
    REQUIRE(std::fabs(r3 - 1.0) < 0.05);
    // the closed form substitutes the asymptotic normal-tail prefactor,
    // so right at x = a_n it overshoots the true normal tail
    double x1 = 1.0 * a;
    auto g1 = gaussian_window_predictor(law, n, x1, gw_mode::integral);
    double r1 = g1.value / normal_upper_tail_x(x1 / a).to_double();
    REQUIRE(r1 == Approx(1.5228177460193582).epsilon(1e-6));
  }

  SECTION("wider truncation: prefactor measured, not asserted") {
    std::int64_t xi = std::llround(3.0 * a);
    double xc = static_cast<double>(b + xi) - static_cast<double>(n) * mu;
    auto g1 = gaussian_window_predictor(law, n, xc, gw_mode::integral);
    auto g4 = gaussian_window_predictor(law, n, xc, gw_mode::integral, 4.0);
    REQUIRE(g4.r_used == Approx(4.0 * g1.r_used).epsilon(1e-12));
    std::int64_t khi4 = static_cast<std::int64_t>(std::floor(g4.r_used + mu));
    REQUIRE(khi4 == 282);
    double ratio = g4.value / p_sum_geq(law, n, xi, khi4, base);
    REQUIRE(ratio == Approx(1.1048943207685293).epsilon(1e-6));
  }

  SECTION("regime flag") {
    REQUIRE_FALSE(
        gaussian_window_predictor(law, n, 0.5 * a, gw_mode::integral).in_regime);
    REQUIRE(gaussian_window_predictor(law, n, 3.0 * a, gw_mode::local).in_regime);
    REQUIRE_FALSE(gaussian_window_predictor(law, n, 0.25 * static_cast<double>(n),
                                            gw_mode::integral)
                      .in_regime);
  }

  SECTION("input guards") {
    REQUIRE_THROWS_AS(gaussian_window_predictor(law, 0, 100.0, gw_mode::integral),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(gaussian_window_predictor(law, n, 0.0, gw_mode::integral),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(
        gaussian_window_predictor(law, n, 100.0, gw_mode::integral, 0.0),
        std::invalid_argument);
  }
}
