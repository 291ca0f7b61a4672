#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "bigjump/xfloat.hpp"

using bigjump::xfloat;
using bigjump::neumaier;
using bigjump::rel_diff;

// Reference values from tests/oracle_gen/gen_xfloat_stdnormal.py (mpmath, 60 digits).
static constexpr double kLogProd400 = -762.6014136096134317051352;
static constexpr double kLogPow = -109951.1682172850620965591;
static constexpr double kLogMixedSum = -91.88026016844761760495336;

TEST_CASE("construction and round trips") {
  CHECK(xfloat(0.0).is_zero());
  CHECK(xfloat(1.0).to_double() == 1.0);
  CHECK(xfloat(-3.25).to_double() == -3.25);
  CHECK(xfloat(1e-300).to_double() == 1e-300);

  xfloat a(0.75, 10); // 768
  CHECK(a.to_double() == 768.0);

  // normalization keeps |m| in [0.5, 1)
  xfloat b(13.0);
  CHECK(std::fabs(b.m) >= 0.5);
  CHECK(std::fabs(b.m) < 1.0);
}

TEST_CASE("deep underflow product matches high precision log") {
  xfloat p(1.0);
  for (int k = 1; k <= 400; ++k) p *= xfloat(k / 1000.0);
  CHECK(std::fabs(p.log() - kLogProd400) < 1e-11);
  CHECK(p.to_double() == 0.0); // far below double range, clamps cleanly
}

TEST_CASE("binary exponentiation of near-one base") {
  xfloat v = xfloat::pow_int(xfloat(1.0 - 1e-7), 1ULL << 40);
  CHECK(std::fabs(v.log() - kLogPow) / std::fabs(kLogPow) < 1e-12);
}

TEST_CASE("addition across magnitude gaps") {
  xfloat s = xfloat(1e-40) + xfloat(3e-100) + xfloat(7e-160) + xfloat(2.5e-41);
  CHECK(std::fabs(s.log() - kLogMixedSum) < 1e-13);

  // a gap beyond 200 bits leaves the big term untouched
  xfloat big(1.0), tiny = xfloat::from_log(-500.0);
  CHECK((big + tiny).to_double() == 1.0);

  // nearby terms add exactly
  CHECK((xfloat(3.0) + xfloat(4.0)).to_double() == 7.0);
  CHECK((xfloat(3.0) - xfloat(4.0)).to_double() == -1.0);
}

TEST_CASE("from_log and log invert each other far outside double range") {
  for (double L : {-1e6, -5432.1, -1.0, 0.0, 3.5, 1e5}) {
    xfloat v = xfloat::from_log(L);
    CHECK(std::fabs(v.log() - L) <= 1e-13 * std::max(1.0, std::fabs(L)));
  }
  CHECK(xfloat::from_log(-std::numeric_limits<double>::infinity()).is_zero());
}

TEST_CASE("multiplicative identities") {
  xfloat a = xfloat::from_log(-4321.0);
  xfloat b = xfloat::from_log(-1234.5);
  CHECK(std::fabs((a * b).log() - (-5555.5)) < 1e-10);
  CHECK(std::fabs((a / b).log() - (-3086.5)) < 1e-10);
  CHECK(rel_diff(a.sqrt() * a.sqrt(), a) < 1e-15);
  CHECK(rel_diff(xfloat::pow_int(a, 7), a * a * a * a * a * a * a) < 1e-14);
}

TEST_CASE("comparisons") {
  xfloat a = xfloat::from_log(-100.0);
  xfloat b = xfloat::from_log(-99.0);
  CHECK(a < b);
  CHECK(b > a);
  CHECK(a <= a);
  CHECK(xfloat(0.0) < a);
  CHECK(-b < -a);
  CHECK(-a < a);
}

TEST_CASE("sci string rendering") {
  CHECK(xfloat(0.0).to_sci_string() == "0");
  std::string s = xfloat::from_log(-10000.0).to_sci_string(6);
  // exp(-10000) = 1.1354838653147360985e-4343
  CHECK(s.find("e-4343") != std::string::npos);
}

TEST_CASE("neumaier sum recovers cancellation-prone totals") {
  neumaier acc;
  acc.add(1.0);
  for (int i = 0; i < 10'000'000; ++i) acc.add(1e-17);
  acc.add(-1.0);
  // naive summation returns 0 here; compensation keeps its own ~1e-19 noise
  CHECK(std::fabs(acc.value() - 1e-10) < 1e-17);
}
