#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "escape_atlas/tower.hpp"

using namespace escape_atlas;

namespace {
double ulps_apart(double a, double b) {
  if (a == b) return 0.0;
  double ulp = std::abs(std::nextafter(a, INFINITY) - a);
  return std::abs(a - b) / ulp;
}
}  // namespace

TEST_CASE("from_real fixed points") {
  TowerReal zero = tower_from_real(0.0L);
  CHECK(zero.height() == 0);
  CHECK(zero.mantissa() == 0.0L);
  CHECK(zero.is_zero());

  TowerReal one = tower_from_real(1.0L);
  CHECK(one.height() == 1);
  CHECK(one.mantissa() == 0.0L);

  // e = exp(exp(0)): height 2 with mantissa 0 up to the rounding of the
  // long double e constant itself (it is not exactly e).
  TowerReal e = tower_from_real(expl(expl(0.0L)));
  CHECK(e.height() == 2);
  CHECK(e.mantissa() < 1e-18L);
  CHECK(std::fabs(*e.to_real() - expl(1.0L)) <= 1e-18L * expl(1.0L));
}

TEST_CASE("from_real rejects bad input") {
  CHECK_THROWS_AS(tower_from_real(-1.0L), std::domain_error);
  CHECK_THROWS_AS(tower_from_real(std::numeric_limits<long double>::infinity()), std::domain_error);
  CHECK_THROWS_AS(tower_from_real(std::numeric_limits<long double>::quiet_NaN()), std::domain_error);
}

TEST_CASE("compare basics") {
  CHECK(tower_compare(tower_from_real(0.0L), tower_from_real(1.0L)) == std::strong_ordering::less);
  TowerReal e = tower_exp(tower_exp(TowerReal{}));
  CHECK(tower_compare(e, e) == std::strong_ordering::equal);
  // oracle: direct double comparison of e^10 vs e^9.9
  CHECK(tower_compare(tower_from_real(expl(10.0L)), tower_from_real(expl(9.9L))) == std::strong_ordering::greater);
}

TEST_CASE("exp and ln are exact height shifts") {
  TowerReal e = tower_exp(tower_exp(TowerReal{}));  // (2,0) = e
  TowerReal ee = tower_exp(e);
  CHECK(ee.height() == 3);
  CHECK(ee.mantissa() == 0.0L);

  CHECK(tower_ln(tower_from_real(1.0L)) == TowerReal{});
  CHECK_THROWS_AS(tower_ln(tower_from_real(0.5L)), std::domain_error);

  // e^709 against the 80-bit exponential oracle
  TowerReal t = tower_exp(tower_from_real(709.0L));
  auto v = t.to_real();
  REQUIRE(v.has_value());
  long double oracle = expl(709.0L);
  // mantissa quantization amplifies to ~2e-16 relative at this magnitude
  CHECK(std::fabs(*v - oracle) / oracle < 5e-16L);
}

TEST_CASE("add and mul basics") {
  auto x = tower_from_real(expl(3.7L));
  CHECK(tower_add(x, TowerReal{}) == x);
  CHECK(tower_add(TowerReal{}, x) == x);
  CHECK(tower_mul(tower_from_real(2.0L), tower_from_real(3.0L)) == tower_from_real(6.0L));
  CHECK(tower_mul(x, TowerReal{}).is_zero());

  // absorption: e^1000 + e^10 = e^1000 at this resolution; the log of the
  // result matches the high-precision log of the true sum to < 1e-12
  TowerReal big = tower_add(TowerReal::from_log(1000.0L), TowerReal::from_log(10.0L));
  auto lg = tower_ln(big).to_real();
  REQUIRE(lg.has_value());
  long double true_log = 1000.0L + log1pl(expl(-990.0L));
  CHECK(std::fabs(*lg - true_log) / true_log < 1e-12L);
}

TEST_CASE("add includes resolvable log corrections beyond machine range") {
  // a = e^20000, b = e^19999: sum has log = 20000 + log1p(e^-1)
  TowerReal a = TowerReal::from_log(20000.0L);
  TowerReal b = TowerReal::from_log(19999.0L);
  TowerReal s = tower_add(a, b);
  auto lg = tower_ln(s).to_real();
  REQUIRE(lg.has_value());
  long double expect = 20000.0L + log1pl(expl(-1.0L));
  CHECK(std::fabs(*lg - expect) < 1e-15L * expect);
  CHECK(s > a);
}

TEST_CASE("sub semantics") {
  CHECK(tower_sub(tower_from_real(7.0L), tower_from_real(3.0L)) == tower_from_real(4.0L));
  CHECK_THROWS_AS(tower_sub(tower_from_real(3.0L), tower_from_real(7.0L)), std::domain_error);
  // near-equal huge towers: indeterminate cancellation
  TowerReal a = TowerReal::from_log(20000.0L);
  TowerReal b = TowerReal::from_log(19999.5L);
  CHECK_THROWS_AS(tower_sub(a, b), tower_cancellation_error);
  // far-apart huge towers: absorbed
  TowerReal c = TowerReal::from_log(30000.0L);
  CHECK(tower_sub(c, a) == c);
}

TEST_CASE("mul with sub-unit factor at huge scale") {
  TowerReal a = TowerReal::from_log(20000.0L);
  TowerReal half = tower_from_real(0.5L);
  TowerReal p = tower_mul(a, half);
  auto lg = tower_ln(p).to_real();
  REQUIRE(lg.has_value());
  CHECK(std::fabs(*lg - (20000.0L + logl(0.5L))) < 1e-12L);
}

TEST_CASE("saturation flag") {
  TowerReal t = tower_from_real(0.5L);
  for (int i = 0; i < TowerReal::kMaxHeight + 3; ++i) t = tower_exp(t);
  CHECK(t.saturated());
  CHECK(!t.to_real().has_value());
  CHECK(t > TowerReal::from_log(1e300L));
  CHECK(tower_exp(t).saturated());
}

TEST_CASE("serialization round trip") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-690.0, 709.0);
  for (int i = 0; i < 2000; ++i) {
    TowerReal t = tower_from_real(expl((long double)u(rng)));
    TowerReal back = TowerReal::parse(t.str());
    REQUIRE(back == t);
    REQUIRE(back.mantissa() == t.mantissa());
  }
  CHECK(TowerReal::parse("T(3;0.25)").height() == 3);
  CHECK_THROWS_AS(TowerReal::parse("T(3;1.25)"), std::domain_error);
  CHECK_THROWS_AS(TowerReal::parse("bogus"), std::domain_error);
}

TEST_CASE("normalized constructor") {
  CHECK(TowerReal::normalized(2, 0.25L) == tower_exp(tower_exp(tower_from_real(0.25L))));
  // mantissa >= 1 folds upward
  CHECK(TowerReal::normalized(1, 2.5L) == TowerReal::from_log(2.5L));
  // negative mantissa descends
  TowerReal t = TowerReal::normalized(1, -0.5L);
  CHECK(t.height() == 0);
  CHECK(std::fabs(t.mantissa() - expl(-0.5L)) < 1e-18L);
  CHECK_THROWS_AS(TowerReal::normalized(0, -0.5L), std::domain_error);
}

TEST_CASE("properties: order, round trip, exp-ln, idempotence") {
  std::mt19937_64 rng(20240801);
  std::uniform_real_distribution<double> logu(-690.0, 709.0);
  std::uniform_real_distribution<double> mant(1.0, 2.0);
  std::uniform_int_distribution<int> expo(-1021, 1023);

  const int kSamples = 100000;
  for (int i = 0; i < kSamples; ++i) {
    // alternate log-uniform and full-exponent-range sampling
    double x = (i % 2 == 0) ? std::exp(logu(rng)) : std::ldexp(mant(rng), expo(rng));
    if (!std::isfinite(x) || x <= 0.0) continue;

    TowerReal t = tower_from_real((long double)x);
    // normalization invariant
    REQUIRE(t.mantissa() >= 0.0L);
    REQUIRE(t.mantissa() < 1.0L);
    // idempotence
    REQUIRE(TowerReal::normalized(t.height(), t.mantissa()) == t);
    // round trip within 4 ulp
    auto rt = t.to_double();
    REQUIRE(rt.has_value());
    REQUIRE(ulps_apart(x, *rt) <= 4.0);

    // order: x < y implies less
    double y = (i % 2 == 0) ? std::exp(logu(rng)) : std::ldexp(mant(rng), expo(rng));
    if (std::isfinite(y) && y > 0.0 && x != y) {
      TowerReal ty = tower_from_real((long double)y);
      auto want = x < y ? std::strong_ordering::less : std::strong_ordering::greater;
      REQUIRE(tower_compare(t, ty) == want);
      // order homomorphism under exp
      REQUIRE(tower_compare(tower_exp(t), tower_exp(ty)) == want);
    }

    // exp/ln inversion, exact field equality, heights <= 6
    TowerReal u = t;
    for (int k = 0; k < 2 && u.height() < 6; ++k) u = tower_exp(u);
    REQUIRE(tower_ln(tower_exp(u)) == u);

    // addition of non-negatives is >= max
    if (i % 16 == 0) {
      TowerReal b = tower_from_real((long double)std::exp(logu(rng)));
      TowerReal s = tower_add(t, b);
      REQUIRE(s >= t);
      REQUIRE(s >= b);
    }
  }
}
