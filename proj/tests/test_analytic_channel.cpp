#include "mcvd/analytic_channel.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace mcvd;

namespace {
const ChannelParams kD2{100.0, 2.0, 5.0};
const ChannelParams kD4{100.0, 4.0, 5.0};
}  // namespace

TEST_CASE("erfc oracle agrees with independently computed reference digits") {
  // 40-digit values of erfc, computed offline with arbitrary precision
  const std::pair<long double, long double> ref[] = {
      {0.1L, 0.8875370839817151077967249282560316167783L},
      {1.0L, 0.1572992070502851306587793649173907407039L},
      {2.0L, 0.004677734981047265837930743632747071389108L},
      {3.0L, 0.00002209049699858544137277612958232037984771L},
      {5.0L, 1.537459794428034850188343485383378890118e-12L},
      {10.0L, 2.088487583762544757000786294957788611561e-45L},
  };
  for (const auto& [x, want] : ref)
    CHECK(std::fabs(static_cast<double>((oracle::erfc(x) - want) / want)) < 1e-15);
}

TEST_CASE("std::erfc is accurate to 1e-13 relative on [0, 10]") {
  double worst = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double x = 10.0 * i / 2000.0;
    const long double want = oracle::erfc(x);
    const double rel = std::fabs(static_cast<double>((std::erfc(x) - want) / want));
    worst = std::max(worst, rel);
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("f_hit_cumulative limits and frozen value") {
  CHECK(f_hit_cumulative(kD2, 0.0) == 0.0);
  CHECK(f_hit_cumulative(kD2, INFINITY) == doctest::Approx(5.0 / 7.0).epsilon(1e-15));
  CHECK(f_hit_cumulative(kD2, 1e12) == doctest::Approx(5.0 / 7.0).epsilon(1e-5));
  // 5/7 · erfc(2/√80) from the long-double oracle
  const double oracle_value =
      static_cast<double>(5.0L / 7.0L * oracle::erfc(2.0L / std::sqrt(80.0L)));
  CHECK(oracle_value == doctest::Approx(0.5370211671756066).epsilon(1e-15));
  CHECK(f_hit_cumulative(kD2, 0.2) == doctest::Approx(0.5370211671756066).epsilon(1e-14));
  CHECK_THROWS_AS(f_hit_cumulative(kD2, -1e-3), std::domain_error);
}

TEST_CASE("f_hit_cumulative monotonicity and bound on a random grid") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const ChannelParams p{10.0 + 500.0 * u(gen), 0.1 + 10.0 * u(gen), 0.5 + 10.0 * u(gen)};
    const double t = 1e-3 + 5.0 * u(gen);
    const double f = f_hit_cumulative(p, t);
    CHECK(f >= 0.0);
    CHECK(f <= f_hit_limit(p));
    CHECK(f_hit_cumulative(p, t * 1.1) >= f);
    CHECK(f_hit_cumulative({p.D, p.d * 1.1, p.r_rx}, t) <= f);
    CHECK(f_hit_cumulative({p.D, p.d, p.r_rx * 1.1}, t) > f);
  }
}

TEST_CASE("erfc and normal-cdf forms agree") {
  for (double d : {2.0, 4.0, 6.0})
    for (double t = 0.01; t < 5.0; t *= 1.3) {
      const ChannelParams p{100.0, d, 5.0};
      CHECK(f_hit_cumulative_phi(p, t) ==
            doctest::Approx(f_hit_cumulative(p, t)).epsilon(1e-12));
    }
}

TEST_CASE("f_hit_rate matches central differences of the cumulative") {
  for (const auto& p : {kD2, kD4, ChannelParams{100.0, 6.0, 5.0}}) {
    for (int i = 1; i <= 100; ++i) {
      const double t = 0.004 * i;  // up to 0.4 s
      const double h = 1e-6 * t;
      const double fd = (f_hit_cumulative(p, t + h) - f_hit_cumulative(p, t - h)) / (2 * h);
      const double rate = f_hit_rate(p, t);
      if (rate < 1e-12) continue;
      CHECK(fd == doctest::Approx(rate).epsilon(1e-6));
    }
  }
}

TEST_CASE("f_hit_rate vanishes at both ends and integrates to the cumulative") {
  CHECK(f_hit_rate(kD2, 1e-6) < 1e-100);
  CHECK(f_hit_rate(kD2, 1e9) < 1e-9);
  CHECK_THROWS_AS(f_hit_rate(kD2, 0.0), std::domain_error);
  const double integral =
      oracle::integrate([](double t) { return t > 0 ? f_hit_rate(kD4, t) : 0.0; }, 0.0, 1.6,
                        1e-12);
  CHECK(std::abs(integral - f_hit_cumulative(kD4, 1.6)) < 1e-6);
}

TEST_CASE("analytic_peak_time matches golden-section maximization") {
  CHECK(analytic_peak_time(kD4) == doctest::Approx(16.0 / 600.0));
  CHECK(analytic_peak_time(kD2) == doctest::Approx(4.0 / 600.0));
  CHECK(analytic_peak_time({100.0, 8.0, 5.0}) == 4.0 * analytic_peak_time(kD4));
  for (const auto& p : {kD2, kD4}) {
    // maximize the log-rate; its curvature keeps the search well conditioned
    const double found = oracle::golden_max(
        [&](double t) { return std::log(f_hit_rate(p, t)); }, 1e-4, 1.0, 1e-13);
    CHECK(std::abs(found - analytic_peak_time(p)) < 1e-9);
  }
}

TEST_CASE("peak time is a strict local maximum over the preset distance grid") {
  for (double d : {2.0, 4.0, 6.0}) {
    const ChannelParams p{100.0, d, 5.0};
    const double tp = analytic_peak_time(p);
    CHECK(f_hit_rate(p, tp + 1e-4) < f_hit_rate(p, tp));
    CHECK(f_hit_rate(p, tp - 1e-4) < f_hit_rate(p, tp));
  }
}

TEST_CASE("expected_hits scales the cumulative fraction") {
  CHECK(expected_hits(kD2, 40000, INFINITY) == doctest::Approx(40000.0 * 5.0 / 7.0));
  CHECK(expected_hits(kD2, 0, 0.3) == 0.0);
  CHECK(expected_hits(kD2, 40000, 0.2) == doctest::Approx(21480.846687024266).epsilon(1e-13));
}

TEST_CASE("channel parameter validation") {
  CHECK_NOTHROW(validate(kD2));
  CHECK_THROWS(validate(ChannelParams{0.0, 2.0, 5.0}));
  CHECK_THROWS(validate(ChannelParams{100.0, -2.0, 5.0}));
  CHECK_THROWS(validate(ChannelParams{100.0, 2.0, NAN}));
}
