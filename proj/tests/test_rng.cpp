#include "mcvd/particle_sim.hpp"
#include "mcvd/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace mcvd;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32::encrypt({0, 0, 0, 0}, {0, 0}) ==
        C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::encrypt({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                            {0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::encrypt({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                            {0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  RandomStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
    CHECK(va != d.next_u64());
  }
}

TEST_CASE("uniform draws lie in the open unit interval with the right mean") {
  RandomStream r(1, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("ziggurat normals: moments and Kolmogorov-Smirnov distance") {
  RandomStream r(2024, 3);
  const int n = 400000;
  std::vector<double> x(n);
  double m1 = 0, m2 = 0, m4 = 0;
  for (auto& v : x) {
    v = r.normal();
    m1 += v;
    m2 += v * v;
    m4 += v * v * v * v;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  CHECK(std::abs(m1) < 5.0 / std::sqrt(n));
  CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));
  std::sort(x.begin(), x.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf = 0.5 * std::erfc(-x[i] / std::sqrt(2.0));
    ks = std::max({ks, std::abs(cdf - double(i) / n), std::abs(cdf - double(i + 1) / n)});
  }
  // 99.9% critical value 1.95/√n
  CHECK(ks < 1.95 / std::sqrt(n));
  // tail mass beyond the ziggurat base radius
  const auto beyond = std::count_if(x.begin(), x.end(), [](double v) { return std::abs(v) > 3.442619855899; });
  const double expected = n * std::erfc(3.442619855899 / std::sqrt(2.0));
  CHECK(std::abs(beyond - expected) < 5.0 * std::sqrt(expected));
}

TEST_CASE("brownian_step per-axis variance is 2 D dt") {
  RandomStream r(99, 0);
  const double D = 100.0, dt = 1e-4;
  CHECK(std::sqrt(2.0 * D * dt) == doctest::Approx(0.1414213562));
  const int n = 1000000;
  Vector3d sum2 = Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    const Vector3d step = brownian_step(Vector3d::Zero(), D, dt, r);
    sum2 += step.cwiseProduct(step);
  }
  for (int axis = 0; axis < 3; ++axis) {
    const double var = sum2[axis] / n;
    CHECK(var > 2 * D * dt * 0.99);
    CHECK(var < 2 * D * dt * 1.01);
  }
  // variance scales with dt; same draws give a proportionally smaller step
  RandomStream r1(5, 5), r2(5, 5);
  const Vector3d big = brownian_step(Vector3d::Zero(), D, 1e-2, r1);
  const Vector3d tiny = brownian_step(Vector3d::Zero(), D, 1e-10, r2);
  CHECK((tiny - big * std::sqrt(1e-8)).norm() < 1e-15);
}
