#include "mcvd/geometry.hpp"

#include <doctest.h>

#include <random>

using namespace mcvd;

namespace {

void check_vec(const Vector3d& got, const Vector3d& want, double tol = 1e-12) {
  CHECK((got - want).norm() == doctest::Approx(0.0).epsilon(tol));
}

}  // namespace

TEST_CASE("place_receiver: collinear, quarter and antipodal placements") {
  const Vector3d o = Vector3d::Zero();
  const Vector3d x = Vector3d::UnitX();
  check_vec(place_receiver(o, x, 0.0, 2.0, 5.0).center, {7, 0, 0});
  check_vec(place_receiver(o, x, 90.0, 2.0, 5.0).center, {0, 7, 0});
  check_vec(place_receiver(o, x, 180.0, 4.0, 5.0).center, {-9, 0, 0});
  CHECK(place_receiver(o, x, 0.0, 2.0, 5.0).radius == 5.0);
}

TEST_CASE("place_receiver: argument errors") {
  const Vector3d o = Vector3d::Zero();
  const Vector3d x = Vector3d::UnitX();
  CHECK_THROWS_AS(place_receiver(o, x, -1.0, 2.0, 5.0), GeometryError);
  CHECK_THROWS_AS(place_receiver(o, x, 180.5, 2.0, 5.0), GeometryError);
  CHECK_THROWS_AS(place_receiver(o, x, 10.0, 0.0, 5.0), GeometryError);
  CHECK_THROWS_AS(place_receiver(o, x, 10.0, 2.0, -5.0), GeometryError);
  CHECK_THROWS_AS(place_receiver(o, Vector3d(2, 0, 0), 10.0, 2.0, 5.0), GeometryError);
}

TEST_CASE("place_transmitter puts the emission point on the facing surface") {
  const Vector3d x = Vector3d::UnitX();
  auto s = place_transmitter<double>(Vector3d::Zero(), x, 5.0);
  check_vec(s.center, {-5, 0, 0});
  CHECK(s.radius == 5.0);
  s = place_transmitter<double>(Vector3d::Zero(), x, 0.0);
  check_vec(s.center, {0, 0, 0});
  CHECK(s.radius == 0.0);
  s = place_transmitter(Vector3d(1, 2, 3), x, 2.5);
  check_vec(s.center, {-1.5, 2, 3});
  CHECK_THROWS_AS(place_transmitter<double>(Vector3d::Zero(), x, -1.0), GeometryError);
}

TEST_CASE("reflect_off_sphere") {
  const Sphered body{Vector3d::Zero(), 5.0};
  check_vec(reflect_off_sphere<double>({6, 0, 0}, {4, 0, 0}, body), {6, 0, 0});
  check_vec(reflect_off_sphere<double>({6, 0, 0}, {5.5, 0, 0}, body), {5.5, 0, 0});
  check_vec(reflect_off_sphere<double>({5.1, 0, 0}, {0, 0, 0}, body), {5.1, 0, 0});
  // off-axis penetration mirrors along the radial direction
  check_vec(reflect_off_sphere<double>({0, 5.2, 0}, {0, 0, 4.0}, body), {0, 0, 6.0});
}

TEST_CASE("reflect_off_sphere never ends strictly inside and is identity outside") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Sphered body{Vector3d(0.3, -0.2, 1.0), 2.5};
  for (int i = 0; i < 20000; ++i) {
    Vector3d prev;
    do {
      prev = body.center + 4.0 * Vector3d(u(gen), u(gen), u(gen));
    } while ((prev - body.center).norm() <= body.radius);
    const Vector3d proposed = prev + 1.5 * Vector3d(u(gen), u(gen), u(gen));
    const Vector3d out = reflect_off_sphere(prev, proposed, body);
    CHECK((out - body.center).norm() >= body.radius - 1e-9);
    if ((proposed - body.center).norm() >= body.radius) CHECK(out == proposed);
  }
}

TEST_CASE("placement distances and mirror symmetry over all angles") {
  const Vector3d e(0.5, -1.0, 2.0);
  const Vector3d b = Vector3d(1, 1, 0).normalized();
  const Vector3d n = reference_normal(b);
  CHECK(std::abs(n.dot(b)) < 1e-15);
  for (double a = 0; a <= 180; a += 2.5) {
    const auto up = place_receiver(e, b, a, 4.0, 5.0, n);
    const auto down = place_receiver(e, b, a, 4.0, 5.0, Vector3d(-n));
    CHECK((up.center - e).norm() == doctest::Approx(9.0).epsilon(1e-12));
    // mirror images: equal projection on the axis, equal distance from it
    const Vector3d ru = up.center - e;
    const Vector3d rd = down.center - e;
    CHECK(ru.dot(b) == doctest::Approx(rd.dot(b)).epsilon(1e-12));
    CHECK((ru - ru.dot(b) * b).norm() ==
          doctest::Approx((rd - rd.dot(b) * b).norm()).epsilon(1e-9));
  }
}

TEST_CASE("reference normal for +x boresight is +y") {
  check_vec(reference_normal(Vector3d(Vector3d::UnitX())), {0, 1, 0});
  // a boresight along y falls back to z
  CHECK(std::abs(reference_normal(Vector3d(Vector3d::UnitY())).dot(Vector3d::UnitY())) < 1e-15);
}

TEST_CASE("preset topologies are disjoint at every angle (transmitter-center pivot)") {
  for (double d : {2.0, 4.0, 6.0}) {
    for (double r_tx : {0.0, 2.5, 5.0, 7.5}) {
      Placementd p;
      p.d = d;
      p.r_tx = r_tx;
      p.r_rx = 5.0;
      for (double a = 0; a <= 180; a += 1.0) {
        const auto t = make_topology(p, a);
        const double between = (t.rx.center - t.tx_body.center).norm();
        CHECK(between > r_tx + 5.0);
        CHECK(between - r_tx - 5.0 == doctest::Approx(d).epsilon(1e-12));
        CHECK(((t.emission_point - t.tx_body.center).norm() - r_tx) ==
              doctest::Approx(0.0).epsilon(1e-9));
        CHECK_NOTHROW(validate_topology(t));
      }
      // gap to the receiver along the boresight ray is exactly d
      const auto t0 = make_topology(p, 0.0);
      CHECK((t0.rx.center - t0.emission_point).norm() - 5.0 == doctest::Approx(d));
    }
  }
}

TEST_CASE("emission-point pivot overlaps the body at back angles") {
  Placementd p;
  p.d = 2.0;
  p.r_tx = 7.5;
  p.pivot = PivotConvention::EmissionPoint;
  CHECK_NOTHROW(validate_topology(make_topology(p, 0.0)));
  CHECK_THROWS_AS(validate_topology(make_topology(p, 180.0)), GeometryError);
  // identical to the transmitter-center pivot for a point source
  p.r_tx = 0.0;
  Placementd q = p;
  q.pivot = PivotConvention::TransmitterCenter;
  for (double a : {0.0, 45.0, 180.0})
    check_vec(make_topology(p, a).rx.center, make_topology(q, a).rx.center);
}

TEST_CASE("geometry templates work in single precision") {
  const auto s = place_receiver<float>(Vector3<float>::Zero(), Vector3<float>::UnitX(), 90.0f,
                                       2.0f, 5.0f);
  CHECK(s.center.y() == doctest::Approx(7.0f));
}
