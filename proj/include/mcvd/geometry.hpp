#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mcvd {

/// Position or displacement in micrometers.
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

using Vector3d = Vector3<double>;

/// Sphere of radius `radius` (µm). A zero radius is the degenerate point body.
template <typename Scalar>
struct Sphere {
  Vector3<Scalar> center = Vector3<Scalar>::Zero();
  Scalar radius = Scalar(0);
};

using Sphered = Sphere<double>;

/// How the receiver is swept around the transmitter.
///
/// `TransmitterCenter` rotates the receiver about the transmitter body center
/// at center distance r_tx + d + r_rx, so the surface gap is d at every angle.
/// `EmissionPoint` rotates about the emission point at distance d + r_rx; it
/// overlaps the body at back angles whenever d + r_rx < 2 r_tx + r_rx.
enum class PivotConvention { TransmitterCenter, EmissionPoint };

inline const char* to_string(PivotConvention pivot) {
  return pivot == PivotConvention::TransmitterCenter ? "transmitter_center"
                                                     : "emission_point";
}

/// Transmitter body, emission point and receiver for one measurement angle.
template <typename Scalar>
struct Topology {
  Vector3<Scalar> emission_point = Vector3<Scalar>::Zero();
  Sphere<Scalar> tx_body;
  Sphere<Scalar> rx;
  Vector3<Scalar> boresight_axis = Vector3<Scalar>::UnitX();
  Scalar angle_deg = Scalar(0);
};

using Topologyd = Topology<double>;

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kSurfaceTolerance = 1e-9;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& v) {
  return v.allFinite();
}

template <typename Scalar>
Scalar degrees_to_radians(Scalar deg) {
  return deg * std::numbers::pi_v<Scalar> / Scalar(180);
}

/// Fixed reference normal spanning the α plane together with the boresight.
/// For a +x boresight this is +y.
template <typename Scalar>
Vector3<Scalar> reference_normal(const Vector3<Scalar>& boresight) {
  Vector3<Scalar> seed = Vector3<Scalar>::UnitY();
  if (std::abs(boresight.dot(seed)) > Scalar(0.9)) seed = Vector3<Scalar>::UnitZ();
  Vector3<Scalar> n = seed - boresight.dot(seed) * boresight;
  return n.normalized();
}

/// Unit direction rotated `alpha_deg` from `boresight` toward `normal`.
template <typename Scalar>
Vector3<Scalar> direction_at(const Vector3<Scalar>& boresight,
                             const Vector3<Scalar>& normal, Scalar alpha_deg) {
  const Scalar a = degrees_to_radians(alpha_deg);
  return std::cos(a) * boresight + std::sin(a) * normal;
}

namespace detail {

template <typename Scalar>
void check_boresight(const Vector3<Scalar>& boresight) {
  if (!all_finite(boresight) || std::abs(boresight.norm() - Scalar(1)) > Scalar(1e-12))
    throw GeometryError("boresight must be a unit vector");
}

template <typename Scalar>
void check_angle(Scalar alpha_deg) {
  if (!(alpha_deg >= Scalar(0) && alpha_deg <= Scalar(180)))
    throw GeometryError("angle must lie in [0, 180] degrees, got " +
                        std::to_string(static_cast<double>(alpha_deg)));
}

}  // namespace detail

/// Receiver sphere whose center is d + r_rx from the emission point,
/// rotated alpha_deg from the boresight toward `normal`.
template <typename Scalar>
Sphere<Scalar> place_receiver(const Vector3<Scalar>& emission_point,
                              const Vector3<Scalar>& boresight, Scalar alpha_deg,
                              Scalar d, Scalar r_rx, const Vector3<Scalar>& normal) {
  detail::check_angle(alpha_deg);
  detail::check_boresight(boresight);
  if (!(d > Scalar(0))) throw GeometryError("distance d must be positive");
  if (!(r_rx > Scalar(0))) throw GeometryError("receiver radius must be positive");
  return {emission_point + (d + r_rx) * direction_at(boresight, normal, alpha_deg), r_rx};
}

template <typename Scalar>
Sphere<Scalar> place_receiver(const Vector3<Scalar>& emission_point,
                              const Vector3<Scalar>& boresight, Scalar alpha_deg,
                              Scalar d, Scalar r_rx) {
  return place_receiver(emission_point, boresight, alpha_deg, d, r_rx,
                        reference_normal(boresight));
}

/// Transmitter body with the emission point on its surface facing α = 0.
template <typename Scalar>
Sphere<Scalar> place_transmitter(const Vector3<Scalar>& emission_point,
                                 const Vector3<Scalar>& boresight, Scalar r_tx) {
  if (!(r_tx >= Scalar(0))) throw GeometryError("transmitter radius must be >= 0");
  return {emission_point - r_tx * boresight, r_tx};
}

/// Receiver keeping a surface-to-surface gap of d to the transmitter body.
/// Reduces to place_receiver when the body has zero radius.
template <typename Scalar>
Sphere<Scalar> place_receiver_around_body(const Sphere<Scalar>& tx_body,
                                          const Vector3<Scalar>& boresight,
                                          Scalar alpha_deg, Scalar d, Scalar r_rx,
                                          const Vector3<Scalar>& normal) {
  detail::check_angle(alpha_deg);
  detail::check_boresight(boresight);
  if (!(d > Scalar(0))) throw GeometryError("distance d must be positive");
  if (!(r_rx > Scalar(0))) throw GeometryError("receiver radius must be positive");
  return {tx_body.center +
              (tx_body.radius + d + r_rx) * direction_at(boresight, normal, alpha_deg),
          r_rx};
}

/// Inputs for building the topology at any angle of a sweep.
template <typename Scalar>
struct Placement {
  Vector3<Scalar> emission_point = Vector3<Scalar>::Zero();
  Vector3<Scalar> boresight = Vector3<Scalar>::UnitX();
  /// Rotation side; negate to mirror the sweep about the boresight.
  Vector3<Scalar> normal = Vector3<Scalar>::UnitY();
  Scalar d = Scalar(2);
  Scalar r_tx = Scalar(0);
  Scalar r_rx = Scalar(5);
  PivotConvention pivot = PivotConvention::TransmitterCenter;
};

using Placementd = Placement<double>;

template <typename Scalar>
Topology<Scalar> make_topology(const Placement<Scalar>& p, Scalar alpha_deg) {
  Topology<Scalar> topo;
  topo.emission_point = p.emission_point;
  topo.boresight_axis = p.boresight;
  topo.angle_deg = alpha_deg;
  topo.tx_body = place_transmitter(p.emission_point, p.boresight, p.r_tx);
  topo.rx = p.pivot == PivotConvention::TransmitterCenter
                ? place_receiver_around_body(topo.tx_body, p.boresight, alpha_deg, p.d,
                                             p.r_rx, p.normal)
                : place_receiver(p.emission_point, p.boresight, alpha_deg, p.d, p.r_rx,
                                 p.normal);
  return topo;
}

/// Throws GeometryError unless the emission point sits on the body surface,
/// the bodies are disjoint, and every coordinate is finite.
template <typename Scalar>
void validate_topology(const Topology<Scalar>& t) {
  if (!all_finite(t.emission_point) || !all_finite(t.tx_body.center) ||
      !all_finite(t.rx.center))
    throw GeometryError("topology has non-finite coordinates");
  if (t.tx_body.radius < Scalar(0) || !(t.rx.radius > Scalar(0)))
    throw GeometryError("invalid sphere radius");
  const Scalar on_surface = (t.emission_point - t.tx_body.center).norm() - t.tx_body.radius;
  if (std::abs(on_surface) > Scalar(kSurfaceTolerance))
    throw GeometryError("emission point is not on the transmitter surface");
  const Scalar gap =
      (t.rx.center - t.tx_body.center).norm() - t.tx_body.radius - t.rx.radius;
  if (!(gap > Scalar(0)))
    throw GeometryError("transmitter and receiver overlap at angle " +
                        std::to_string(static_cast<double>(t.angle_deg)));
  if (!((t.rx.center - t.emission_point).norm() > t.rx.radius))
    throw GeometryError("emission point lies inside the receiver");
}

/// Radial specular reflection off a sphere, rolling back to `prev` when the
/// mirrored point is still not outside (or the radial direction is undefined).
template <typename Scalar>
Vector3<Scalar> reflect_off_sphere(const Vector3<Scalar>& prev,
                                   const Vector3<Scalar>& proposed,
                                   const Sphere<Scalar>& body) {
  const Vector3<Scalar> rel = proposed - body.center;
  const Scalar r = rel.norm();
  if (r >= body.radius) return proposed;
  if (r < Scalar(1e-12)) return prev;
  const Scalar mirrored = Scalar(2) * body.radius - r;
  if (!(mirrored > body.radius)) return prev;
  return body.center + rel * (mirrored / r);
}

}  // namespace mcvd
