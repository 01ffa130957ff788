#include "mcvd/analytic_channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mcvd {

void validate(const ChannelParams& p) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(p.D)) throw std::invalid_argument("diffusion coefficient must be positive");
  if (!positive(p.d)) throw std::invalid_argument("distance d must be positive");
  if (!positive(p.r_rx)) throw std::invalid_argument("receiver radius must be positive");
}

double f_hit_limit(const ChannelParams& p) { return p.r_rx / (p.d + p.r_rx); }

double f_hit_cumulative(const ChannelParams& p, double t) {
  if (!(t >= 0.0)) throw std::domain_error("f_hit_cumulative: t must be >= 0");
  if (t == 0.0) return 0.0;
  if (std::isinf(t)) return f_hit_limit(p);
  return f_hit_limit(p) * std::erfc(p.d / std::sqrt(4.0 * p.D * t));
}

double f_hit_cumulative_phi(const ChannelParams& p, double t) {
  if (!(t >= 0.0)) throw std::domain_error("f_hit_cumulative_phi: t must be >= 0");
  if (t == 0.0) return 0.0;
  // Φ(x) = ½ erfc(-x/√2)
  const double x = -p.d / std::sqrt(2.0 * p.D * t);
  const double phi = 0.5 * std::erfc(-x / std::numbers::sqrt2);
  return 2.0 * f_hit_limit(p) * phi;
}

double f_hit_rate(const ChannelParams& p, double t) {
  if (!(t > 0.0)) throw std::domain_error("f_hit_rate: t must be > 0");
  if (std::isinf(t)) return 0.0;
  const double gauss = std::exp(-p.d * p.d / (4.0 * p.D * t));
  return f_hit_limit(p) * p.d / std::sqrt(4.0 * std::numbers::pi * p.D * t * t * t) * gauss;
}

double analytic_peak_time(const ChannelParams& p) { return p.d * p.d / (6.0 * p.D); }

double expected_hits(const ChannelParams& p, std::uint64_t n_emitted, double t) {
  return static_cast<double>(n_emitted) * f_hit_cumulative(p, t);
}

}  // namespace mcvd
