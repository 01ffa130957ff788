#pragma once

#include <cstdint>

namespace mcvd {

/// Point source in free space next to a perfectly absorbing sphere.
struct ChannelParams {
  double D = 100.0;   ///< diffusion coefficient, µm²/s
  double d = 2.0;     ///< emission point to receiver surface, µm
  double r_rx = 5.0;  ///< receiver radius, µm
};

/// Throws std::invalid_argument unless D, d and r_rx are positive and finite.
void validate(const ChannelParams& p);

/// Asymptotic absorbed fraction r_rx / (d + r_rx).
double f_hit_limit(const ChannelParams& p);

/// Fraction of emitted molecules absorbed by time t (erfc form).
/// Throws std::domain_error for t < 0.
double f_hit_cumulative(const ChannelParams& p, double t);

/// Same quantity through the standard normal cdf, 2 r/(d+r) Φ(-d/√(2Dt)).
double f_hit_cumulative_phi(const ChannelParams& p, double t);

/// Time derivative of f_hit_cumulative, 1/s. Throws std::domain_error for t <= 0.
double f_hit_rate(const ChannelParams& p, double t);

/// Maximizer of f_hit_rate: d² / (6 D).
double analytic_peak_time(const ChannelParams& p);

/// N · f_hit_cumulative(p, t).
double expected_hits(const ChannelParams& p, std::uint64_t n_emitted, double t);

}  // namespace mcvd
