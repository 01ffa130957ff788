#pragma once

#include "mcvd/particle_sim.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace mcvd {

/// Received counts at the symbol time for each sampled angle.
struct AngularPattern {
  std::vector<double> angles_deg;    ///< strictly increasing, within [0, 180]
  std::vector<double> counts_at_ts;  ///< N^rx_sph(α, t_s)
  double t_s = 0.0;
  double point_reference = 0.0;      ///< angle-independent point-source count
};

/// Returned by compute_hppw when the pattern never drops to half power.
inline constexpr double kNoHalfPowerCrossing = 360.0;

struct PatternMetrics {
  double hppw_deg = kNoHalfPowerCrossing;
  bool hppw_crossed = false;
  std::map<double, double> gain_by_angle;
  std::map<double, double> peak_time_by_angle;
  int smoothing_window = 11;
};

/// Absorptions up to t_s, interpolating linearly inside the straddling bin.
/// Throws std::domain_error when t_s is negative or beyond h.t_end.
double counts_until(const HittingHistogram& h, double t_s);

/// Throws std::invalid_argument if the angles are not strictly increasing in
/// [0, 180] or any count is negative or non-finite.
void validate(const AngularPattern& p);

/// Twice the first angle (scanning out from boresight) at which the pattern
/// falls to half its boresight value; kNoHalfPowerCrossing if it never does.
double compute_hppw(const AngularPattern& p);

/// One-sigma uncertainty of compute_hppw from binomial count noise, propagated
/// through the interpolation. Zero when there is no crossing.
double hppw_sigma(const AngularPattern& p, std::uint64_t n_emitted);

/// counts_at_ts(α) / point_reference for every angle.
std::map<double, double> compute_gain(const AngularPattern& p);

/// Bin-center time of the maximum of the centered moving average; ties go to
/// the earliest bin. Edge bins average over the in-range part of the window.
double compute_peak_time(const HittingHistogram& h, int smoothing_window);

/// Poisson-bootstrap standard deviation of compute_peak_time.
double peak_time_sigma(const HittingHistogram& h, int smoothing_window, int replicates,
                       std::uint64_t seed);

/// Builds the pattern at t_s from per-angle histograms.
AngularPattern make_pattern(const std::map<double, HittingHistogram>& by_angle, double t_s,
                            double point_reference);

/// All three metrics for one configuration. Gains are skipped when the
/// reference is not positive; HPPW needs the 0° sample.
PatternMetrics compute_pattern_metrics(const std::map<double, HittingHistogram>& by_angle,
                                       double t_s, double point_reference,
                                       int smoothing_window);

}  // namespace mcvd
