#include "mcvd/pattern_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>

namespace mcvd {

double counts_until(const HittingHistogram& h, double t_s) {
  if (!(t_s >= 0.0)) throw std::domain_error("counts_until: t_s must be >= 0");
  if (t_s > h.t_end * (1.0 + 1e-12))
    throw std::domain_error("counts_until: t_s beyond the simulated duration");
  const double pos = t_s / h.bin_width;
  auto full = static_cast<std::size_t>(std::floor(pos + 1e-9));
  full = std::min(full, h.bins());
  double total = 0.0;
  for (std::size_t i = 0; i < full; ++i) total += static_cast<double>(h.counts[i]);
  const double frac = pos - static_cast<double>(full);
  if (full < h.bins() && frac > 1e-9) total += frac * static_cast<double>(h.counts[full]);
  return total;
}

void validate(const AngularPattern& p) {
  if (p.angles_deg.size() != p.counts_at_ts.size())
    throw std::invalid_argument("pattern: angle and count lists differ in length");
  for (std::size_t i = 0; i < p.angles_deg.size(); ++i) {
    const double a = p.angles_deg[i];
    if (!(a >= 0.0 && a <= 180.0)) throw std::invalid_argument("pattern: angle outside [0, 180]");
    if (i > 0 && !(a > p.angles_deg[i - 1]))
      throw std::invalid_argument("pattern: angles must be strictly increasing");
    const double c = p.counts_at_ts[i];
    if (!std::isfinite(c) || c < 0.0) throw std::invalid_argument("pattern: invalid count");
  }
}

namespace {

struct Crossing {
  std::size_t hi = 0;  // first sample at or below half power
  double alpha = 0.0;
};

std::optional<Crossing> find_half_power(const AngularPattern& p) {
  validate(p);
  if (p.angles_deg.empty() || p.angles_deg.front() != 0.0)
    throw std::invalid_argument("hppw: pattern has no 0 degree sample");
  const double n0 = p.counts_at_ts.front();
  if (!(n0 > 0.0)) throw std::invalid_argument("hppw: zero counts at boresight");
  const double half = 0.5 * n0;
  for (std::size_t i = 1; i < p.angles_deg.size(); ++i) {
    const double n = p.counts_at_ts[i];
    if (n > half) continue;
    const double n_prev = p.counts_at_ts[i - 1];
    const double a_prev = p.angles_deg[i - 1];
    const double alpha =
        a_prev + (n_prev - half) / (n_prev - n) * (p.angles_deg[i] - a_prev);
    return Crossing{i, alpha};
  }
  return std::nullopt;
}

}  // namespace

double compute_hppw(const AngularPattern& p) {
  const auto crossing = find_half_power(p);
  return crossing ? 2.0 * crossing->alpha : kNoHalfPowerCrossing;
}

double hppw_sigma(const AngularPattern& p, std::uint64_t n_emitted) {
  const auto crossing = find_half_power(p);
  if (!crossing) return 0.0;
  const auto n = static_cast<double>(n_emitted);
  auto var = [n](double count) { return count * std::max(0.0, 1.0 - count / n); };
  const std::size_t hi = crossing->hi;
  const double n0 = p.counts_at_ts.front();
  const double a = p.counts_at_ts[hi - 1];
  const double b = p.counts_at_ts[hi];
  const double width = p.angles_deg[hi] - p.angles_deg[hi - 1];
  // α* = α_lo + (a - n0/2) / (a - b) · width
  const double denom = a - b;
  const double d_n0 = -0.5 / denom * width;
  const double d_a = (denom - (a - 0.5 * n0)) / (denom * denom) * width;
  const double d_b = (a - 0.5 * n0) / (denom * denom) * width;
  double variance = d_a * d_a * var(a) + d_b * d_b * var(b);
  if (hi - 1 == 0) {
    // a and n0 are the same sample
    const double d = d_a + d_n0;
    variance = d * d * var(a) + d_b * d_b * var(b);
  } else {
    variance += d_n0 * d_n0 * var(n0);
  }
  return 2.0 * std::sqrt(variance);
}

std::map<double, double> compute_gain(const AngularPattern& p) {
  validate(p);
  if (!(p.point_reference > 0.0))
    throw std::invalid_argument("gain: point-source reference must be positive");
  std::map<double, double> gains;
  for (std::size_t i = 0; i < p.angles_deg.size(); ++i)
    gains.emplace(p.angles_deg[i], p.counts_at_ts[i] / p.point_reference);
  return gains;
}

namespace {

std::size_t smoothed_argmax(const std::vector<double>& counts, int window) {
  const auto n = static_cast<std::ptrdiff_t>(counts.size());
  const std::ptrdiff_t half = window / 2;
  std::vector<double> prefix(counts.size() + 1, 0.0);
  for (std::size_t i = 0; i < counts.size(); ++i) prefix[i + 1] = prefix[i] + counts[i];
  std::size_t best = 0;
  double best_value = -1.0;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, i + half + 1);
    const double mean = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    if (mean > best_value) {
      best_value = mean;
      best = static_cast<std::size_t>(i);
    }
  }
  return best;
}

void check_window(int window) {
  if (window < 1 || window % 2 == 0)
    throw std::invalid_argument("smoothing window must be odd and >= 1");
}

}  // namespace

double compute_peak_time(const HittingHistogram& h, int smoothing_window) {
  check_window(smoothing_window);
  if (h.total_absorbed == 0 || h.counts.empty())
    throw std::invalid_argument("peak time: histogram has no absorptions");
  std::vector<double> counts(h.counts.begin(), h.counts.end());
  return h.bin_center(smoothed_argmax(counts, smoothing_window));
}

double peak_time_sigma(const HittingHistogram& h, int smoothing_window, int replicates,
                       std::uint64_t seed) {
  check_window(smoothing_window);
  if (h.total_absorbed == 0) throw std::invalid_argument("peak time: empty histogram");
  if (replicates < 2) throw std::invalid_argument("peak time: need >= 2 replicates");
  std::mt19937_64 engine(seed);
  std::vector<double> resampled(h.bins());
  double sum = 0.0;
  double sum2 = 0.0;
  for (int r = 0; r < replicates; ++r) {
    for (std::size_t i = 0; i < h.bins(); ++i) {
      const auto c = static_cast<double>(h.counts[i]);
      resampled[i] = c > 0.0 ? static_cast<double>(std::poisson_distribution<long>(c)(engine))
                             : 0.0;
    }
    const double t = h.bin_center(smoothed_argmax(resampled, smoothing_window));
    sum += t;
    sum2 += t * t;
  }
  const double mean = sum / replicates;
  return std::sqrt(std::max(0.0, (sum2 - replicates * mean * mean) / (replicates - 1)));
}

AngularPattern make_pattern(const std::map<double, HittingHistogram>& by_angle, double t_s,
                            double point_reference) {
  AngularPattern p;
  p.t_s = t_s;
  p.point_reference = point_reference;
  for (const auto& [angle, hist] : by_angle) {
    p.angles_deg.push_back(angle);
    p.counts_at_ts.push_back(counts_until(hist, t_s));
  }
  return p;
}

PatternMetrics compute_pattern_metrics(const std::map<double, HittingHistogram>& by_angle,
                                       double t_s, double point_reference,
                                       int smoothing_window) {
  PatternMetrics m;
  m.smoothing_window = smoothing_window;
  const AngularPattern p = make_pattern(by_angle, t_s, point_reference);
  if (!p.angles_deg.empty() && p.angles_deg.front() == 0.0 && p.counts_at_ts.front() > 0.0) {
    m.hppw_deg = compute_hppw(p);
    m.hppw_crossed = m.hppw_deg != kNoHalfPowerCrossing;
  }
  if (point_reference > 0.0) m.gain_by_angle = compute_gain(p);
  for (const auto& [angle, hist] : by_angle) {
    if (hist.total_absorbed > 0)
      m.peak_time_by_angle.emplace(angle, compute_peak_time(hist, smoothing_window));
  }
  return m;
}

}  // namespace mcvd
