#include "mcvd/particle_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

namespace mcvd {

const char* to_string(AbsorptionTest test) {
  return test == AbsorptionTest::EndOfStep ? "end_of_step" : "brownian_bridge";
}

AbsorptionTest absorption_test_from_string(const std::string& name) {
  if (name == "end_of_step") return AbsorptionTest::EndOfStep;
  if (name == "brownian_bridge") return AbsorptionTest::BrownianBridge;
  throw ConfigError("unknown absorption test '" + name + "'");
}

void validate(const SimConfig& c) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (c.n_molecules < 1) throw ConfigError("N must be >= 1");
  if (!positive(c.D)) throw ConfigError("D must be positive");
  if (!positive(c.dt)) throw ConfigError("dt must be positive");
  if (!positive(c.t_end) || c.dt > c.t_end) throw ConfigError("need 0 < dt <= t_end");
  if (!positive(c.bin_width)) throw ConfigError("bin_width must be positive");
  try {
    validate_topology(c.topology);
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("invalid topology: ") + e.what());
  }
}

std::vector<std::string> config_warnings(const SimConfig& c, double d) {
  std::vector<std::string> out;
  const double rms = std::sqrt(2.0 * c.D * c.dt);
  const double scale = std::min(c.topology.rx.radius, d) / 10.0;
  if (rms > scale) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "RMS step %.4g um exceeds min(r_rx, d)/10 = %.4g um; boundary "
                  "crossings may be missed",
                  rms, scale);
    out.emplace_back(buf);
  }
  return out;
}

std::uint64_t step_count(const SimConfig& c) {
  return static_cast<std::uint64_t>(std::ceil(c.t_end / c.dt - 1e-9));
}

std::string config_digest(const SimConfig& c) {
  std::uint64_t h = 0x6D637664ull;
  auto feed = [&h](std::uint64_t v) { h = mix64(h ^ v); };
  auto feed_d = [&feed](double v) { feed(std::bit_cast<std::uint64_t>(v)); };
  feed(c.n_molecules);
  feed_d(c.D);
  feed_d(c.dt);
  feed_d(c.t_end);
  feed_d(c.bin_width);
  feed(c.seed);
  feed(static_cast<std::uint64_t>(c.absorption));
  feed(c.far_field_leap ? 1 : 0);
  const auto& t = c.topology;
  for (int i = 0; i < 3; ++i) {
    feed_d(t.emission_point[i]);
    feed_d(t.tx_body.center[i]);
    feed_d(t.rx.center[i]);
  }
  feed_d(t.tx_body.radius);
  feed_d(t.rx.radius);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

HittingHistogram make_histogram(double t_end, double bin_width) {
  HittingHistogram h;
  h.bin_width = bin_width;
  h.t_end = t_end;
  const auto n = static_cast<std::size_t>(std::ceil(t_end / bin_width - 1e-9));
  h.counts.assign(std::max<std::size_t>(n, 1), 0);
  return h;
}

Vector3d brownian_step(const Vector3d& pos, double D, double dt, RandomStream& rng) {
  const double sigma = std::sqrt(2.0 * D * dt);
  const double dx = rng.normal();
  const double dy = rng.normal();
  const double dz = rng.normal();
  return pos + sigma * Vector3d(dx, dy, dz);
}

namespace {

struct WorkerResult {
  std::vector<std::uint64_t> counts;
  RunStats stats;
};

/// Simulates molecules [first, last) into `out`.
void simulate_range(const SimConfig& c, std::uint64_t first, std::uint64_t last,
                    WorkerResult& out) {
  const auto& topo = c.topology;
  const bool has_body = topo.tx_body.radius > 0.0;
  const double rx_r = topo.rx.radius;
  const double tx_r = topo.tx_body.radius;
  const double rx_r2 = rx_r * rx_r;
  const double sigma = std::sqrt(2.0 * c.D * c.dt);
  const double inv_D_dt = 1.0 / (c.D * c.dt);
  const bool bridge = c.absorption == AbsorptionTest::BrownianBridge;
  // Beyond this gap product the crossing probability is below e^-40.
  const double bridge_cutoff = 40.0 * c.D * c.dt;
  const double near_r = rx_r + 8.0 * sigma;
  const double near_r2 = near_r * near_r;
  // A leap of m steps needs a gap of at least kLeapSigmas * sigma * sqrt(m).
  const double leap_unit = kLeapSigmas * sigma;
  const double min_leap_gap = leap_unit * std::sqrt(2.0);
  const double leap_rx_r2 = (rx_r + min_leap_gap) * (rx_r + min_leap_gap);
  const double leap_tx_r2 = (tx_r + min_leap_gap) * (tx_r + min_leap_gap);
  const std::uint64_t n_steps = step_count(c);
  const std::size_t n_bins = out.counts.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  double min_tx_d2 = kInf;

  for (std::uint64_t m = first; m < last; ++m) {
    RandomStream rng(c.seed, m);
    Vector3d pos = topo.emission_point;
    double rx_d2 = (pos - topo.rx.center).squaredNorm();
    double tx_d2 = has_body ? (pos - topo.tx_body.center).squaredNorm() : kInf;
    double prev_gap = std::sqrt(rx_d2) - rx_r;
    bool absorbed = false;
    std::uint64_t done = 0;
    while (done < n_steps) {
      std::uint64_t stride = 1;
      if (c.far_field_leap && rx_d2 > leap_rx_r2 && tx_d2 > leap_tx_r2) {
        const double gap =
            std::min(std::sqrt(rx_d2) - rx_r, has_body ? std::sqrt(tx_d2) - tx_r : kInf);
        const double ratio = gap / leap_unit;
        stride = std::clamp<std::uint64_t>(static_cast<std::uint64_t>(ratio * ratio), 1,
                                           n_steps - done);
      }
      const Vector3d prev = pos;
      pos = brownian_step(pos, c.D, static_cast<double>(stride) * c.dt, rng);
      done += stride;
      if (stride > 1) ++out.stats.leaps;
      if (has_body) {
        pos = reflect_off_sphere(prev, pos, topo.tx_body);
        tx_d2 = (pos - topo.tx_body.center).squaredNorm();
        min_tx_d2 = std::min(min_tx_d2, tx_d2);
      }
      rx_d2 = (pos - topo.rx.center).squaredNorm();
      if (rx_d2 <= rx_r2) {
        absorbed = true;
      } else if (bridge && rx_d2 < near_r2) {
        const double gap = std::sqrt(rx_d2) - rx_r;
        const double prod = stride == 1 ? prev_gap * gap : kInf;
        if (prod < bridge_cutoff && rng.uniform() < std::exp(-prod * inv_D_dt))
          absorbed = true;
        prev_gap = gap;
      } else {
        // Far from the receiver; a crossing on the next step is negligible.
        prev_gap = kInf;
      }
      if (absorbed) break;
    }
    out.stats.steps_taken += done;
    if (absorbed) {
      const double t = static_cast<double>(done) * c.dt;
      auto bin = static_cast<std::int64_t>(std::ceil(t / c.bin_width - 1e-9)) - 1;
      bin = std::clamp<std::int64_t>(bin, 0, static_cast<std::int64_t>(n_bins) - 1);
      ++out.counts[static_cast<std::size_t>(bin)];
      ++out.stats.absorbed;
      ++out.stats.absorbed_flags;
    } else {
      ++out.stats.survivors;
    }
  }
  out.stats.min_tx_clearance = has_body ? std::sqrt(min_tx_d2) - tx_r : kInf;
}

}  // namespace

HittingHistogram run_single(const SimConfig& config, RunStats* stats) {
  validate(config);
  HittingHistogram hist = make_histogram(config.t_end, config.bin_width);
  hist.total_emitted = config.n_molecules;
  hist.config_digest = config_digest(config);

  const std::uint64_t n = config.n_molecules;
  const unsigned workers = static_cast<unsigned>(
      std::clamp<std::uint64_t>(config.threads == 0 ? std::thread::hardware_concurrency()
                                                    : config.threads,
                                1, n));
  std::vector<WorkerResult> parts(workers);
  for (auto& p : parts) p.counts.assign(hist.counts.size(), 0);

  auto range_of = [&](unsigned w) {
    return std::pair{n * w / workers, n * (w + 1) / workers};
  };
  if (workers == 1) {
    simulate_range(config, 0, n, parts[0]);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        const auto [first, last] = range_of(w);
        simulate_range(config, first, last, parts[w]);
      });
    }
  }

  RunStats total;
  total.min_tx_clearance = std::numeric_limits<double>::infinity();
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < hist.counts.size(); ++i) hist.counts[i] += p.counts[i];
    total.absorbed += p.stats.absorbed;
    total.survivors += p.stats.survivors;
    total.absorbed_flags += p.stats.absorbed_flags;
    total.steps_taken += p.stats.steps_taken;
    total.leaps += p.stats.leaps;
    total.min_tx_clearance = std::min(total.min_tx_clearance, p.stats.min_tx_clearance);
  }
  hist.total_absorbed = total.absorbed;
  if (total.absorbed + total.survivors != n)
    throw std::logic_error("molecule conservation violated");
  if (stats) *stats = total;
  return hist;
}

std::uint64_t angle_seed(std::uint64_t base_seed, double angle_deg) {
  return mix64(base_seed ^ mix64(std::bit_cast<std::uint64_t>(angle_deg)));
}

SweepResult run_sweep(const SimConfig& base, const Placementd& placement,
                      std::span<const double> angles_deg) {
  SweepResult result;
  for (const double alpha : angles_deg) {
    try {
      SimConfig c = base;
      c.topology = make_topology(placement, alpha);
      c.seed = angle_seed(base.seed, alpha);
      result.histograms.emplace(alpha, run_single(c));
    } catch (const std::exception& e) {
      result.errors.emplace(alpha, e.what());
    }
  }
  return result;
}

std::vector<double> default_angles() {
  std::vector<double> angles;
  for (int a = 0; a <= 180; a += 10) angles.push_back(a);
  return angles;
}

}  // namespace mcvd
