#include "mcvd/experiment.hpp"

#include <algorithm>
#include <cmath>

namespace mcvd {

ValidationReport validate_point_source(const ValidationOptions& o) {
  if (o.checkpoints < 1) throw ConfigError("need at least one checkpoint");
  const double t_end = default_t_end(o.d);

  Placementd placement;
  placement.d = o.d;
  placement.r_rx = o.r_rx;
  placement.r_tx = 0.0;

  SimConfig c;
  c.n_molecules = o.n_molecules;
  c.D = o.D;
  c.dt = o.dt;
  c.t_end = t_end;
  c.bin_width = t_end / 1000.0;
  c.seed = o.seed;
  c.threads = o.threads;
  c.absorption = o.absorption;
  try {
    c.topology = make_topology(placement, 0.0);
  } catch (const GeometryError& e) {
    throw ConfigError(e.what());
  }

  ValidationReport report;
  report.options = o;
  report.histogram = run_single(c);

  const ChannelParams channel{o.analytic_D.value_or(o.D), o.d, o.r_rx};
  validate(channel);
  const auto n = static_cast<double>(o.n_molecules);
  report.passed = true;
  for (int k = 1; k <= o.checkpoints; ++k) {
    Checkpoint cp;
    cp.t = t_end * k / o.checkpoints;
    cp.empirical = counts_until(report.histogram, cp.t) / n;
    cp.analytic = f_hit_cumulative(channel, cp.t);
    cp.bound = 4.0 * std::sqrt(cp.analytic * (1.0 - cp.analytic) / n);
    const double dev = std::abs(cp.empirical - cp.analytic);
    report.max_deviation = std::max(report.max_deviation, dev);
    if (!(dev <= cp.bound)) report.passed = false;
    report.checkpoints.push_back(cp);
  }
  return report;
}

nlohmann::json to_json(const ValidationReport& r) {
  nlohmann::json j;
  j["d"] = r.options.d;
  j["N"] = r.options.n_molecules;
  j["D"] = r.options.D;
  j["r_rx"] = r.options.r_rx;
  j["dt"] = r.options.dt;
  j["seed"] = r.options.seed;
  j["absorption"] = to_string(r.options.absorption);
  if (r.options.analytic_D) j["analytic_D"] = *r.options.analytic_D;
  j["max_deviation"] = r.max_deviation;
  j["passed"] = r.passed;
  nlohmann::json cps = nlohmann::json::array();
  for (const auto& cp : r.checkpoints)
    cps.push_back({{"t", cp.t},
                   {"empirical", cp.empirical},
                   {"analytic", cp.analytic},
                   {"bound", cp.bound}});
  j["checkpoints"] = cps;
  j["version"] = kVersion;
  return j;
}

}  // namespace mcvd
