// mcvd: run MCvD propagation-pattern experiments and point-source checks.
//
//   mcvd run <spec-file|preset> [--seed S] [--dt DT] [--out DIR] [--threads T]
//   mcvd validate [--d UM] [--N COUNT]
//   mcvd metrics <histogram-dir> [--format csv|json]

#include "mcvd/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::string format = "json";
};

int report_error(const char* kind, const std::string& message, int code,
                 const std::optional<std::filesystem::path>& dir = std::nullopt) {
  const nlohmann::json record = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
  std::cerr << record.dump() << '\n';
  if (dir) {
    std::error_code ec;
    std::filesystem::create_directories(*dir, ec);
    std::ofstream out(*dir / "error.json");
    if (out) out << record.dump(2) << '\n';
  }
  return code;
}

int cmd_run(const std::string& target, const GlobalOptions& g, bool quiet) {
  mcvd::ExperimentSpec spec;
  std::optional<std::filesystem::path> out_dir = g.out ? std::optional(std::filesystem::path(*g.out))
                                                       : std::nullopt;
  try {
    if (std::filesystem::exists(target)) {
      spec = mcvd::load_spec(target);
    } else if (auto p = mcvd::preset(target)) {
      spec = *p;
    } else {
      throw mcvd::IoError("no spec file or preset named '" + target + "'");
    }
    if (g.seed) spec.seed = *g.seed;
    if (g.dt) spec.dt = *g.dt;
    if (g.out) spec.output_dir = *g.out;
    if (g.threads) spec.threads = *g.threads;
    out_dir = spec.output_dir;
    mcvd::check_spec(spec);
  } catch (const mcvd::IoError& e) {
    return report_error("io", e.what(), mcvd::kExitIoError);
  } catch (const std::exception& e) {
    return report_error("config", e.what(), mcvd::kExitConfigError, out_dir);
  }

  try {
    mcvd::ProgressFn progress;
    if (!quiet) progress = [](const std::string& line) { std::cerr << line << '\n'; };
    const auto result = mcvd::run_experiment(spec, progress);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    if (g.format == "json") {
      std::cout << result.summary.at("metrics").dump(2) << '\n';
    } else {
      std::cout << "d,r_tx,hppw_deg\n";
      for (const auto& p : result.points)
        std::cout << mcvd::format_number(p.d) << ',' << mcvd::format_number(p.r_tx) << ','
                  << mcvd::format_number(p.metrics.hppw_deg) << '\n';
    }
    if (result.exit_code != mcvd::kExitOk)
      return report_error("validation", "one or more grid points failed; see summary.json",
                          result.exit_code, spec.output_dir);
    return mcvd::kExitOk;
  } catch (const mcvd::IoError& e) {
    return report_error("io", e.what(), mcvd::kExitIoError);
  } catch (const mcvd::ConfigError& e) {
    return report_error("config", e.what(), mcvd::kExitConfigError, spec.output_dir);
  }
}

int cmd_validate(mcvd::ValidationOptions opts, const GlobalOptions& g) {
  if (g.seed) opts.seed = *g.seed;
  if (g.dt) opts.dt = *g.dt;
  if (g.threads) opts.threads = *g.threads;
  mcvd::ValidationReport report;
  try {
    report = mcvd::validate_point_source(opts);
  } catch (const std::exception& e) {
    return report_error("config", e.what(), mcvd::kExitConfigError);
  }
  const auto j = mcvd::to_json(report);
  if (g.out) {
    std::error_code ec;
    std::filesystem::create_directories(*g.out, ec);
    std::ofstream out(std::filesystem::path(*g.out) / "validation.json");
    out << j.dump(2) << '\n';
    if (!out) return report_error("io", "cannot write validation.json", mcvd::kExitIoError);
  }
  if (g.format == "json") {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "t_s,empirical,analytic,bound\n";
    for (const auto& cp : report.checkpoints)
      std::cout << mcvd::format_number(cp.t) << ',' << mcvd::format_number(cp.empirical) << ','
                << mcvd::format_number(cp.analytic) << ',' << mcvd::format_number(cp.bound)
                << '\n';
  }
  std::cerr << (report.passed ? "PASS" : "FAIL")
            << " max deviation = " << report.max_deviation << '\n';
  return report.passed ? mcvd::kExitOk : mcvd::kExitValidationFailure;
}

int cmd_metrics(const std::string& dir, const GlobalOptions& g) {
  std::vector<mcvd::MetricsRecord> records;
  try {
    records = mcvd::metrics_from_directory(dir);
  } catch (const mcvd::IoError& e) {
    return report_error("io", e.what(), mcvd::kExitIoError);
  } catch (const std::exception& e) {
    return report_error("config", e.what(), mcvd::kExitConfigError);
  }
  if (g.format == "json") {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : records) {
      nlohmann::json gains = nlohmann::json::object();
      nlohmann::json peaks = nlohmann::json::object();
      for (const auto& [a, v] : r.metrics.gain_by_angle) gains[mcvd::format_number(a)] = v;
      for (const auto& [a, v] : r.metrics.peak_time_by_angle) peaks[mcvd::format_number(a)] = v;
      out.push_back({{"d", r.d},
                     {"r_tx", r.r_tx},
                     {"hppw_deg", r.metrics.hppw_deg},
                     {"hppw_crossed", r.metrics.hppw_crossed},
                     {"gain_by_angle", gains},
                     {"peak_time_by_angle", peaks},
                     {"smoothing_window", r.metrics.smoothing_window}});
    }
    std::cout << out.dump(2) << '\n';
  } else {
    for (const auto& r : records) {
      std::cout << "# d=" << mcvd::format_number(r.d) << " r_tx=" << mcvd::format_number(r.r_tx)
                << " hppw_deg=" << mcvd::format_number(r.metrics.hppw_deg) << '\n';
      mcvd::write_pattern_csv(std::cout, r.pattern, r.metrics);
    }
  }
  return mcvd::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Molecular communication via diffusion: propagation-pattern simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mcvd::kVersion);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Base random seed");
  app.add_option("--dt", g.dt, "Time step, s")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads (0 = hardware concurrency)");
  app.add_option("--format", g.format, "Console output format")
      ->check(CLI::IsMember({"csv", "json"}));

  std::string target;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run an experiment from a spec file or preset "
                                        "(fig3, fig4/peak, fig5/hppw, fig6/gain)");
  run->add_option("spec", target, "Spec file path or preset name")->required();
  run->add_flag("--quiet", quiet, "Suppress progress output");
  run->fallthrough();

  mcvd::ValidationOptions vopts;
  auto* validate = app.add_subcommand("validate", "Compare a point-source run with the analytic channel");
  validate->add_option("--d", vopts.d, "Distance to receiver surface, um");
  validate->add_option("--N", vopts.n_molecules, "Emitted molecules");
  validate->add_option("--D", vopts.D, "Diffusion coefficient, um^2/s");
  validate->add_option("--analytic-D", vopts.analytic_D,
                       "Diffusion coefficient for the analytic side only (negative control)");
  validate->fallthrough();

  std::string hist_dir;
  auto* metrics = app.add_subcommand("metrics", "Recompute pattern metrics from histogram CSVs");
  metrics->add_option("dir", hist_dir, "Directory with hist_*.csv and summary.json")->required();
  metrics->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mcvd::kExitConfigError;
  }

  if (*run) return cmd_run(target, g, quiet);
  if (*validate) return cmd_validate(vopts, g);
  return cmd_metrics(hist_dir, g);
}
