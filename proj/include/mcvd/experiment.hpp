#pragma once

#include "mcvd/analytic_channel.hpp"
#include "mcvd/particle_sim.hpp"
#include "mcvd/pattern_metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mcvd {

inline constexpr const char* kVersion = "0.1.0";

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitValidationFailure = 3,
  kExitIoError = 4,
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Where the point-source normalization for gains comes from.
enum class ReferenceMode { Analytic, Simulated };

/// One experiment: a (d, r_tx) grid swept over angles.
struct ExperimentSpec {
  std::string name = "experiment";
  std::vector<double> d_values;     ///< µm
  std::vector<double> r_tx_values;  ///< µm
  std::uint64_t n_molecules = 40000;
  double D = 100.0;
  double r_rx = 5.0;
  double dt = 1e-4;
  std::uint64_t seed = 1;
  /// Defaults to t_end / 1000 per distance.
  std::optional<double> bin_width;
  /// Symbol duration per distance; a single value applies to every d.
  std::vector<double> t_s;
  /// Defaults to d² · 0.1 s/µm².
  std::optional<double> t_end;
  std::vector<double> angles_deg = default_angles();
  std::filesystem::path output_dir = "out";
  int smoothing_window = 11;
  ReferenceMode reference = ReferenceMode::Analytic;
  AbsorptionTest absorption = AbsorptionTest::BrownianBridge;
  PivotConvention pivot = PivotConvention::TransmitterCenter;
  unsigned threads = 1;

  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

/// Default simulated time for a distance, d² · 0.1 s/µm².
double default_t_end(double d);

double t_end_for(const ExperimentSpec& spec, double d);
double t_s_for(const ExperimentSpec& spec, std::size_t d_index);
double bin_width_for(const ExperimentSpec& spec, double d);

/// Parses the flat `key = value` format. Lists are comma separated and
/// `start:step:stop` ranges are accepted for numeric lists; `#` starts a
/// comment. Unknown or duplicate keys raise ConfigError.
ExperimentSpec parse_spec(std::istream& in);
ExperimentSpec load_spec(const std::filesystem::path& path);
std::string format_spec(const ExperimentSpec& spec);

/// fig3, fig4 (alias peak), fig5 (alias hppw), fig6 (alias gain).
std::optional<ExperimentSpec> preset(const std::string& name);
std::vector<std::string> preset_names();

/// Throws ConfigError unless every (d, r_tx, α) yields a valid topology and
/// every t_s fits inside its t_end.
void check_spec(const ExperimentSpec& spec);

/// Base simulation config and placement for one grid point.
SimConfig sim_config_for(const ExperimentSpec& spec, double d, double r_tx);
Placementd placement_for(const ExperimentSpec& spec, double d, double r_tx);

nlohmann::json to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const nlohmann::json& j);

struct GridPointResult {
  double d = 0.0;
  double r_tx = 0.0;
  double t_s = 0.0;
  double t_end = 0.0;
  double point_reference = 0.0;
  std::map<double, HittingHistogram> histograms;
  std::map<double, RunStats> stats;
  PatternMetrics metrics;
  std::map<double, std::string> errors;
  bool ok() const { return errors.empty(); }
};

struct ExperimentResult {
  std::vector<GridPointResult> points;
  std::vector<std::string> warnings;
  nlohmann::json summary;
  int exit_code = kExitOk;
};

/// Optional progress sink (one line per finished angle).
using ProgressFn = std::function<void(const std::string&)>;

/// Runs every grid point and writes hist_*.csv, pattern_*.csv and
/// summary.json into spec.output_dir. Grid points that fail are recorded and
/// skipped; exit_code becomes kExitValidationFailure if any failed.
ExperimentResult run_experiment(const ExperimentSpec& spec, const ProgressFn& progress = {});

// ---------------------------------------------------------------------------
// File formats

inline constexpr const char* kHistogramHeader = "angle_deg,bin_start_s,bin_end_s,count";
inline constexpr const char* kPatternHeader = "angle_deg,counts_at_ts,gain,peak_time_s";

/// Shortest round-trip decimal representation.
std::string format_number(double value);

std::string histogram_file_name(double d, double r_tx);
std::string pattern_file_name(double d, double r_tx);

void write_histogram_csv(std::ostream& out, const std::map<double, HittingHistogram>& by_angle);
std::map<double, HittingHistogram> read_histogram_csv(std::istream& in);

void write_pattern_csv(std::ostream& out, const AngularPattern& pattern,
                       const PatternMetrics& metrics);

/// Recomputes pattern metrics for every hist_*.csv in `dir`, using the
/// configuration stored in dir/summary.json.
struct MetricsRecord {
  double d = 0.0;
  double r_tx = 0.0;
  AngularPattern pattern;
  PatternMetrics metrics;
};
std::vector<MetricsRecord> metrics_from_directory(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Point-source validation against the analytic channel

struct ValidationOptions {
  double d = 2.0;
  std::uint64_t n_molecules = 40000;
  double D = 100.0;
  double r_rx = 5.0;
  double dt = 1e-4;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  int checkpoints = 20;
  AbsorptionTest absorption = AbsorptionTest::BrownianBridge;
  /// Diffusion coefficient used on the analytic side (negative control).
  std::optional<double> analytic_D;
};

struct Checkpoint {
  double t = 0.0;
  double empirical = 0.0;
  double analytic = 0.0;
  double bound = 0.0;
};

struct ValidationReport {
  ValidationOptions options;
  std::vector<Checkpoint> checkpoints;
  double max_deviation = 0.0;
  bool passed = false;
  HittingHistogram histogram;
};

/// Compares the empirical cumulative fraction with f_hit_cumulative at
/// evenly spaced checkpoints in (0, d² · 0.1 s]; each must lie within
/// 4 √(p(1-p)/N).
ValidationReport validate_point_source(const ValidationOptions& options);

nlohmann::json to_json(const ValidationReport& report);

}  // namespace mcvd
