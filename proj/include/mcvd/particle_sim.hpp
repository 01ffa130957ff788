#pragma once

#include "mcvd/geometry.hpp"
#include "mcvd/rng.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcvd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// How a molecule that survives the end-of-step containment test can still
/// be absorbed.
enum class AbsorptionTest {
  /// Absorb only when the step ends inside or on the receiver.
  EndOfStep,
  /// Additionally absorb with the Brownian-bridge probability that the path
  /// touched the receiver during the step, exp(-g0 g1 / (D dt)) for surface
  /// gaps g0, g1 (planar approximation). Removes the O(√dt) undercount of
  /// discretely monitored first passage.
  BrownianBridge,
};

const char* to_string(AbsorptionTest test);
AbsorptionTest absorption_test_from_string(const std::string& name);

struct SimConfig {
  std::uint64_t n_molecules = 40000;
  double D = 100.0;        ///< µm²/s
  double dt = 1e-4;        ///< s
  double t_end = 0.4;      ///< s
  double bin_width = 4e-4; ///< s
  std::uint64_t seed = 1;
  Topologyd topology;
  AbsorptionTest absorption = AbsorptionTest::BrownianBridge;
  /// Merge consecutive steps into one Gaussian move while the molecule is far
  /// from both bodies (see kLeapSigmas).
  bool far_field_leap = true;
  unsigned threads = 1;
};

/// A merged move of m steps is taken only if every boundary is at least
/// kLeapSigmas · √(2 D m dt) away. 6√3 keeps each axis within 6σ of its
/// start over the merged interval except with probability ~1e-8, so skipped
/// boundary contacts are negligible while the end-of-move distribution is
/// exactly that of m separate steps.
inline constexpr double kLeapSigmas = 10.392304845413264;

/// Throws ConfigError on an invalid configuration (including topology).
void validate(const SimConfig& config);

/// Human-readable warnings for configurations that are legal but coarse,
/// e.g. an RMS step longer than a tenth of min(r_rx, d).
std::vector<std::string> config_warnings(const SimConfig& config, double d);

/// Number of Brownian steps taken until t_end.
std::uint64_t step_count(const SimConfig& config);

/// Stable identifier of every field that affects the simulation output.
std::string config_digest(const SimConfig& config);

/// Absorption-time histogram. Bin i covers (i·bin_width, (i+1)·bin_width];
/// the last bin may extend past t_end.
struct HittingHistogram {
  double bin_width = 0.0;
  double t_end = 0.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t total_emitted = 0;
  std::uint64_t total_absorbed = 0;
  std::string config_digest;

  std::size_t bins() const { return counts.size(); }
  double bin_start(std::size_t i) const { return static_cast<double>(i) * bin_width; }
  double bin_end(std::size_t i) const { return static_cast<double>(i + 1) * bin_width; }
  double bin_center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * bin_width; }

  friend bool operator==(const HittingHistogram&, const HittingHistogram&) = default;
};

/// Allocates an empty histogram covering [0, t_end].
HittingHistogram make_histogram(double t_end, double bin_width);

/// Diagnostics collected while running; used by the invariant checks.
struct RunStats {
  std::uint64_t absorbed = 0;
  std::uint64_t survivors = 0;
  /// Smallest end-of-step distance from the transmitter surface
  /// (+inf for a point transmitter).
  double min_tx_clearance = 0.0;
  /// Number of molecules flagged absorbed; must equal `absorbed`.
  std::uint64_t absorbed_flags = 0;
  /// Elapsed dt steps summed over molecules.
  std::uint64_t steps_taken = 0;
  /// Merged far-field moves.
  std::uint64_t leaps = 0;
};

/// One Brownian displacement with per-axis variance 2 D dt.
Vector3d brownian_step(const Vector3d& pos, double D, double dt, RandomStream& rng);

/// Emits config.n_molecules from the emission point and returns the
/// absorption-time histogram. Deterministic in (seed, molecule index) for any
/// thread count.
HittingHistogram run_single(const SimConfig& config, RunStats* stats = nullptr);

/// Sub-seed for one sweep angle.
std::uint64_t angle_seed(std::uint64_t base_seed, double angle_deg);

struct SweepResult {
  std::map<double, HittingHistogram> histograms;
  std::map<double, std::string> errors;
};

/// Runs run_single at every angle, rebuilding the topology from `placement`.
/// A failing angle is recorded in `errors` and does not stop the others.
SweepResult run_sweep(const SimConfig& base, const Placementd& placement,
                      std::span<const double> angles_deg);

/// 0°, 10°, ..., 180°.
std::vector<double> default_angles();

}  // namespace mcvd
