#include "mcvd/experiment.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace mcvd {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: '" + text + "'");
  }
}

std::uint64_t parse_count(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    if (!text.empty() && text.front() == '-') throw std::invalid_argument(text);
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a non-negative integer: '" + text + "'");
  }
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (item.find(':') != std::string::npos) {
      std::stringstream range(item);
      std::string a, b, c;
      if (!std::getline(range, a, ':') || !std::getline(range, b, ':') ||
          !std::getline(range, c, ':'))
        throw ConfigError("key '" + key + "': range must be start:step:stop");
      const double start = parse_double(trim(a), key);
      const double step = parse_double(trim(b), key);
      const double stop = parse_double(trim(c), key);
      if (!(step > 0.0) || stop < start)
        throw ConfigError("key '" + key + "': empty or non-increasing range");
      const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
      for (long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    } else {
      out.push_back(parse_double(item, key));
    }
  }
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_number(values[i]);
  }
  return out;
}

const char* to_string(ReferenceMode mode) {
  return mode == ReferenceMode::Analytic ? "analytic" : "simulated";
}

ReferenceMode reference_from_string(const std::string& s) {
  if (s == "analytic") return ReferenceMode::Analytic;
  if (s == "simulated") return ReferenceMode::Simulated;
  throw ConfigError("unknown reference mode '" + s + "'");
}

PivotConvention pivot_from_string(const std::string& s) {
  if (s == "transmitter_center") return PivotConvention::TransmitterCenter;
  if (s == "emission_point") return PivotConvention::EmissionPoint;
  throw ConfigError("unknown pivot convention '" + s + "'");
}

std::uint64_t reference_seed(std::uint64_t seed, double d) {
  return mix64(seed ^ mix64(std::bit_cast<std::uint64_t>(d)) ^ 0x7265666572656e63ull);
}

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json angle_map_json(const std::map<double, double>& values) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [angle, v] : values) j[format_number(angle)] = v;
  return j;
}

}  // namespace

double default_t_end(double d) { return d * d * 0.1; }

double t_end_for(const ExperimentSpec& spec, double d) {
  return spec.t_end ? *spec.t_end : default_t_end(d);
}

double t_s_for(const ExperimentSpec& spec, std::size_t d_index) {
  if (spec.t_s.size() == 1) return spec.t_s.front();
  if (d_index >= spec.t_s.size()) throw ConfigError("missing t_s for distance index");
  return spec.t_s[d_index];
}

double bin_width_for(const ExperimentSpec& spec, double d) {
  return spec.bin_width ? *spec.bin_width : t_end_for(spec, d) / 1000.0;
}

ExperimentSpec parse_spec(std::istream& in) {
  ExperimentSpec spec;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");

    if (key == "name") spec.name = value;
    else if (key == "d") spec.d_values = parse_list(value, key);
    else if (key == "r_tx") spec.r_tx_values = parse_list(value, key);
    else if (key == "N") spec.n_molecules = parse_count(value, key);
    else if (key == "D") spec.D = parse_double(value, key);
    else if (key == "r_rx") spec.r_rx = parse_double(value, key);
    else if (key == "dt") spec.dt = parse_double(value, key);
    else if (key == "seed") spec.seed = parse_count(value, key);
    else if (key == "bin_width") spec.bin_width = parse_double(value, key);
    else if (key == "t_s") spec.t_s = parse_list(value, key);
    else if (key == "t_end") spec.t_end = parse_double(value, key);
    else if (key == "angles") spec.angles_deg = parse_list(value, key);
    else if (key == "output_dir") spec.output_dir = value;
    else if (key == "smoothing_window")
      spec.smoothing_window = static_cast<int>(parse_count(value, key));
    else if (key == "reference") spec.reference = reference_from_string(value);
    else if (key == "absorption") spec.absorption = absorption_test_from_string(value);
    else if (key == "pivot") spec.pivot = pivot_from_string(value);
    else if (key == "threads") spec.threads = static_cast<unsigned>(parse_count(value, key));
    else
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spec file " + path.string());
  return parse_spec(in);
}

std::string format_spec(const ExperimentSpec& s) {
  std::ostringstream out;
  out << "name = " << s.name << '\n'
      << "d = " << join(s.d_values) << '\n'
      << "r_tx = " << join(s.r_tx_values) << '\n'
      << "N = " << s.n_molecules << '\n'
      << "D = " << format_number(s.D) << '\n'
      << "r_rx = " << format_number(s.r_rx) << '\n'
      << "dt = " << format_number(s.dt) << '\n'
      << "seed = " << s.seed << '\n';
  if (s.bin_width) out << "bin_width = " << format_number(*s.bin_width) << '\n';
  out << "t_s = " << join(s.t_s) << '\n';
  if (s.t_end) out << "t_end = " << format_number(*s.t_end) << '\n';
  out << "angles = " << join(s.angles_deg) << '\n'
      << "output_dir = " << s.output_dir.string() << '\n'
      << "smoothing_window = " << s.smoothing_window << '\n'
      << "reference = " << to_string(s.reference) << '\n'
      << "absorption = " << to_string(s.absorption) << '\n'
      << "pivot = " << to_string(s.pivot) << '\n'
      << "threads = " << s.threads << '\n';
  return out.str();
}

std::optional<ExperimentSpec> preset(const std::string& name) {
  ExperimentSpec s;
  s.r_tx_values = {2.5, 5.0, 7.5};
  if (name == "fig3") {
    s.d_values = {2.0};
    s.t_s = {0.2};
  } else if (name == "fig4" || name == "peak") {
    s.d_values = {4.0};
    s.t_s = {0.8};
  } else if (name == "fig5" || name == "hppw") {
    s.d_values = {2.0, 4.0, 6.0};
    s.t_s = {0.2};
  } else if (name == "fig6" || name == "gain") {
    s.d_values = {6.0};
    s.t_s = {1.8};
  } else {
    return std::nullopt;
  }
  s.name = name;
  s.output_dir = std::filesystem::path("out") / name;
  return s;
}

std::vector<std::string> preset_names() { return {"fig3", "fig4", "fig5", "fig6"}; }

Placementd placement_for(const ExperimentSpec& spec, double d, double r_tx) {
  Placementd p;
  p.d = d;
  p.r_tx = r_tx;
  p.r_rx = spec.r_rx;
  p.pivot = spec.pivot;
  return p;
}

SimConfig sim_config_for(const ExperimentSpec& spec, double d, double r_tx) {
  SimConfig c;
  c.n_molecules = spec.n_molecules;
  c.D = spec.D;
  c.dt = spec.dt;
  c.t_end = t_end_for(spec, d);
  c.bin_width = bin_width_for(spec, d);
  c.seed = spec.seed;
  c.absorption = spec.absorption;
  c.threads = spec.threads;
  c.topology = make_topology(placement_for(spec, d, r_tx), 0.0);
  return c;
}

void check_spec(const ExperimentSpec& spec) {
  if (!spec.d_values.empty() && spec.t_s.size() != 1 && spec.t_s.size() != spec.d_values.size())
    throw ConfigError("t_s needs one value or one per distance");
  if (spec.smoothing_window < 1 || spec.smoothing_window % 2 == 0)
    throw ConfigError("smoothing_window must be odd and >= 1");
  for (std::size_t i = 0; i < spec.angles_deg.size(); ++i) {
    const double a = spec.angles_deg[i];
    if (!(a >= 0.0 && a <= 180.0)) throw ConfigError("angles must lie in [0, 180]");
    if (i > 0 && !(a > spec.angles_deg[i - 1]))
      throw ConfigError("angles must be strictly increasing");
  }
  for (const double r_tx : spec.r_tx_values)
    if (!(r_tx >= 0.0)) throw ConfigError("r_tx must be >= 0");
  for (std::size_t i = 0; i < spec.d_values.size(); ++i) {
    const double d = spec.d_values[i];
    const double t_s = t_s_for(spec, i);
    const double t_end = t_end_for(spec, d);
    if (!(t_s > 0.0) || t_s > t_end)
      throw ConfigError("t_s = " + format_number(t_s) + " must lie in (0, t_end = " +
                        format_number(t_end) + "] for d = " + format_number(d));
    for (const double r_tx : spec.r_tx_values) {
      try {
        SimConfig c = sim_config_for(spec, d, r_tx);
        const Placementd p = placement_for(spec, d, r_tx);
        for (const double a : spec.angles_deg) {
          c.topology = make_topology(p, a);
          validate(c);
        }
      } catch (const GeometryError& e) {
        throw ConfigError("d = " + format_number(d) + ", r_tx = " + format_number(r_tx) +
                          ": " + e.what());
      } catch (const ConfigError& e) {
        throw ConfigError("d = " + format_number(d) + ", r_tx = " + format_number(r_tx) +
                          ": " + e.what());
      }
    }
  }
}

nlohmann::json to_json(const ExperimentSpec& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["d"] = s.d_values;
  j["r_tx"] = s.r_tx_values;
  j["N"] = s.n_molecules;
  j["D"] = s.D;
  j["r_rx"] = s.r_rx;
  j["dt"] = s.dt;
  j["seed"] = s.seed;
  j["bin_width"] = s.bin_width ? nlohmann::json(*s.bin_width) : nlohmann::json(nullptr);
  j["t_s"] = s.t_s;
  j["t_end"] = s.t_end ? nlohmann::json(*s.t_end) : nlohmann::json(nullptr);
  j["angles_deg"] = s.angles_deg;
  j["output_dir"] = s.output_dir.string();
  j["smoothing_window"] = s.smoothing_window;
  j["reference"] = to_string(s.reference);
  j["absorption"] = to_string(s.absorption);
  j["placement_convention"] = to_string(s.pivot);
  j["threads"] = s.threads;
  return j;
}

ExperimentSpec spec_from_json(const nlohmann::json& j) {
  try {
    ExperimentSpec s;
    s.name = j.at("name").get<std::string>();
    s.d_values = j.at("d").get<std::vector<double>>();
    s.r_tx_values = j.at("r_tx").get<std::vector<double>>();
    s.n_molecules = j.at("N").get<std::uint64_t>();
    s.D = j.at("D").get<double>();
    s.r_rx = j.at("r_rx").get<double>();
    s.dt = j.at("dt").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("bin_width").is_null()) s.bin_width = j.at("bin_width").get<double>();
    s.t_s = j.at("t_s").get<std::vector<double>>();
    if (!j.at("t_end").is_null()) s.t_end = j.at("t_end").get<double>();
    s.angles_deg = j.at("angles_deg").get<std::vector<double>>();
    s.output_dir = j.at("output_dir").get<std::string>();
    s.smoothing_window = j.at("smoothing_window").get<int>();
    s.reference = reference_from_string(j.at("reference").get<std::string>());
    s.absorption = absorption_test_from_string(j.at("absorption").get<std::string>());
    s.pivot = pivot_from_string(j.at("placement_convention").get<std::string>());
    s.threads = j.at("threads").get<unsigned>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed configuration JSON: ") + e.what());
  }
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const ProgressFn& progress) {
  check_spec(spec);

  std::error_code ec;
  std::filesystem::create_directories(spec.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + spec.output_dir.string());

  ExperimentResult result;
  nlohmann::json metrics = nlohmann::json::array();
  nlohmann::json checks = nlohmann::json::array();

  for (std::size_t di = 0; di < spec.d_values.size(); ++di) {
    const double d = spec.d_values[di];
    const double t_s = t_s_for(spec, di);
    const ChannelParams channel{spec.D, d, spec.r_rx};

    double reference = expected_hits(channel, spec.n_molecules, t_s);
    if (spec.reference == ReferenceMode::Simulated) {
      SimConfig ref = sim_config_for(spec, d, 0.0);
      ref.seed = reference_seed(spec.seed, d);
      reference = counts_until(run_single(ref), t_s);
    }

    for (const double r_tx : spec.r_tx_values) {
      GridPointResult point;
      point.d = d;
      point.r_tx = r_tx;
      point.t_s = t_s;
      point.t_end = t_end_for(spec, d);
      point.point_reference = reference;

      const SimConfig base = sim_config_for(spec, d, r_tx);
      for (auto& w : config_warnings(base, d))
        result.warnings.push_back("d=" + format_number(d) + " r_tx=" + format_number(r_tx) +
                                  ": " + w);
      const Placementd placement = placement_for(spec, d, r_tx);

      for (const double alpha : spec.angles_deg) {
        try {
          SimConfig c = base;
          c.topology = make_topology(placement, alpha);
          c.seed = angle_seed(spec.seed, alpha);
          RunStats stats;
          HittingHistogram h = run_single(c, &stats);
          if (stats.absorbed + stats.survivors != c.n_molecules ||
              stats.absorbed_flags != stats.absorbed)
            throw std::logic_error("conservation check failed");
          if (r_tx > 0.0 && stats.min_tx_clearance < -kSurfaceTolerance)
            throw std::logic_error("molecule found inside the transmitter body");
          point.histograms.emplace(alpha, std::move(h));
          point.stats.emplace(alpha, stats);
        } catch (const std::exception& e) {
          point.errors.emplace(alpha, e.what());
        }
        if (progress) {
          progress("d=" + format_number(d) + " r_tx=" + format_number(r_tx) +
                   " angle=" + format_number(alpha) +
                   (point.errors.count(alpha) ? " FAILED" : " done"));
        }
      }

      nlohmann::json entry;
      entry["d"] = d;
      entry["r_tx"] = r_tx;
      entry["t_s"] = t_s;
      entry["t_end"] = point.t_end;
      entry["point_reference"] = reference;
      entry["histogram_file"] = histogram_file_name(d, r_tx);
      entry["pattern_file"] = pattern_file_name(d, r_tx);

      nlohmann::json check;
      check["d"] = d;
      check["r_tx"] = r_tx;
      check["errors"] = nlohmann::json::object();
      for (const auto& [angle, msg] : point.errors) check["errors"][format_number(angle)] = msg;
      double min_clearance = std::numeric_limits<double>::infinity();
      std::uint64_t absorbed = 0;
      std::uint64_t survivors = 0;
      for (const auto& [angle, st] : point.stats) {
        min_clearance = std::min(min_clearance, st.min_tx_clearance);
        absorbed += st.absorbed;
        survivors += st.survivors;
      }
      check["conservation_ok"] =
          absorbed + survivors == spec.n_molecules * point.stats.size();
      check["min_tx_clearance"] =
          std::isfinite(min_clearance) ? nlohmann::json(min_clearance) : nlohmann::json(nullptr);
      check["ok"] = point.ok();

      try {
        point.metrics =
            compute_pattern_metrics(point.histograms, t_s, reference, spec.smoothing_window);
        const AngularPattern pattern = make_pattern(point.histograms, t_s, reference);
        entry["hppw_deg"] = point.metrics.hppw_deg;
        entry["hppw_crossed"] = point.metrics.hppw_crossed;
        if (!point.metrics.hppw_crossed)
          entry["hppw_note"] = "no half-power crossing within sampled angles (360 sentinel)";
        entry["gain_by_angle"] = angle_map_json(point.metrics.gain_by_angle);
        entry["peak_time_by_angle"] = angle_map_json(point.metrics.peak_time_by_angle);
        entry["counts_at_ts"] = nlohmann::json::object();
        for (std::size_t i = 0; i < pattern.angles_deg.size(); ++i)
          entry["counts_at_ts"][format_number(pattern.angles_deg[i])] = pattern.counts_at_ts[i];
        entry["smoothing_window"] = spec.smoothing_window;

        std::ofstream pat(spec.output_dir / pattern_file_name(d, r_tx));
        write_pattern_csv(pat, pattern, point.metrics);
        if (!pat) throw IoError("failed writing " + pattern_file_name(d, r_tx));
      } catch (const IoError&) {
        throw;
      } catch (const std::exception& e) {
        point.errors.emplace(-1.0, std::string("metrics: ") + e.what());
        check["ok"] = false;
        check["metrics_error"] = e.what();
      }

      std::ofstream hist(spec.output_dir / histogram_file_name(d, r_tx));
      write_histogram_csv(hist, point.histograms);
      if (!hist) throw IoError("failed writing " + histogram_file_name(d, r_tx));

      if (!point.ok()) result.exit_code = kExitValidationFailure;
      metrics.push_back(std::move(entry));
      checks.push_back(std::move(check));
      result.points.push_back(std::move(point));
    }
  }

  nlohmann::json summary;
  summary["config"] = to_json(spec);
  summary["metrics"] = std::move(metrics);
  summary["validation"] = {{"grid_points", checks},
                           {"all_ok", result.exit_code == kExitOk},
                           {"warnings", result.warnings}};
  summary["version"] = kVersion;
  summary["runs"] = result.points.size();
  summary["timestamp"] = timestamp_utc();
  result.summary = summary;

  std::ofstream out(spec.output_dir / "summary.json");
  out << summary.dump(2) << '\n';
  if (!out) throw IoError("failed writing summary.json");
  return result;
}

}  // namespace mcvd
