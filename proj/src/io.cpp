#include "mcvd/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mcvd {

std::string format_number(double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, end);
}

std::string histogram_file_name(double d, double r_tx) {
  return "hist_d" + format_number(d) + "_rtx" + format_number(r_tx) + ".csv";
}

std::string pattern_file_name(double d, double r_tx) {
  return "pattern_d" + format_number(d) + "_rtx" + format_number(r_tx) + ".csv";
}

void write_histogram_csv(std::ostream& out, const std::map<double, HittingHistogram>& by_angle) {
  out << kHistogramHeader << '\n';
  for (const auto& [angle, h] : by_angle) {
    const std::string a = format_number(angle);
    for (std::size_t i = 0; i < h.bins(); ++i)
      out << a << ',' << format_number(h.bin_start(i)) << ',' << format_number(h.bin_end(i))
          << ',' << h.counts[i] << '\n';
  }
}

std::map<double, HittingHistogram> read_histogram_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHistogramHeader)
    throw ConfigError(std::string("histogram CSV: expected header '") + kHistogramHeader + "'");
  struct Row {
    double start, end;
    std::uint64_t count;
  };
  std::map<double, std::vector<Row>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[4];
    for (auto& field : f)
      if (!std::getline(ss, field, ','))
        throw ConfigError("histogram CSV line " + std::to_string(line_no) + ": expected 4 fields");
    try {
      rows[std::stod(f[0])].push_back({std::stod(f[1]), std::stod(f[2]), std::stoull(f[3])});
    } catch (const std::exception&) {
      throw ConfigError("histogram CSV line " + std::to_string(line_no) + ": malformed number");
    }
  }
  std::map<double, HittingHistogram> out;
  for (auto& [angle, rs] : rows) {
    HittingHistogram h;
    h.bin_width = rs.front().end - rs.front().start;
    if (!(h.bin_width > 0.0)) throw ConfigError("histogram CSV: non-positive bin width");
    h.counts.assign(rs.size(), 0);
    for (const auto& r : rs) {
      const auto idx = static_cast<std::size_t>(std::llround(r.start / h.bin_width));
      if (idx >= h.counts.size()) throw ConfigError("histogram CSV: bins are not contiguous");
      h.counts[idx] = r.count;
      h.total_absorbed += r.count;
    }
    h.t_end = h.bin_end(h.bins() - 1);
    out.emplace(angle, std::move(h));
  }
  return out;
}

void write_pattern_csv(std::ostream& out, const AngularPattern& pattern,
                       const PatternMetrics& metrics) {
  out << kPatternHeader << '\n';
  for (std::size_t i = 0; i < pattern.angles_deg.size(); ++i) {
    const double a = pattern.angles_deg[i];
    out << format_number(a) << ',' << format_number(pattern.counts_at_ts[i]) << ',';
    if (auto g = metrics.gain_by_angle.find(a); g != metrics.gain_by_angle.end())
      out << format_number(g->second);
    out << ',';
    if (auto t = metrics.peak_time_by_angle.find(a); t != metrics.peak_time_by_angle.end())
      out << format_number(t->second);
    out << '\n';
  }
}

std::vector<MetricsRecord> metrics_from_directory(const std::filesystem::path& dir) {
  std::ifstream summary_in(dir / "summary.json");
  if (!summary_in) throw IoError("cannot open " + (dir / "summary.json").string());
  nlohmann::json summary;
  try {
    summary_in >> summary;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("summary.json: ") + e.what());
  }
  const ExperimentSpec spec = spec_from_json(summary.at("config"));

  std::vector<MetricsRecord> records;
  for (std::size_t di = 0; di < spec.d_values.size(); ++di) {
    const double d = spec.d_values[di];
    const double t_s = t_s_for(spec, di);
    const double t_end = t_end_for(spec, d);
    double reference = expected_hits({spec.D, d, spec.r_rx}, spec.n_molecules, t_s);
    if (spec.reference == ReferenceMode::Simulated) {
      for (const auto& m : summary.at("metrics"))
        if (m.at("d").get<double>() == d) reference = m.at("point_reference").get<double>();
    }
    for (const double r_tx : spec.r_tx_values) {
      std::ifstream in(dir / histogram_file_name(d, r_tx));
      if (!in) throw IoError("missing " + histogram_file_name(d, r_tx));
      auto by_angle = read_histogram_csv(in);
      for (auto& [angle, h] : by_angle) {
        h.t_end = std::min(h.t_end, t_end);
        h.total_emitted = spec.n_molecules;
      }
      MetricsRecord rec;
      rec.d = d;
      rec.r_tx = r_tx;
      rec.pattern = make_pattern(by_angle, t_s, reference);
      rec.metrics = compute_pattern_metrics(by_angle, t_s, reference, spec.smoothing_window);
      records.push_back(std::move(rec));
    }
  }
  return records;
}

}  // namespace mcvd
