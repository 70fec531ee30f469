#pragma once

// Sequence-level drivers and report formatting used by the command line.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wtrack/ini.hpp"
#include "wtrack/metrics.hpp"
#include "wtrack/mot_io.hpp"
#include "wtrack/tracker.hpp"
#include "wtrack/window_tracker.hpp"

namespace wtrack {

/// Runs one tracker over every frame 1..last detection frame; frames without
/// detections are stepped empty. Output is in result-file order.
inline std::vector<TrackedDetection> run_base(const TrackerConfig& config, const DetectionSet& dets) {
  Tracker tracker(config);
  std::vector<TrackedDetection> out;
  const std::vector<Detection> none;
  for (int f = 1; f <= dets.last_frame(); ++f) {
    auto it = dets.frames.find(f);
    auto step = tracker.step(f, it == dets.frames.end() ? none : it->second);
    out.insert(out.end(), step.begin(), step.end());
  }
  sort_for_output(out);
  return out;
}

inline std::vector<TrackedDetection> run_windowed(const TrackerConfig& l1, const TrackerConfig& l2, int k,
                                                  const DetectionSet& dets) {
  WindowTracker wt(l1, l2, k);
  std::vector<TrackedDetection> out;
  const std::vector<Detection> none;
  for (int f = 1; f <= dets.last_frame(); ++f) {
    auto it = dets.frames.find(f);
    if (auto window = wt.push_frame(f, it == dets.frames.end() ? none : it->second))
      out.insert(out.end(), window->begin(), window->end());
  }
  auto tail = wt.flush();
  out.insert(out.end(), tail.begin(), tail.end());
  sort_for_output(out);
  return out;
}

/// L2 sees one pseudo-frame per window, so it confirms on the first hit by
/// default; otherwise every new target would pass through a placeholder id.
struct TrackerPair {
  TrackerConfig l1;
  TrackerConfig l2 = [] {
    TrackerConfig c;
    c.min_hits = 1;
    return c;
  }();
};

/// Sets one TrackerConfig field from its config-file key.
inline void apply_setting(TrackerConfig& c, const ini::Entry& e) {
  const std::string& k = e.key;
  if (k == "kind") {
    auto kind = parse_tracker_kind(e.value);
    if (!kind) throw ini::ParseError("line " + std::to_string(e.line) + ": unknown tracker kind '" + e.value + "'");
    c.kind = *kind;
  } else if (k == "iou_gate") c.iou_gate = ini::to_double(e);
  else if (k == "max_age") c.max_age = ini::to_int(e);
  else if (k == "min_hits") c.min_hits = ini::to_int(e);
  else if (k == "high_conf_threshold") c.high_conf_threshold = ini::to_double(e);
  else if (k == "low_conf_threshold") c.low_conf_threshold = ini::to_double(e);
  else if (k == "ocm_weight") c.ocm_weight = ini::to_double(e);
  else if (k == "ocm_delta_t") c.ocm_delta_t = ini::to_int(e);
  else if (k == "oru") c.oru = ini::to_bool(e);
  else if (k == "std_weight_position") c.kalman.std_weight_position = ini::to_double(e);
  else if (k == "std_weight_velocity") c.kalman.std_weight_velocity = ini::to_double(e);
  else if (k == "std_weight_measurement") c.kalman.std_weight_measurement = ini::to_double(e);
  else if (k == "std_weight_initial_velocity") c.kalman.std_weight_initial_velocity = ini::to_double(e);
  else throw ini::ParseError("line " + std::to_string(e.line) + ": unknown key '" + k + "'");
}

/// Applies a parsed config file. [tracker] applies to both levels, then
/// [l1] and [l2] to their own level.
inline void apply_config(TrackerPair& pair, const std::vector<ini::Section>& sections) {
  for (const char* pass : {"tracker", "l1", "l2"}) {
    for (const ini::Section& sec : sections) {
      if (sec.name != pass) continue;
      for (const ini::Entry& e : sec.entries) {
        if (sec.name != "l2") apply_setting(pair.l1, e);
        if (sec.name != "l1") apply_setting(pair.l2, e);
      }
    }
  }
  for (const ini::Section& sec : sections)
    if (sec.name != "tracker" && sec.name != "l1" && sec.name != "l2")
      throw ini::ParseError("line " + std::to_string(sec.line) + ": unknown section [" + sec.name + "]");
}

inline void load_config_file(TrackerPair& pair, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MotIoError("cannot open config '" + path.string() + "'");
  apply_config(pair, ini::parse(in));
}

/// Command-line override "section.key=value", e.g. "l1.max_age=5".
inline void apply_override(TrackerPair& pair, const std::string& spec) {
  const auto dot = spec.find('.');
  const auto eq = spec.find('=');
  if (dot == std::string::npos || eq == std::string::npos || dot > eq)
    throw ini::ParseError("override '" + spec + "' must look like section.key=value");
  std::istringstream in("[" + spec.substr(0, dot) + "]\n" + spec.substr(dot + 1, eq - dot - 1) + " = " +
                        spec.substr(eq + 1) + "\n");
  apply_config(pair, ini::parse(in));
}

struct ReportRow {
  std::string l1;
  std::string l2;
  std::string k;
  MetricsReport report;
};

inline std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

namespace detail {

inline std::vector<std::string> metric_cells(const MetricsReport& r) {
  return {percent(r.idf1), percent(r.hota), percent(r.mota), percent(r.motp), percent(r.det_a), percent(r.ass_a),
          std::to_string(r.clear.idsw), std::to_string(r.clear.fp), std::to_string(r.clear.fn)};
}

inline const std::vector<std::string>& metric_headers() {
  static const std::vector<std::string> h{"IDF1", "HOTA", "MOTA", "MOTP", "DetA", "AssA", "IDSW", "FP", "FN"};
  return h;
}

}  // namespace detail

/// Fixed-width table; scores are percentages with one decimal.
inline std::string format_table(const std::vector<ReportRow>& rows, bool with_config) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header;
  if (with_config) header = {"L1", "L2", "k"};
  for (const auto& h : detail::metric_headers()) header.push_back(h);
  cells.push_back(header);
  for (const ReportRow& r : rows) {
    std::vector<std::string> line;
    if (with_config) line = {r.l1, r.l2.empty() ? "-" : r.l2, r.k.empty() ? "-" : r.k};
    for (auto& c : detail::metric_cells(r.report)) line.push_back(std::move(c));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells)
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());

  std::string out;
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i > 0) out += "  ";
      const bool left = with_config && i < 3;
      const std::string pad(width[i] - line[i].size(), ' ');
      out += left ? line[i] + pad : pad + line[i];
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

inline std::string format_csv(const std::vector<ReportRow>& rows, bool with_config) {
  std::string out;
  std::vector<std::string> header;
  if (with_config) header = {"l1", "l2", "k"};
  for (const auto& h : detail::metric_headers()) header.push_back(h);
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (const ReportRow& r : rows) {
    std::vector<std::string> line;
    if (with_config) line = {r.l1, r.l2, r.k};
    for (auto& c : detail::metric_cells(r.report)) line.push_back(std::move(c));
    for (std::size_t i = 0; i < line.size(); ++i) out += (i ? "," : "") + line[i];
    out += '\n';
  }
  return out;
}

}  // namespace wtrack
