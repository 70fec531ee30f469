#pragma once

// Deterministic synthetic sequences: piecewise-linear targets plus degraded
// detections (jitter, dropout, confidence dips, occlusion, exit/re-entry).
//
// Randomness comes from std::mt19937_64, whose output sequence is fixed by
// the C++ standard. Uniform and normal variates are derived from its raw
// 64-bit output here (53-bit mantissa uniforms, Box-Muller normals) instead
// of the library distributions, whose algorithms are implementation-defined.
// For every present target and frame three values are drawn in order:
// dropout uniform, x jitter, y jitter.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wtrack/geometry.hpp"
#include "wtrack/ini.hpp"
#include "wtrack/mot_io.hpp"
#include "wtrack/tracker.hpp"

namespace wtrack {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Waypoint {
  int frame = 1;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;  // <= 0 means the target's default size
  double h = 0.0;
};

/// Inclusive frame range carrying a value (probability or confidence).
struct FrameSpan {
  int first = 1;
  int last = 1;
  double value = 0.0;

  bool contains(int f) const { return f >= first && f <= last; }
};

struct TargetSpec {
  int id = 1;
  double w = 40.0;
  double h = 80.0;
  std::vector<Waypoint> path;
  double confidence = 1.0;
  std::vector<FrameSpan> dropout;   // per-frame drop probability
  std::vector<FrameSpan> dips;      // confidence override
  std::vector<FrameSpan> occluded;  // in ground truth, never detected
  std::vector<FrameSpan> absent;    // out of scene: neither GT nor detections
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  int frame_count = 1;
  double jitter = 0.0;   // position noise std, pixels
  double dropout = 0.0;  // global per-detection drop probability
  std::vector<TargetSpec> targets;

  void validate() const {
    if (frame_count < 1) throw ScenarioError("frames must be >= 1");
    if (!(jitter >= 0.0)) throw ScenarioError("jitter must be >= 0");
    if (!(dropout >= 0.0 && dropout <= 1.0)) throw ScenarioError("dropout must lie in [0, 1]");
    std::vector<int> ids;
    for (const TargetSpec& t : targets) {
      const std::string who = "target " + std::to_string(t.id);
      if (t.id < 1) throw ScenarioError("target ids must be >= 1");
      ids.push_back(t.id);
      if (!(t.w > 0.0 && t.h > 0.0)) throw ScenarioError(who + ": size must be positive");
      if (t.path.empty()) throw ScenarioError(who + ": path needs at least one waypoint");
      for (std::size_t i = 1; i < t.path.size(); ++i)
        if (t.path[i].frame <= t.path[i - 1].frame) throw ScenarioError(who + ": waypoint frames must increase");
      if (!(t.confidence >= 0.0 && t.confidence <= 1.0)) throw ScenarioError(who + ": confidence must lie in [0, 1]");
      for (const auto* spans : {&t.dropout, &t.dips})
        for (const FrameSpan& s : *spans)
          if (!(s.value >= 0.0 && s.value <= 1.0)) throw ScenarioError(who + ": span values must lie in [0, 1]");
      for (const auto* spans : {&t.dropout, &t.dips, &t.occluded, &t.absent})
        for (const FrameSpan& s : *spans)
          if (s.first > s.last) throw ScenarioError(who + ": span start after end");
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ScenarioError("duplicate target id");
  }
};

struct SyntheticSequence {
  SequenceData ground_truth;
  DetectionSet detections;
};

namespace detail {

class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    cached_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool cached_ = false;
};

inline bool in_any(const std::vector<FrameSpan>& spans, int f) {
  return std::any_of(spans.begin(), spans.end(), [f](const FrameSpan& s) { return s.contains(f); });
}

/// Center-form box of the target at frame f, if its path covers f.
inline std::optional<BoundingBox> target_box(const TargetSpec& t, int f) {
  if (f < t.path.front().frame || f > t.path.back().frame) return std::nullopt;
  auto size_at = [&](const Waypoint& p) {
    return std::pair(p.w > 0.0 ? p.w : t.w, p.h > 0.0 ? p.h : t.h);
  };
  if (t.path.size() == 1) {
    const auto [w, h] = size_at(t.path.front());
    return box_from_center(t.path.front().cx, t.path.front().cy, w, h);
  }
  std::size_t seg = 0;
  while (seg + 2 < t.path.size() && t.path[seg + 1].frame < f) ++seg;
  const Waypoint& a = t.path[seg];
  const Waypoint& b = t.path[seg + 1];
  const double s = static_cast<double>(f - a.frame) / static_cast<double>(b.frame - a.frame);
  const auto [wa, ha] = size_at(a);
  const auto [wb, hb] = size_at(b);
  auto lerp = [s](double p, double q) { return p + (q - p) * s; };
  return box_from_center(lerp(a.cx, b.cx), lerp(a.cy, b.cy), lerp(wa, wb), lerp(ha, hb));
}

}  // namespace detail

inline SyntheticSequence generate(const Scenario& scenario) {
  scenario.validate();
  detail::PortableRng rng(scenario.seed);
  SyntheticSequence out;
  out.ground_truth.name = scenario.name;
  out.ground_truth.frame_count = scenario.frame_count;

  for (int f = 1; f <= scenario.frame_count; ++f) {
    std::vector<Detection> frame_dets;
    std::vector<MotRecord> frame_gt;
    for (const TargetSpec& t : scenario.targets) {
      const auto box = detail::target_box(t, f);
      if (!box || detail::in_any(t.absent, f)) continue;
      const double u = rng.uniform();
      const double nx = rng.normal();
      const double ny = rng.normal();

      const bool occluded = detail::in_any(t.occluded, f);
      MotRecord gt;
      gt.frame = f;
      gt.id = t.id;
      gt.box = *box;
      gt.visibility = occluded ? 0.0 : 1.0;
      frame_gt.push_back(gt);
      if (occluded) continue;

      double p = scenario.dropout;
      for (const FrameSpan& s : t.dropout)
        if (s.contains(f)) p = std::max(p, s.value);
      if (u < p) continue;

      double conf = t.confidence;
      for (const FrameSpan& s : t.dips)
        if (s.contains(f)) conf = s.value;
      frame_dets.push_back({f, box->translated(nx * scenario.jitter, ny * scenario.jitter), conf});
    }
    std::sort(frame_gt.begin(), frame_gt.end(), [](const MotRecord& a, const MotRecord& b) { return a.id < b.id; });
    out.ground_truth.records.insert(out.ground_truth.records.end(), frame_gt.begin(), frame_gt.end());
    if (!frame_dets.empty()) out.detections.frames[f] = std::move(frame_dets);
  }
  return out;
}

namespace detail {

inline std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

inline double number(const std::string& s, const ini::Entry& e) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ScenarioError("line " + std::to_string(e.line) + ": bad number '" + s + "' in '" + e.key + "'");
}

/// "a-b" or "a-b:value"; a single frame "a" is also accepted.
inline std::vector<FrameSpan> parse_spans(const ini::Entry& e, bool needs_value) {
  std::vector<FrameSpan> spans;
  for (const std::string& tok : tokens(e.value)) {
    FrameSpan s;
    std::string range = tok;
    const auto colon = tok.find(':');
    if (colon != std::string::npos) {
      range = tok.substr(0, colon);
      s.value = number(tok.substr(colon + 1), e);
    } else if (needs_value) {
      throw ScenarioError("line " + std::to_string(e.line) + ": '" + e.key + "' spans need ':value'");
    }
    const auto dash = range.find('-');
    s.first = static_cast<int>(number(range.substr(0, dash), e));
    s.last = dash == std::string::npos ? s.first : static_cast<int>(number(range.substr(dash + 1), e));
    spans.push_back(s);
  }
  return spans;
}

/// "frame:cx,cy" or "frame:cx,cy,w,h", whitespace separated.
inline std::vector<Waypoint> parse_path(const ini::Entry& e) {
  std::vector<Waypoint> path;
  for (const std::string& tok : tokens(e.value)) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
      throw ScenarioError("line " + std::to_string(e.line) + ": waypoint '" + tok + "' needs frame:cx,cy");
    Waypoint p;
    p.frame = static_cast<int>(number(tok.substr(0, colon), e));
    std::vector<double> v;
    std::istringstream rest(tok.substr(colon + 1));
    for (std::string part; std::getline(rest, part, ',');) v.push_back(number(part, e));
    if (v.size() != 2 && v.size() != 4)
      throw ScenarioError("line " + std::to_string(e.line) + ": waypoint '" + tok + "' needs 2 or 4 values");
    p.cx = v[0];
    p.cy = v[1];
    if (v.size() == 4) {
      p.w = v[2];
      p.h = v[3];
    }
    path.push_back(p);
  }
  return path;
}

}  // namespace detail

inline Scenario parse_scenario(std::istream& in) {
  std::vector<ini::Section> sections;
  try {
    sections = ini::parse(in);
  } catch (const ini::ParseError& e) {
    throw ScenarioError(e.what());
  }
  Scenario s;
  s.targets.clear();
  auto unknown = [](const ini::Entry& e, const std::string& section) {
    return ScenarioError("line " + std::to_string(e.line) + ": unknown key '" + e.key + "' in [" + section + "]");
  };
  try {
    for (const ini::Section& sec : sections) {
      if (sec.name == "scenario") {
        for (const ini::Entry& e : sec.entries) {
          if (e.key == "name") s.name = e.value;
          else if (e.key == "seed") s.seed = static_cast<std::uint64_t>(ini::to_int(e));
          else if (e.key == "frames") s.frame_count = ini::to_int(e);
          else if (e.key == "jitter") s.jitter = ini::to_double(e);
          else if (e.key == "dropout") s.dropout = ini::to_double(e);
          else throw unknown(e, sec.name);
        }
      } else if (sec.name == "target") {
        TargetSpec t;
        t.id = static_cast<int>(s.targets.size()) + 1;
        for (const ini::Entry& e : sec.entries) {
          if (e.key == "id") t.id = ini::to_int(e);
          else if (e.key == "size") {
            const auto parts = detail::tokens(e.value);
            if (parts.size() != 2) throw ScenarioError("line " + std::to_string(e.line) + ": size needs 'w h'");
            t.w = detail::number(parts[0], e);
            t.h = detail::number(parts[1], e);
          }
          else if (e.key == "path") t.path = detail::parse_path(e);
          else if (e.key == "confidence") t.confidence = ini::to_double(e);
          else if (e.key == "dropout") t.dropout = detail::parse_spans(e, true);
          else if (e.key == "dip") t.dips = detail::parse_spans(e, true);
          else if (e.key == "occluded") t.occluded = detail::parse_spans(e, false);
          else if (e.key == "absent") t.absent = detail::parse_spans(e, false);
          else throw unknown(e, sec.name);
        }
        s.targets.push_back(std::move(t));
      } else {
        throw ScenarioError("line " + std::to_string(sec.line) + ": unknown section [" + sec.name + "]");
      }
    }
  } catch (const ini::ParseError& e) {
    throw ScenarioError(e.what());
  }
  s.validate();
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MotIoError("cannot open scenario '" + path.string() + "'");
  return parse_scenario(in);
}

}  // namespace wtrack
