#pragma once

// MOTChallenge text files.
//
//   detections:   frame,-1,x,y,w,h,conf,...
//   ground truth: frame,id,x,y,w,h,flag,class,visibility,...
//   results:      frame,id,x,y,w,h,conf,-1,-1,-1
//
// Boxes are kept exactly as written in the file. Extra trailing columns are
// ignored. LF and CRLF are accepted; writers emit LF.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wtrack/geometry.hpp"
#include "wtrack/tracker.hpp"

namespace wtrack {

/// Malformed or invalid file content. line() is 1-based, 0 when not tied to a line.
class MotFormatError : public std::runtime_error {
 public:
  MotFormatError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class MotIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MotRecord {
  int frame = 1;
  int id = -1;
  BoundingBox box;
  double confidence = 1.0;
  int flag = 1;  // ground-truth "consider" flag
  int object_class = 1;
  double visibility = 1.0;
  bool evaluable = true;  // false for GT rows with flag 0 or a non-person class
};

struct SequenceData {
  std::string name;
  int frame_count = 0;
  std::vector<MotRecord> records;

  std::size_t evaluable_count() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                  [](const MotRecord& r) { return r.evaluable; }));
  }
};

struct DetectionSet {
  std::map<int, std::vector<Detection>> frames;
  int clamped_confidences = 0;
  std::vector<std::string> diagnostics;  // rejected rows

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [f, dets] : frames) n += dets.size();
    return n;
  }
  int last_frame() const { return frames.empty() ? 0 : frames.rbegin()->first; }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

inline double parse_double(std::string_view field, int line) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end)
    throw MotFormatError("not a number: '" + std::string(field) + "'", line);
  return v;
}

inline int parse_int(std::string_view field, int line) {
  // Integers are sometimes written as "1.0"; accept integral reals.
  const double v = parse_double(field, line);
  if (v != static_cast<double>(static_cast<long long>(v)) || v < -2147483648.0 || v > 2147483647.0)
    throw MotFormatError("not an integer: '" + std::string(field) + "'", line);
  return static_cast<int>(v);
}

/// Calls fn(fields, line_number) for every non-blank line.
template <typename Fn>
void for_each_row(std::istream& in, std::size_t min_fields, Fn fn) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() < min_fields)
      throw MotFormatError("expected at least " + std::to_string(min_fields) + " fields, found " +
                               std::to_string(fields.size()),
                           line_no);
    fn(fields, line_no);
  }
}

inline std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MotIoError("cannot open '" + path.string() + "' for reading");
  return in;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MotIoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw MotIoError("write failed for '" + path.string() + "'");
}

inline void append_row(std::string& out, int frame, int id, const BoundingBox& b, double conf,
                       std::string_view tail) {
  char buf[256];
  const int n = std::snprintf(buf, sizeof buf, "%d,%d,%.2f,%.2f,%.2f,%.2f,%.6f", frame, id, b.x, b.y, b.w, b.h, conf);
  out.append(buf, static_cast<std::size_t>(n));
  out.append(tail);
  out.push_back('\n');
}

inline BoundingBox parse_box(const std::vector<std::string_view>& f, int line) {
  return {parse_double(f[2], line), parse_double(f[3], line), parse_double(f[4], line), parse_double(f[5], line)};
}

}  // namespace detail

inline DetectionSet parse_detections(std::istream& in) {
  DetectionSet set;
  detail::for_each_row(in, 7, [&](const auto& f, int line) {
    const int frame = detail::parse_int(f[0], line);
    if (frame < 1) throw MotFormatError("frame index must be >= 1", line);
    const BoundingBox box = detail::parse_box(f, line);
    double conf = detail::parse_double(f[6], line);
    if (!box.valid()) {
      set.diagnostics.push_back("line " + std::to_string(line) + ": rejected box with non-positive size");
      return;
    }
    if (conf < 0.0 || conf > 1.0) {
      conf = std::clamp(conf, 0.0, 1.0);
      ++set.clamped_confidences;
    }
    set.frames[frame].push_back({frame, box, conf});
  });
  return set;
}

inline DetectionSet read_detections(const std::filesystem::path& path) {
  auto in = detail::open_for_read(path);
  return parse_detections(in);
}

inline SequenceData parse_ground_truth(std::istream& in, std::string name = {}) {
  SequenceData seq;
  seq.name = std::move(name);
  std::set<std::pair<int, int>> seen;
  detail::for_each_row(in, 7, [&](const auto& f, int line) {
    MotRecord r;
    r.frame = detail::parse_int(f[0], line);
    r.id = detail::parse_int(f[1], line);
    if (r.frame < 1) throw MotFormatError("frame index must be >= 1", line);
    if (r.id < 1) throw MotFormatError("ground-truth id must be >= 1", line);
    r.box = detail::parse_box(f, line);
    if (!r.box.valid()) throw MotFormatError("box must have positive size", line);
    r.flag = detail::parse_int(f[6], line);
    r.object_class = f.size() > 7 ? detail::parse_int(f[7], line) : 1;
    r.visibility = f.size() > 8 ? detail::parse_double(f[8], line) : 1.0;
    r.confidence = 1.0;
    // -1 is the class placeholder of older benchmark files.
    r.evaluable = r.flag != 0 && (r.object_class == 1 || r.object_class == -1);
    if (!seen.emplace(r.frame, r.id).second)
      throw MotFormatError("duplicate id " + std::to_string(r.id) + " in frame " + std::to_string(r.frame), line);
    seq.frame_count = std::max(seq.frame_count, r.frame);
    seq.records.push_back(r);
  });
  return seq;
}

inline SequenceData read_ground_truth(const std::filesystem::path& path) {
  auto in = detail::open_for_read(path);
  return parse_ground_truth(in, path.stem().string());
}

/// Tracker output files: ids must be positive and unique per frame.
inline SequenceData parse_results(std::istream& in, std::string name = {}) {
  SequenceData seq;
  seq.name = std::move(name);
  std::set<std::pair<int, int>> seen;
  detail::for_each_row(in, 7, [&](const auto& f, int line) {
    MotRecord r;
    r.frame = detail::parse_int(f[0], line);
    r.id = detail::parse_int(f[1], line);
    if (r.frame < 1) throw MotFormatError("frame index must be >= 1", line);
    if (r.id < 1) throw MotFormatError("result id must be >= 1", line);
    r.box = detail::parse_box(f, line);
    if (!r.box.valid()) throw MotFormatError("box must have positive size", line);
    r.confidence = detail::parse_double(f[6], line);
    if (!seen.emplace(r.frame, r.id).second)
      throw MotFormatError("duplicate id " + std::to_string(r.id) + " in frame " + std::to_string(r.frame), line);
    seq.frame_count = std::max(seq.frame_count, r.frame);
    seq.records.push_back(r);
  });
  return seq;
}

inline SequenceData read_results(const std::filesystem::path& path) {
  auto in = detail::open_for_read(path);
  return parse_results(in, path.stem().string());
}

/// Result rows; input must be sorted by (frame, id).
inline std::string format_results(std::span<const TrackedDetection> tracked) {
  std::string out;
  for (std::size_t i = 0; i < tracked.size(); ++i) {
    const auto& t = tracked[i];
    if (i > 0) {
      const auto& p = tracked[i - 1];
      if (std::pair(p.detection.frame, p.track_id) >= std::pair(t.detection.frame, t.track_id))
        throw std::invalid_argument("format_results: rows must be sorted by (frame, id) without duplicates");
    }
    detail::append_row(out, t.detection.frame, t.track_id, t.detection.box, t.detection.confidence, ",-1,-1,-1");
  }
  return out;
}

inline void write_results(const std::filesystem::path& path, std::span<const TrackedDetection> tracked) {
  detail::write_file(path, format_results(tracked));
}

inline std::string format_detections(const DetectionSet& set) {
  std::string out;
  for (const auto& [frame, dets] : set.frames)
    for (const Detection& d : dets) detail::append_row(out, frame, -1, d.box, d.confidence, ",-1,-1,-1");
  return out;
}

inline void write_detections(const std::filesystem::path& path, const DetectionSet& set) {
  detail::write_file(path, format_detections(set));
}

inline std::string format_ground_truth(const SequenceData& seq) {
  std::string out;
  char buf[256];
  for (const MotRecord& r : seq.records) {
    const int n = std::snprintf(buf, sizeof buf, "%d,%d,%.2f,%.2f,%.2f,%.2f,%d,%d,%.2f\n", r.frame, r.id, r.box.x,
                                r.box.y, r.box.w, r.box.h, r.flag, r.object_class, r.visibility);
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

inline void write_ground_truth(const std::filesystem::path& path, const SequenceData& seq) {
  detail::write_file(path, format_ground_truth(seq));
}

/// Sorts tracker output into result-file order.
inline void sort_for_output(std::vector<TrackedDetection>& tracked) {
  std::sort(tracked.begin(), tracked.end(), [](const TrackedDetection& a, const TrackedDetection& b) {
    return std::pair(a.detection.frame, a.track_id) < std::pair(b.detection.frame, b.track_id);
  });
}

}  // namespace wtrack
