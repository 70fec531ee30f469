#pragma once

// Two-level tracking with windowed ID correction.
//
// L1 tracks every frame. Its output is buffered for k frames; then the
// highest-confidence box of each L1 id is handed to L2 as one pseudo-frame.
// Every buffered L1 detection is matched (per frame, by IoU) against L2's
// output and relabelled with the matching L2 id. Unmatched L1 detections get
// kUnmatchedIdOffset + their L1 id, which never collides with L2 ids.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "wtrack/assignment.hpp"
#include "wtrack/geometry.hpp"
#include "wtrack/tracker.hpp"

namespace wtrack {

inline constexpr int kUnmatchedIdOffset = 1'000'000;

struct BufferedFrame {
  int frame = 0;
  std::vector<TrackedDetection> detections;
};

struct WindowBuffer {
  int k = 1;
  std::vector<BufferedFrame> frames;
  std::map<int, TrackedDetection> best_per_id;

  bool empty() const { return frames.empty(); }
  bool full() const { return static_cast<int>(frames.size()) >= k; }

  /// Appends one frame of L1 output and refreshes the per-id maxima.
  /// Earlier frames win confidence ties.
  void push(int frame, std::vector<TrackedDetection> detections) {
    if (!frames.empty() && frame <= frames.back().frame)
      throw std::invalid_argument("window buffer frames must be strictly increasing");
    if (full()) throw std::logic_error("window buffer already holds k frames");
    for (const TrackedDetection& d : detections) {
      auto [it, inserted] = best_per_id.try_emplace(d.track_id, d);
      if (!inserted && d.detection.confidence > it->second.detection.confidence) it->second = d;
    }
    frames.push_back({frame, std::move(detections)});
  }

  void clear() {
    frames.clear();
    best_per_id.clear();
  }
};

/// Highest-confidence detection for each L1 id in the window, in id order.
/// Ties go to the earliest frame.
inline std::vector<TrackedDetection> select_best(const WindowBuffer& buffer) {
  if (buffer.empty()) throw std::invalid_argument("select_best: empty window");
  std::map<int, TrackedDetection> best;
  for (const BufferedFrame& f : buffer.frames) {
    for (const TrackedDetection& d : f.detections) {
      auto [it, inserted] = best.try_emplace(d.track_id, d);
      if (inserted) continue;
      const TrackedDetection& cur = it->second;
      if (std::tie(d.detection.confidence, cur.detection.frame) >
          std::tie(cur.detection.confidence, d.detection.frame))
        it->second = d;
    }
  }
  std::vector<TrackedDetection> out;
  out.reserve(best.size());
  for (auto& [id, d] : best) out.push_back(d);
  return out;
}

/// Relabels one frame of L1 detections against L2 reference boxes. Pairs
/// need IoU > 0 to match.
inline std::vector<TrackedDetection> relabel_frame(std::span<const TrackedDetection> l1,
                                                   std::span<const TrackedDetection> l2) {
  std::vector<BoundingBox> l1_boxes, l2_boxes;
  for (const auto& d : l1) l1_boxes.push_back(d.detection.box);
  for (const auto& d : l2) l2_boxes.push_back(d.detection.box);
  const CostMatrix dist = iou_distance_matrix(l1_boxes, l2_boxes);
  const AssignmentResult res = solve(dist, std::nextafter(1.0, 0.0));

  std::vector<TrackedDetection> out(l1.begin(), l1.end());
  for (auto& d : out) d.track_id = kUnmatchedIdOffset + d.track_id;
  for (auto [r, c] : res.matches) out[r].track_id = l2[c].track_id;
  return out;
}

class WindowTracker {
 public:
  WindowTracker(TrackerConfig l1, TrackerConfig l2, int k) : l1_(std::move(l1)), l2_(std::move(l2)) {
    if (k < 1) throw std::invalid_argument("window length k must be >= 1");
    buffer_.k = k;
  }

  int k() const { return buffer_.k; }
  const WindowBuffer& buffer() const { return buffer_; }
  const Tracker& level1() const { return l1_; }
  const Tracker& level2() const { return l2_; }

  /// Steps L1 and buffers its output. Returns the corrected detections of
  /// the whole window once k frames are buffered.
  std::optional<std::vector<TrackedDetection>> push_frame(int frame, std::span<const Detection> detections) {
    if (last_frame_ && frame <= *last_frame_)
      throw TrackerInputError("frame " + std::to_string(frame) + " is not after frame " +
                              std::to_string(*last_frame_));
    buffer_.push(frame, l1_.step(frame, detections));
    last_frame_ = frame;
    if (!buffer_.full()) return std::nullopt;
    return finalize_window();
  }

  /// Runs L2 once on the window's best boxes and relabels the buffer.
  std::vector<TrackedDetection> finalize_window() {
    if (buffer_.empty()) throw std::logic_error("finalize_window: empty window");
    const int pseudo_frame = buffer_.frames.back().frame;

    std::vector<Detection> selected;
    for (const TrackedDetection& d : select_best(buffer_)) {
      Detection det = d.detection;
      det.frame = pseudo_frame;
      selected.push_back(det);
    }
    const std::vector<TrackedDetection> reference = l2_.step(pseudo_frame, selected);

    std::vector<TrackedDetection> out;
    for (const BufferedFrame& f : buffer_.frames) {
      auto relabelled = relabel_frame(f.detections, reference);
      out.insert(out.end(), relabelled.begin(), relabelled.end());
    }
    buffer_.clear();
    return out;
  }

  /// Finalizes a partial window at end of sequence.
  std::vector<TrackedDetection> flush() {
    if (buffer_.empty()) return {};
    return finalize_window();
  }

 private:
  Tracker l1_;
  Tracker l2_;
  WindowBuffer buffer_;
  std::optional<int> last_frame_;
};

}  // namespace wtrack
