#pragma once

// Appearance-free tracking-by-detection: SORT, ByteTrack and OC-SORT behind
// a single frame-stepping interface.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wtrack/assignment.hpp"
#include "wtrack/geometry.hpp"
#include "wtrack/kalman.hpp"

namespace wtrack {

struct Detection {
  int frame = 1;
  BoundingBox box;
  double confidence = 1.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct TrackedDetection {
  Detection detection;
  int track_id = 1;

  friend bool operator==(const TrackedDetection&, const TrackedDetection&) = default;
};

enum class TrackerKind { sort, bytetrack, ocsort };

inline std::string_view to_string(TrackerKind kind) {
  switch (kind) {
    case TrackerKind::sort: return "sort";
    case TrackerKind::bytetrack: return "bytetrack";
    case TrackerKind::ocsort: return "ocsort";
  }
  return "unknown";
}

inline std::optional<TrackerKind> parse_tracker_kind(std::string_view name) {
  if (name == "sort") return TrackerKind::sort;
  if (name == "bytetrack") return TrackerKind::bytetrack;
  if (name == "ocsort") return TrackerKind::ocsort;
  return std::nullopt;
}

struct TrackerConfig {
  TrackerKind kind = TrackerKind::sort;
  double iou_gate = 0.7;  // largest accepted IoU distance
  int max_age = 30;
  int min_hits = 3;
  // Detections below high_conf_threshold are ignored by SORT and OC-SORT;
  // ByteTrack uses [low, high) in its second association stage.
  double high_conf_threshold = 0.6;
  double low_conf_threshold = 0.1;
  double ocm_weight = 0.2;
  int ocm_delta_t = 3;
  // Observation-centric re-update and last-observation anchoring for lost
  // tracks (OC-SORT only).
  bool oru = true;
  KalmanConfig kalman;

  void validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(iou_gate)) throw std::invalid_argument("iou_gate must lie in [0, 1]");
    if (!unit(low_conf_threshold) || !unit(high_conf_threshold) ||
        low_conf_threshold > high_conf_threshold)
      throw std::invalid_argument("confidence thresholds must satisfy 0 <= low <= high <= 1");
    if (max_age < 1) throw std::invalid_argument("max_age must be >= 1");
    if (min_hits < 1) throw std::invalid_argument("min_hits must be >= 1");
    if (!(ocm_weight >= 0.0)) throw std::invalid_argument("ocm_weight must be >= 0");
    if (ocm_delta_t < 1) throw std::invalid_argument("ocm_delta_t must be >= 1");
  }
};

enum class TrackStatus { tentative, active, lost, removed };

struct Tracklet {
  int id = 0;
  KalmanState kf;
  KalmanState kf_at_last_observation;
  std::vector<TrackedDetection> history;
  TrackStatus status = TrackStatus::tentative;
  int frames_since_update = 0;
  int hit_streak = 0;
  bool confirmed = false;

  const BoundingBox& last_box() const { return history.back().detection.box; }
};

/// Bad input to Tracker::step (frame order, detection validity).
class TrackerInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// SORT association: IoU distance between predicted track boxes and
/// detections, gated at `gate`.
inline AssignmentResult associate_sort(std::span<const BoundingBox> tracks,
                                       std::span<const BoundingBox> detections, double gate) {
  return solve(iou_distance_matrix(tracks, detections), gate);
}

/// Normalized angle in [0, 1] between a track's observed motion and the
/// step from its last observation to `candidate`. Zero when either
/// direction is undefined.
inline double direction_cost(std::span<const TrackedDetection> history, int delta_t,
                             const BoundingBox& candidate) {
  if (history.size() < 2) return 0.0;
  const std::size_t back = std::min<std::size_t>(static_cast<std::size_t>(delta_t), history.size() - 1);
  const BoundingBox& last = history.back().detection.box;
  const BoundingBox& prev = history[history.size() - 1 - back].detection.box;
  const double tx = last.center_x() - prev.center_x();
  const double ty = last.center_y() - prev.center_y();
  const double cx = candidate.center_x() - last.center_x();
  const double cy = candidate.center_y() - last.center_y();
  const double tn = std::hypot(tx, ty);
  const double cn = std::hypot(cx, cy);
  if (tn == 0.0 || cn == 0.0) return 0.0;
  const double cosine = std::clamp((tx * cx + ty * cy) / (tn * cn), -1.0, 1.0);
  return std::acos(cosine) / std::numbers::pi;
}

/// Linear interpolation in center form between two boxes, t in [0, 1].
inline BoundingBox interpolate_box(const BoundingBox& a, const BoundingBox& b, double t) {
  auto lerp = [t](double p, double q) { return p + (q - p) * t; };
  return box_from_center(lerp(a.center_x(), b.center_x()), lerp(a.center_y(), b.center_y()),
                         lerp(a.w, b.w), lerp(a.h, b.h));
}

class Tracker {
 public:
  explicit Tracker(TrackerConfig config) : config_(std::move(config)), kf_(config_.kalman) {
    config_.validate();
  }

  const TrackerConfig& config() const { return config_; }
  const KalmanFilter& filter() const { return kf_; }
  /// Live (not removed) tracklets.
  const std::vector<Tracklet>& tracklets() const { return tracks_; }
  std::optional<int> last_frame() const { return last_frame_; }

  /// Advances every track by one filter step and associates `detections`.
  /// Frame indices only need to increase; each call is one time step.
  /// Returns confirmed tracks that were matched or created this frame,
  /// sorted by track id.
  std::vector<TrackedDetection> step(int frame, std::span<const Detection> detections) {
    validate_input(frame, detections);
    last_frame_ = frame;

    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
      Tracklet& t = tracks_[i];
      const bool missed_last = t.frames_since_update > 0;
      if (missed_last) t.hit_streak = 0;
      t.kf = kf_.predict(t.kf);
      ++t.frames_since_update;
      try {
        const BoundingBox predicted = state_to_box(t.kf);
        BoundingBox anchor = predicted;
        if (config_.kind == TrackerKind::ocsort && config_.oru && missed_last) anchor = t.last_box();
        candidates.push_back({i, anchor});
      } catch (const DegenerateStateError&) {
        t.status = TrackStatus::lost;
      }
    }

    std::vector<std::size_t> high, low;
    for (std::size_t d = 0; d < detections.size(); ++d) {
      const double c = detections[d].confidence;
      if (c >= config_.high_conf_threshold) {
        high.push_back(d);
      } else if (config_.kind == TrackerKind::bytetrack && c >= config_.low_conf_threshold) {
        low.push_back(d);
      }
    }

    std::vector<std::pair<std::size_t, std::size_t>> matched;  // (track index, detection index)
    std::vector<char> candidate_used(candidates.size(), 0);
    std::vector<char> high_used(high.size(), 0);

    auto run_stage = [&](const std::vector<std::size_t>& cand_idx, const std::vector<std::size_t>& det_idx,
                         std::vector<char>* det_used) {
      CostMatrix cost(cand_idx.size(), det_idx.size());
      CostMatrix dist(cand_idx.size(), det_idx.size());
      for (std::size_t a = 0; a < cand_idx.size(); ++a) {
        const Candidate& cand = candidates[cand_idx[a]];
        for (std::size_t b = 0; b < det_idx.size(); ++b) {
          const BoundingBox& box = detections[det_idx[b]].box;
          dist(a, b) = 1.0 - iou(cand.anchor, box);
          cost(a, b) = dist(a, b);
          if (config_.kind == TrackerKind::ocsort && config_.ocm_weight > 0.0)
            cost(a, b) += config_.ocm_weight *
                          direction_cost(tracks_[cand.track].history, config_.ocm_delta_t, box);
        }
      }
      const double gate = config_.iou_gate;
      const AssignmentResult res =
          solve_if(cost, [&](std::size_t a, std::size_t b) { return dist(a, b) <= gate; });
      for (auto [a, b] : res.matches) {
        candidate_used[cand_idx[a]] = 1;
        if (det_used) (*det_used)[b] = 1;
        matched.emplace_back(candidates[cand_idx[a]].track, det_idx[b]);
      }
    };

    std::vector<std::size_t> all_candidates(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) all_candidates[i] = i;
    run_stage(all_candidates, high, &high_used);

    if (!low.empty()) {
      std::vector<std::size_t> remaining;
      for (std::size_t i = 0; i < candidates.size(); ++i)
        if (!candidate_used[i]) remaining.push_back(i);
      run_stage(remaining, low, nullptr);
    }

    for (auto [ti, di] : matched) apply_match(tracks_[ti], detections[di]);

    for (Tracklet& t : tracks_) {
      if (t.frames_since_update == 0) continue;
      if (!t.confirmed) {
        t.status = TrackStatus::removed;
      } else {
        t.status = t.frames_since_update > config_.max_age ? TrackStatus::removed : TrackStatus::lost;
      }
    }
    std::erase_if(tracks_, [](const Tracklet& t) { return t.status == TrackStatus::removed; });

    for (std::size_t b = 0; b < high.size(); ++b)
      if (!high_used[b]) spawn(detections[high[b]]);

    std::vector<TrackedDetection> out;
    for (const Tracklet& t : tracks_)
      if (t.frames_since_update == 0 && t.confirmed) out.push_back(t.history.back());
    std::sort(out.begin(), out.end(),
              [](const TrackedDetection& a, const TrackedDetection& b) { return a.track_id < b.track_id; });
    return out;
  }

 private:
  struct Candidate {
    std::size_t track;
    BoundingBox anchor;
  };

  void validate_input(int frame, std::span<const Detection> detections) const {
    if (frame < 1) throw TrackerInputError("frame index must be >= 1");
    if (last_frame_ && frame <= *last_frame_)
      throw TrackerInputError("frame " + std::to_string(frame) + " is not after frame " +
                              std::to_string(*last_frame_));
    for (const Detection& d : detections) {
      if (d.frame != frame)
        throw TrackerInputError("detection for frame " + std::to_string(d.frame) +
                                " passed to step for frame " + std::to_string(frame));
      if (!d.box.valid()) throw TrackerInputError("detection box must be finite with positive size");
      if (!(d.confidence >= 0.0 && d.confidence <= 1.0))
        throw TrackerInputError("detection confidence must lie in [0, 1]");
    }
  }

  void apply_match(Tracklet& t, const Detection& det) {
    const int missed = t.frames_since_update - 1;
    if (config_.kind == TrackerKind::ocsort && config_.oru && missed > 0) {
      // Re-update: replay the filter along a straight virtual path from the
      // last observation to this one.
      const BoundingBox from = t.last_box();
      KalmanState s = t.kf_at_last_observation;
      for (int i = 1; i <= missed; ++i) {
        const BoundingBox virtual_box = interpolate_box(from, det.box, static_cast<double>(i) / (missed + 1));
        s = kf_.update(kf_.predict(s), virtual_box);
      }
      t.kf = kf_.update(kf_.predict(s), det.box);
    } else {
      t.kf = kf_.update(t.kf, det.box);
    }
    t.kf_at_last_observation = t.kf;
    t.history.push_back({det, t.id});
    t.frames_since_update = 0;
    ++t.hit_streak;
    if (t.hit_streak >= config_.min_hits) t.confirmed = true;
    t.status = t.confirmed ? TrackStatus::active : TrackStatus::tentative;
  }

  void spawn(const Detection& det) {
    Tracklet t;
    t.id = next_id_++;
    t.kf = kf_.init_state(det.box);
    t.kf_at_last_observation = t.kf;
    t.history.push_back({det, t.id});
    t.hit_streak = 1;
    t.confirmed = config_.min_hits <= 1;
    t.status = t.confirmed ? TrackStatus::active : TrackStatus::tentative;
    tracks_.push_back(std::move(t));
  }

  TrackerConfig config_;
  KalmanFilter kf_;
  std::vector<Tracklet> tracks_;
  std::optional<int> last_frame_;
  int next_id_ = 1;
};

}  // namespace wtrack
