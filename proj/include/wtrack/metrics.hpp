#pragma once

// MOT evaluation: CLEAR (MOTA, MOTP), identity (IDF1) and HOTA.
//
// All matchings use IoU similarity. MOTP is the mean IoU of CLEAR true
// positives (higher is better). HOTA averages sqrt(DetA * AssA) over the
// 19 thresholds 0.05, 0.10, ..., 0.95.

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wtrack/assignment.hpp"
#include "wtrack/geometry.hpp"
#include "wtrack/mot_io.hpp"
#include "wtrack/tracker.hpp"

namespace wtrack {

struct LabeledBox {
  int id = 0;
  BoundingBox box;
};

/// Objects per frame, keyed by frame index.
using EvalSequence = std::map<int, std::vector<LabeledBox>>;

inline EvalSequence to_eval_sequence(const SequenceData& seq) {
  EvalSequence out;
  for (const MotRecord& r : seq.records)
    if (r.evaluable) out[r.frame].push_back({r.id, r.box});
  return out;
}

inline EvalSequence to_eval_sequence(std::span<const TrackedDetection> tracked) {
  EvalSequence out;
  for (const TrackedDetection& t : tracked) out[t.detection.frame].push_back({t.track_id, t.detection.box});
  return out;
}

inline std::int64_t count_objects(const EvalSequence& seq) {
  std::int64_t n = 0;
  for (const auto& [f, objs] : seq) n += static_cast<std::int64_t>(objs.size());
  return n;
}

/// A metric whose denominator is zero.
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ClearCounts {
  std::int64_t gt_det = 0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t idsw = 0;
  double similarity_sum = 0.0;

  ClearCounts& operator+=(const ClearCounts& o) {
    gt_det += o.gt_det;
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    idsw += o.idsw;
    similarity_sum += o.similarity_sum;
    return *this;
  }
};

struct IdentityCounts {
  std::int64_t idtp = 0;
  std::int64_t idfp = 0;
  std::int64_t idfn = 0;

  IdentityCounts& operator+=(const IdentityCounts& o) {
    idtp += o.idtp;
    idfp += o.idfp;
    idfn += o.idfn;
    return *this;
  }
};

namespace detail {

inline std::vector<std::vector<double>> frame_ious(const std::vector<LabeledBox>& gt,
                                                   const std::vector<LabeledBox>& pred) {
  std::vector<std::vector<double>> m(gt.size(), std::vector<double>(pred.size()));
  for (std::size_t i = 0; i < gt.size(); ++i)
    for (std::size_t j = 0; j < pred.size(); ++j) m[i][j] = iou(gt[i].box, pred[j].box);
  return m;
}

/// Maximum number of pairs with IoU >= threshold, ties broken by the larger
/// IoU sum; rows/cols flagged in the skip vectors are excluded.
inline AssignmentResult max_iou_matching(const std::vector<std::vector<double>>& ious, std::size_t cols,
                                         double threshold, const std::vector<char>& skip_rows = {},
                                         const std::vector<char>& skip_cols = {}) {
  CostMatrix cost(ious.size(), cols);
  for (std::size_t i = 0; i < ious.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) cost(i, j) = 1.0 - ious[i][j];
  return solve_if(cost, [&](std::size_t i, std::size_t j) {
    if (!skip_rows.empty() && skip_rows[i]) return false;
    if (!skip_cols.empty() && skip_cols[j]) return false;
    return ious[i][j] >= threshold;
  });
}

template <typename Fn>
void for_each_frame(const EvalSequence& gt, const EvalSequence& pred, Fn fn) {
  static const std::vector<LabeledBox> kEmpty;
  auto g = gt.begin();
  auto p = pred.begin();
  while (g != gt.end() || p != pred.end()) {
    int frame;
    if (p == pred.end() || (g != gt.end() && g->first < p->first)) {
      frame = g->first;
    } else {
      frame = p->first;
    }
    const auto& gts = (g != gt.end() && g->first == frame) ? (g++)->second : kEmpty;
    const auto& preds = (p != pred.end() && p->first == frame) ? (p++)->second : kEmpty;
    fn(frame, gts, preds);
  }
}

}  // namespace detail

/// CLEAR-MOT matching. Correspondences from the immediately preceding frame
/// are kept while their IoU stays >= threshold; the rest is matched
/// optimally. An ID switch is counted when a GT object's matched prediction
/// id differs from the one it was last matched to.
inline ClearCounts match_clear(const EvalSequence& gt, const EvalSequence& pred, double threshold = 0.5) {
  ClearCounts c;
  std::map<int, int> last_match;  // gt id -> pred id, most recent ever
  std::map<int, int> prev_frame_match;
  int prev_frame = -1;

  detail::for_each_frame(gt, pred, [&](int frame, const auto& gts, const auto& preds) {
    if (frame != prev_frame + 1) prev_frame_match.clear();
    prev_frame = frame;

    const auto ious = detail::frame_ious(gts, preds);
    std::vector<char> gt_used(gts.size(), 0), pred_used(preds.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;

    for (std::size_t i = 0; i < gts.size(); ++i) {
      auto it = prev_frame_match.find(gts[i].id);
      if (it == prev_frame_match.end()) continue;
      for (std::size_t j = 0; j < preds.size(); ++j) {
        if (pred_used[j] || preds[j].id != it->second || ious[i][j] < threshold) continue;
        gt_used[i] = pred_used[j] = 1;
        pairs.emplace_back(i, j);
        break;
      }
    }
    const AssignmentResult res = detail::max_iou_matching(ious, preds.size(), threshold, gt_used, pred_used);
    pairs.insert(pairs.end(), res.matches.begin(), res.matches.end());

    prev_frame_match.clear();
    for (auto [i, j] : pairs) {
      const int g = gts[i].id;
      const int p = preds[j].id;
      ++c.tp;
      c.similarity_sum += ious[i][j];
      auto it = last_match.find(g);
      if (it != last_match.end() && it->second != p) ++c.idsw;
      last_match[g] = p;
      prev_frame_match[g] = p;
    }
    const auto matched = static_cast<std::int64_t>(pairs.size());
    c.gt_det += static_cast<std::int64_t>(gts.size());
    c.fn += static_cast<std::int64_t>(gts.size()) - matched;
    c.fp += static_cast<std::int64_t>(preds.size()) - matched;
  });
  return c;
}

inline double mota(const ClearCounts& c) {
  if (c.gt_det == 0) throw UndefinedMetricError("MOTA undefined without ground-truth detections");
  return 1.0 - static_cast<double>(c.fn + c.fp + c.idsw) / static_cast<double>(c.gt_det);
}

inline double motp(const ClearCounts& c) {
  if (c.tp == 0) throw UndefinedMetricError("MOTP undefined without true positives");
  return c.similarity_sum / static_cast<double>(c.tp);
}

inline double idf1_score(const IdentityCounts& c) {
  const double denom = static_cast<double>(c.idtp) + 0.5 * static_cast<double>(c.idfn) +
                       0.5 * static_cast<double>(c.idfp);
  return denom > 0.0 ? static_cast<double>(c.idtp) / denom : 0.0;
}

struct IdentityResult {
  double score = 0.0;
  IdentityCounts counts;
};

/// Identity matching: every GT trajectory is paired with at most one
/// predicted trajectory so that the number of frames where the pair overlaps
/// at IoU >= threshold is maximal overall.
inline IdentityResult idf1(const EvalSequence& gt, const EvalSequence& pred, double threshold = 0.5) {
  std::map<int, std::size_t> gt_index, pred_index;
  for (const auto& [f, objs] : gt)
    for (const auto& o : objs) gt_index.try_emplace(o.id, gt_index.size());
  for (const auto& [f, objs] : pred)
    for (const auto& o : objs) pred_index.try_emplace(o.id, pred_index.size());

  std::vector<std::int64_t> overlap(gt_index.size() * pred_index.size(), 0);
  detail::for_each_frame(gt, pred, [&](int, const auto& gts, const auto& preds) {
    for (const auto& g : gts)
      for (const auto& p : preds)
        if (iou(g.box, p.box) >= threshold) ++overlap[gt_index[g.id] * pred_index.size() + pred_index[p.id]];
  });

  CostMatrix cost(gt_index.size(), pred_index.size());
  for (std::size_t i = 0; i < gt_index.size(); ++i)
    for (std::size_t j = 0; j < pred_index.size(); ++j)
      cost(i, j) = -static_cast<double>(overlap[i * pred_index.size() + j]);
  // Plain min-cost over all pairs: zero-overlap pairs only pad the matching,
  // so this maximizes total overlap rather than the number of pairs.
  const AssignmentResult res = solve(cost);

  IdentityResult out;
  for (auto [i, j] : res.matches) out.counts.idtp += overlap[i * pred_index.size() + j];
  out.counts.idfn = count_objects(gt) - out.counts.idtp;
  out.counts.idfp = count_objects(pred) - out.counts.idtp;
  out.score = idf1_score(out.counts);
  return out;
}

inline std::vector<double> hota_alphas() {
  std::vector<double> a;
  for (int i = 1; i <= 19; ++i) a.push_back(static_cast<double>(i) / 20.0);
  return a;
}

/// Per-threshold HOTA sums. Poolable across sequences by merge().
struct HotaAccumulator {
  std::vector<double> alphas = hota_alphas();
  std::vector<std::int64_t> tp = std::vector<std::int64_t>(alphas.size(), 0);
  std::vector<std::int64_t> fn = std::vector<std::int64_t>(alphas.size(), 0);
  std::vector<std::int64_t> fp = std::vector<std::int64_t>(alphas.size(), 0);
  std::vector<double> association_sum = std::vector<double>(alphas.size(), 0.0);  // sum of A(c) over TPs

  void merge(const HotaAccumulator& o) {
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      tp[a] += o.tp[a];
      fn[a] += o.fn[a];
      fp[a] += o.fp[a];
      association_sum[a] += o.association_sum[a];
    }
  }

  double det_a(std::size_t a) const {
    const auto denom = tp[a] + fn[a] + fp[a];
    return denom > 0 ? static_cast<double>(tp[a]) / static_cast<double>(denom) : 0.0;
  }
  double ass_a(std::size_t a) const {
    return tp[a] > 0 ? association_sum[a] / static_cast<double>(tp[a]) : 0.0;
  }
  double hota(std::size_t a) const { return std::sqrt(det_a(a) * ass_a(a)); }

  double mean_det_a() const { return mean([this](std::size_t a) { return det_a(a); }); }
  double mean_ass_a() const { return mean([this](std::size_t a) { return ass_a(a); }); }
  double score() const { return mean([this](std::size_t a) { return hota(a); }); }

 private:
  template <typename Fn>
  double mean(Fn per_alpha) const {
    double s = 0.0;
    for (std::size_t a = 0; a < alphas.size(); ++a) s += per_alpha(a);
    return s / static_cast<double>(alphas.size());
  }
};

struct HotaResult {
  double score = 0.0;
  HotaAccumulator accumulator;
};

inline HotaResult hota(const EvalSequence& gt, const EvalSequence& pred) {
  HotaResult out;
  HotaAccumulator& acc = out.accumulator;

  std::map<int, std::int64_t> gt_len, pred_len;
  for (const auto& [f, objs] : gt)
    for (const auto& o : objs) ++gt_len[o.id];
  for (const auto& [f, objs] : pred)
    for (const auto& o : objs) ++pred_len[o.id];

  for (std::size_t a = 0; a < acc.alphas.size(); ++a) {
    const double alpha = acc.alphas[a];
    std::map<std::pair<int, int>, std::int64_t> pair_count;
    detail::for_each_frame(gt, pred, [&](int, const auto& gts, const auto& preds) {
      const auto ious = detail::frame_ious(gts, preds);
      const AssignmentResult res = detail::max_iou_matching(ious, preds.size(), alpha);
      for (auto [i, j] : res.matches) ++pair_count[{gts[i].id, preds[j].id}];
      const auto matched = static_cast<std::int64_t>(res.matches.size());
      acc.tp[a] += matched;
      acc.fn[a] += static_cast<std::int64_t>(gts.size()) - matched;
      acc.fp[a] += static_cast<std::int64_t>(preds.size()) - matched;
    });
    for (const auto& [key, tpa] : pair_count) {
      const auto denom = gt_len[key.first] + pred_len[key.second] - tpa;
      acc.association_sum[a] += static_cast<double>(tpa) * static_cast<double>(tpa) / static_cast<double>(denom);
    }
  }
  out.score = acc.score();
  return out;
}

struct MetricsReport {
  double mota = 0.0;
  double motp = 0.0;
  double idf1 = 0.0;
  double hota = 0.0;
  double det_a = 0.0;
  double ass_a = 0.0;
  ClearCounts clear;
  IdentityCounts identity;
  HotaAccumulator hota_detail;
  std::int64_t pred_det = 0;
};

/// Pools raw counts over any number of sequences.
class MetricsAccumulator {
 public:
  void add(const EvalSequence& gt, const EvalSequence& pred) {
    clear_ += match_clear(gt, pred, 0.5);
    identity_ += idf1(gt, pred, 0.5).counts;
    hota_.merge(hota(gt, pred).accumulator);
    pred_det_ += count_objects(pred);
  }

  /// MOTP is reported as 0 when nothing was matched.
  MetricsReport report() const {
    MetricsReport r;
    r.clear = clear_;
    r.identity = identity_;
    r.hota_detail = hota_;
    r.pred_det = pred_det_;
    r.mota = wtrack::mota(clear_);
    r.motp = clear_.tp > 0 ? wtrack::motp(clear_) : 0.0;
    r.idf1 = idf1_score(identity_);
    r.hota = hota_.score();
    r.det_a = hota_.mean_det_a();
    r.ass_a = hota_.mean_ass_a();
    return r;
  }

 private:
  ClearCounts clear_;
  IdentityCounts identity_;
  HotaAccumulator hota_;
  std::int64_t pred_det_ = 0;
};

inline MetricsReport evaluate(const EvalSequence& gt, const EvalSequence& pred) {
  MetricsAccumulator acc;
  acc.add(gt, pred);
  return acc.report();
}

}  // namespace wtrack
