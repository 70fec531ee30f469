#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wtrack/metrics.hpp"

namespace wtrack {
namespace {

/// One GT track on frames 1..n with box (10f, 0, 20, 20).
EvalSequence single_track(int n, int id = 1) {
  EvalSequence s;
  for (int f = 1; f <= n; ++f) s[f].push_back({id, {10.0 * f, 0, 20, 20}});
  return s;
}

EvalSequence relabel(EvalSequence s, const std::function<int(int frame, int id)>& fn) {
  for (auto& [f, objs] : s)
    for (auto& o : objs) o.id = fn(f, o.id);
  return s;
}

void expect_report_identities(const MetricsReport& r) {
  const auto& c = r.clear;
  EXPECT_EQ(c.tp + c.fn, c.gt_det);
  EXPECT_EQ(r.identity.idtp + r.identity.idfn, c.gt_det);
  EXPECT_EQ(r.identity.idtp + r.identity.idfp, r.pred_det);
  EXPECT_NEAR(r.mota, 1.0 - static_cast<double>(c.fn + c.fp + c.idsw) / static_cast<double>(c.gt_det), 1e-12);
  const double idf1 = static_cast<double>(r.identity.idtp) /
                      (static_cast<double>(r.identity.idtp) + 0.5 * static_cast<double>(r.identity.idfn) +
                       0.5 * static_cast<double>(r.identity.idfp));
  if (r.identity.idtp > 0) EXPECT_NEAR(r.idf1, idf1, 1e-12);
  for (std::size_t a = 0; a < r.hota_detail.alphas.size(); ++a) {
    EXPECT_GE(r.hota_detail.det_a(a), 0.0);
    EXPECT_LE(r.hota_detail.det_a(a), 1.0);
    EXPECT_GE(r.hota_detail.ass_a(a), 0.0);
    EXPECT_LE(r.hota_detail.ass_a(a), 1.0 + 1e-12);
  }
}

TEST(ClearTest, PerfectTracker) {
  const EvalSequence gt = single_track(10);
  const ClearCounts c = match_clear(gt, gt);
  EXPECT_EQ(c.tp, 10);
  EXPECT_EQ(c.fp + c.fn + c.idsw, 0);
  EXPECT_EQ(mota(c), 1.0);
  EXPECT_EQ(motp(c), 1.0);
}

TEST(ClearTest, SingleIdSwitch) {
  const EvalSequence gt = single_track(10);
  const EvalSequence pred = relabel(gt, [](int f, int) { return f < 6 ? 1 : 2; });
  const ClearCounts c = match_clear(gt, pred);
  EXPECT_EQ(c.idsw, 1);
  EXPECT_EQ(c.fp + c.fn, 0);
  EXPECT_NEAR(mota(c), 0.9, 1e-12);
}

TEST(ClearTest, EmptyPredictions) {
  const EvalSequence gt = single_track(10);
  const ClearCounts c = match_clear(gt, {});
  EXPECT_EQ(c.fn, 10);
  EXPECT_EQ(mota(c), 0.0);
  EXPECT_THROW(motp(c), UndefinedMetricError);
}

TEST(ClearTest, MotaCanBeNegative) {
  const EvalSequence gt = single_track(4);
  EvalSequence pred;
  for (int f = 1; f <= 4; ++f) pred[f] = {{1, {500, 500, 20, 20}}, {2, {700, 700, 20, 20}}};
  EXPECT_LT(mota(match_clear(gt, pred)), 0.0);
}

TEST(ClearTest, NoGroundTruthIsUndefined) {
  EXPECT_THROW(mota(match_clear({}, single_track(3))), UndefinedMetricError);
}

TEST(ClearTest, PersistedMatchIsKeptOverBetterIou) {
  // Frame 2: pred 7 still overlaps GT 1 at IoU >= 0.5, so it keeps the match
  // even though pred 8 is exact; no switch is counted.
  EvalSequence gt, pred;
  gt[1] = {{1, {0, 0, 20, 20}}};
  gt[2] = {{1, {0, 0, 20, 20}}};
  pred[1] = {{7, {0, 0, 20, 20}}};
  pred[2] = {{7, {2, 0, 20, 20}}, {8, {0, 0, 20, 20}}};
  const ClearCounts c = match_clear(gt, pred);
  EXPECT_EQ(c.idsw, 0);
  EXPECT_EQ(c.fp, 1);
}

TEST(IdentityTest, PerfectTracker) {
  const EvalSequence gt = single_track(10);
  EXPECT_EQ(idf1(gt, gt).score, 1.0);
}

TEST(IdentityTest, SplitIdentity) {
  const EvalSequence gt = single_track(10);
  const EvalSequence pred = relabel(gt, [](int f, int) { return f <= 5 ? 1 : 2; });
  const IdentityResult r = idf1(gt, pred);
  EXPECT_EQ(r.counts.idtp, 5);
  EXPECT_EQ(r.counts.idfn, 5);
  EXPECT_EQ(r.counts.idfp, 5);
  EXPECT_EQ(r.score, 0.5);
  EXPECT_EQ(testing::bruteforce_idtp(gt, pred), 5);
}

TEST(IdentityTest, EmptyPredictions) {
  EXPECT_EQ(idf1(single_track(10), {}).score, 0.0);
  EXPECT_EQ(idf1({}, {}).counts.idtp, 0);
}

TEST(HotaTest, PerfectTracker) {
  const EvalSequence gt = single_track(10);
  const HotaResult r = hota(gt, gt);
  EXPECT_NEAR(r.score, 1.0, 1e-12);
  for (std::size_t a = 0; a < r.accumulator.alphas.size(); ++a) {
    EXPECT_EQ(r.accumulator.det_a(a), 1.0);
    EXPECT_NEAR(r.accumulator.ass_a(a), 1.0, 1e-12);
  }
}

TEST(HotaTest, SplitIdentity) {
  const EvalSequence gt = single_track(10);
  const EvalSequence pred = relabel(gt, [](int f, int) { return f <= 5 ? 1 : 2; });
  const HotaResult r = hota(gt, pred);
  for (std::size_t a = 0; a < r.accumulator.alphas.size(); ++a) {
    EXPECT_EQ(r.accumulator.det_a(a), 1.0);
    EXPECT_NEAR(r.accumulator.ass_a(a), 0.5, 1e-12);
  }
  EXPECT_NEAR(r.score, std::sqrt(0.5), 1e-12);
}

TEST(HotaTest, EmptyPredictions) { EXPECT_EQ(hota(single_track(5), {}).score, 0.0); }

TEST(HotaTest, AlphaGrid) {
  const auto a = hota_alphas();
  ASSERT_EQ(a.size(), 19u);
  EXPECT_DOUBLE_EQ(a.front(), 0.05);
  EXPECT_DOUBLE_EQ(a.back(), 0.95);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
}

TEST(EvaluateTest, PerfectSequence) {
  const EvalSequence gt = single_track(10);
  const MetricsReport r = evaluate(gt, gt);
  EXPECT_EQ(r.mota, 1.0);
  EXPECT_EQ(r.motp, 1.0);
  EXPECT_EQ(r.idf1, 1.0);
  EXPECT_NEAR(r.hota, 1.0, 1e-12);
}

TEST(EvaluateTest, PoolingUsesRawCounts) {
  // Sequence A: 10 GT, one switch. Sequence B: 2 GT, both missed.
  const EvalSequence gt_a = single_track(10);
  const EvalSequence pred_a = relabel(gt_a, [](int f, int) { return f < 6 ? 1 : 2; });
  const EvalSequence gt_b = single_track(2);
  MetricsAccumulator acc;
  acc.add(gt_a, pred_a);
  acc.add(gt_b, {});
  const MetricsReport r = acc.report();
  EXPECT_NEAR(r.mota, 1.0 - 3.0 / 12.0, 1e-12);
  EXPECT_NE(r.mota, (0.9 + 0.0) / 2.0);
  EXPECT_EQ(r.clear.gt_det, 12);
}

TEST(EvaluateTest, ReportWithoutMatchesHasZeroMotp) {
  const MetricsReport r = evaluate(single_track(3), {});
  EXPECT_EQ(r.motp, 0.0);
  EXPECT_EQ(r.mota, 0.0);
}

TEST(MetricsPropertyTest, IdentityMatchesBruteforceOnMicroInstances) {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 500; ++trial) {
    const auto [gt, pred] = testing::micro_instance(rng);
    const IdentityResult r = idf1(gt, pred);
    ASSERT_EQ(r.counts.idtp, testing::bruteforce_idtp(gt, pred)) << "trial " << trial;
  }
}

TEST(MetricsPropertyTest, ReportIdentitiesAndBounds) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const auto [gt, pred] = testing::micro_instance(rng);
    if (count_objects(gt) == 0) continue;
    const MetricsReport r = evaluate(gt, pred);
    expect_report_identities(r);
    // Identity pairs induce a per-frame matching, so IDTP is bounded by the
    // per-frame maximum at IoU 0.5 (the HOTA count at that alpha). CLEAR's TP
    // can be lower because kept correspondences block better matchings.
    ASSERT_DOUBLE_EQ(r.hota_detail.alphas[9], 0.5);
    EXPECT_LE(r.identity.idtp, r.hota_detail.tp[9]);
  }
}

TEST(MetricsPropertyTest, ScaleInvariance) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto [gt, pred] = testing::micro_instance(rng);
    if (count_objects(gt) == 0) continue;
    auto scale = [](EvalSequence s, double k) {
      for (auto& [f, objs] : s)
        for (auto& o : objs) o.box = o.box.scaled(k);
      return s;
    };
    const MetricsReport a = evaluate(gt, pred);
    const MetricsReport b = evaluate(scale(gt, 4.0), scale(pred, 4.0));
    EXPECT_NEAR(a.mota, b.mota, 1e-12);
    EXPECT_NEAR(a.motp, b.motp, 1e-12);
    EXPECT_NEAR(a.idf1, b.idf1, 1e-12);
    EXPECT_NEAR(a.hota, b.hota, 1e-12);
  }
}

TEST(MetricsPropertyTest, PredictedIdRenamingInvariance) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto [gt, pred] = testing::micro_instance(rng);
    if (count_objects(gt) == 0) continue;
    const EvalSequence renamed = relabel(pred, [](int, int id) { return 100 - id; });
    const MetricsReport a = evaluate(gt, pred);
    const MetricsReport b = evaluate(gt, renamed);
    EXPECT_NEAR(a.mota, b.mota, 1e-12);
    EXPECT_NEAR(a.motp, b.motp, 1e-12);
    EXPECT_NEAR(a.idf1, b.idf1, 1e-12);
    EXPECT_NEAR(a.hota, b.hota, 1e-12);
  }
}

}  // namespace
}  // namespace wtrack
