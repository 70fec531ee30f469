#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wtrack/kalman.hpp"

namespace wtrack {
namespace {

void expect_symmetric_psd(const StateMatrix& p) {
  EXPECT_LE((p - p.transpose()).cwiseAbs().maxCoeff(), 1e-9);
  const Eigen::SelfAdjointEigenSolver<StateMatrix> eig(p);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-9);
}

TEST(KalmanInitTest, CenterConversion) {
  const KalmanFilter kf;
  StateVector expected;
  expected << 5, 5, 10, 10, 0, 0, 0, 0;
  EXPECT_EQ(kf.init_state({0, 0, 10, 10}).mean, expected);
  expected << 12, 24, 4, 8, 0, 0, 0, 0;
  EXPECT_EQ(kf.init_state({10, 20, 4, 8}).mean, expected);
}

TEST(KalmanInitTest, DiagonalWithLargeVelocitySpread) {
  const KalmanFilter kf;
  const KalmanState s = kf.init_state({3, 4, 20, 40});
  expect_symmetric_psd(s.covariance);
  EXPECT_TRUE(s.covariance.isDiagonal());
  for (int i = 0; i < 4; ++i) EXPECT_GT(s.covariance(i + 4, i + 4), s.covariance(i, i));
}

TEST(KalmanPredictTest, ZeroVelocityFixedPoint) {
  KalmanConfig cfg;
  cfg.process_noise = StateMatrix::Zero();
  const KalmanFilter kf(cfg);
  const KalmanState s = kf.init_state({1, 2, 3, 4});
  EXPECT_EQ(kf.predict(s).mean, s.mean);
}

TEST(KalmanPredictTest, OneEulerStep) {
  const KalmanFilter kf;
  KalmanState s;
  s.mean << 0, 0, 2, 2, 1, 0, 0, 0;
  const KalmanState p = kf.predict(s);
  EXPECT_EQ(p.mean(0), 1.0);
  EXPECT_EQ(p.mean(1), 0.0);
}

TEST(KalmanUpdateTest, ExactMeasurementLimit) {
  KalmanConfig cfg;
  cfg.measurement_noise = MeasurementMatrix::Identity() * 1e-9;
  const KalmanFilter kf(cfg);
  const KalmanState s = kf.predict(kf.init_state({0, 0, 10, 20}));
  const BoundingBox z{3, -2, 12, 18};
  const KalmanState u = kf.update(s, z);
  EXPECT_NEAR((u.mean.head<4>() - to_measurement(z)).cwiseAbs().maxCoeff(), 0.0, 1e-6);
}

TEST(KalmanUpdateTest, ZeroInnovationKeepsMean) {
  const KalmanFilter kf;
  KalmanState s = kf.init_state({5, 5, 10, 20});
  s.mean(4) = 1.5;
  s = kf.predict(s);
  const KalmanState u = kf.update(s, state_to_box(s));
  EXPECT_LE((u.mean - s.mean).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(KalmanUpdateTest, PositionVarianceDoesNotGrow) {
  const KalmanFilter kf;
  const KalmanState s = kf.predict(kf.init_state({0, 0, 10, 20}));
  const KalmanState u = kf.update(s, {1, 1, 10, 20});
  const Eigen::Matrix4d diff = s.covariance.topLeftCorner<4, 4>() - u.covariance.topLeftCorner<4, 4>();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(diff);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-9);
}

TEST(KalmanOracleTest, MatchesScalarFilterOnRandomSequences) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-50.0, 50.0), var(0.01, 5.0);
  for (int seq = 0; seq < 100; ++seq) {
    const double q_pos = var(rng), q_vel = var(rng), r = var(rng);
    StateMatrix q = StateMatrix::Identity();
    q(0, 0) = q_pos;
    q(4, 4) = q_vel;
    MeasurementMatrix rm = MeasurementMatrix::Identity();
    rm(0, 0) = r;
    KalmanConfig cfg;
    cfg.process_noise = q;
    cfg.measurement_noise = rm;
    const KalmanFilter kf(cfg);

    testing::ScalarKalman oracle;
    oracle.x = u(rng);
    oracle.v = u(rng) / 10.0;
    oracle.pxx = var(rng);
    oracle.pvv = var(rng);

    KalmanState s;
    s.mean << oracle.x, 0, 10, 10, oracle.v, 0, 0, 0;
    s.covariance.setIdentity();
    s.covariance(0, 0) = oracle.pxx;
    s.covariance(4, 4) = oracle.pvv;

    for (int step = 0; step < 30; ++step) {
      s = kf.predict(s);
      oracle.predict(q_pos, q_vel);
      ASSERT_NEAR(s.mean(0), oracle.x, 1e-10);
      ASSERT_NEAR(s.covariance(0, 0), oracle.pxx, 1e-10);
      const double z = u(rng);
      s = kf.update(s, box_from_center(z, 0, 10, 10));
      oracle.update(z, r);
      ASSERT_NEAR(s.mean(0), oracle.x, 1e-10);
      ASSERT_NEAR(s.mean(4), oracle.v, 1e-10);
      ASSERT_NEAR(s.covariance(0, 0), oracle.pxx, 1e-10);
      ASSERT_NEAR(s.covariance(0, 4), oracle.pxv, 1e-10);
      ASSERT_NEAR(s.covariance(4, 4), oracle.pvv, 1e-10);
    }
  }
}

TEST(KalmanPropertyTest, CovarianceStaysSymmetricPsd) {
  const KalmanFilter kf;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> pos(-200, 200), size(5, 200), jitter(-5, 5);
  for (int trial = 0; trial < 1000; ++trial) {
    KalmanState s = kf.init_state({pos(rng), pos(rng), size(rng), size(rng)});
    for (int step = 0; step < 3; ++step) {
      s = kf.predict(s);
      expect_symmetric_psd(s.covariance);
      const BoundingBox pred = state_to_box(s);
      s = kf.update(s, pred.translated(jitter(rng), jitter(rng)));
      expect_symmetric_psd(s.covariance);
      EXPECT_GT(s.mean(2), 0.0);
      EXPECT_GT(s.mean(3), 0.0);
    }
  }
}

TEST(KalmanPropertyTest, RepeatedUpdateConverges) {
  const KalmanFilter kf;
  KalmanState s = kf.predict(kf.init_state({0, 0, 20, 40}));
  const BoundingBox z{6, -3, 22, 38};
  double prev = kf.innovation(s, z).norm();
  for (int i = 0; i < 50; ++i) {
    s = kf.update(s, z);
    const double now = kf.innovation(s, z).norm();
    EXPECT_LE(now, prev + 1e-12);
    prev = now;
  }
}

TEST(StateToBoxTest, RoundTrip) {
  const KalmanFilter kf;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-100, 100), size(1, 100);
  for (int i = 0; i < 100; ++i) {
    const BoundingBox b{pos(rng), pos(rng), size(rng), size(rng)};
    const BoundingBox back = state_to_box(kf.init_state(b));
    EXPECT_NEAR(back.x, b.x, 1e-12);
    EXPECT_NEAR(back.y, b.y, 1e-12);
    EXPECT_NEAR(back.w, b.w, 1e-12);
    EXPECT_NEAR(back.h, b.h, 1e-12);
  }
}

TEST(StateToBoxTest, CenterForm) {
  KalmanState s;
  s.mean << 5, 5, 10, 10, 0, 0, 0, 0;
  EXPECT_EQ(state_to_box(s), (BoundingBox{0, 0, 10, 10}));
}

TEST(StateToBoxTest, DegenerateWidth) {
  KalmanState s;
  s.mean << 5, 5, 0, 10, 0, 0, 0, 0;
  EXPECT_THROW(state_to_box(s), DegenerateStateError);
}

}  // namespace
}  // namespace wtrack
