#pragma once

// Constant-velocity Kalman filter over (cx, cy, w, h) box state.
//
// State layout: [cx, cy, w, h, vcx, vcy, vw, vh], one step per frame.
// Noise standard deviations scale with the box height so the filter behaves
// the same for near and far targets.

#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

#include "wtrack/geometry.hpp"

namespace wtrack {

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateMatrix = Eigen::Matrix<double, 8, 8>;
using MeasurementVector = Eigen::Matrix<double, 4, 1>;
using MeasurementMatrix = Eigen::Matrix<double, 4, 4>;

struct KalmanState {
  StateVector mean = StateVector::Zero();
  StateMatrix covariance = StateMatrix::Identity();
};

/// Raised when a state cannot be expressed as a box (w <= 0 or h <= 0).
class DegenerateStateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct KalmanConfig {
  // Multipliers on box height.
  double std_weight_position = 1.0 / 20.0;
  double std_weight_velocity = 1.0 / 160.0;
  double std_weight_measurement = 1.0 / 20.0;
  // Initial velocity is unknown, so its spread starts well above position's.
  double std_weight_initial_velocity = 1.0 / 2.0;
  // Replace the height-scaled schedules with fixed matrices when set.
  std::optional<StateMatrix> process_noise;
  std::optional<MeasurementMatrix> measurement_noise;
};

inline MeasurementVector to_measurement(const BoundingBox& box) {
  return {box.center_x(), box.center_y(), box.w, box.h};
}

class KalmanFilter {
 public:
  KalmanFilter() : KalmanFilter(KalmanConfig{}) {}
  explicit KalmanFilter(KalmanConfig config) : config_(std::move(config)) {
    transition_.setIdentity();
    for (int i = 0; i < 4; ++i) transition_(i, i + 4) = 1.0;
    observation_.setZero();
    for (int i = 0; i < 4; ++i) observation_(i, i) = 1.0;
  }

  const KalmanConfig& config() const { return config_; }

  KalmanState init_state(const BoundingBox& box) const {
    KalmanState s;
    s.mean.head<4>() = to_measurement(box);
    s.mean.tail<4>().setZero();
    const double pos = config_.std_weight_position * box.h;
    const double vel = config_.std_weight_initial_velocity * box.h;
    StateVector stds;
    stds << pos, pos, pos, pos, vel, vel, vel, vel;
    s.covariance = stds.array().square().matrix().asDiagonal();
    return s;
  }

  KalmanState predict(const KalmanState& s) const {
    KalmanState out;
    out.mean = transition_ * s.mean;
    out.covariance = transition_ * s.covariance * transition_.transpose() + process_noise(s);
    symmetrize(out.covariance);
    return out;
  }

  KalmanState update(const KalmanState& s, const BoundingBox& z) const {
    const MeasurementMatrix r = measurement_noise(s);
    const MeasurementMatrix innovation_cov =
        observation_ * s.covariance * observation_.transpose() + r;
    // K = P Hᵀ S⁻¹, via a solve on the symmetric S.
    const Eigen::Matrix<double, 8, 4> gain =
        innovation_cov.ldlt().solve(observation_ * s.covariance).transpose();
    const MeasurementVector innovation = to_measurement(z) - observation_ * s.mean;

    KalmanState out;
    out.mean = s.mean + gain * innovation;
    // Joseph form keeps the posterior symmetric positive semidefinite.
    const StateMatrix a = StateMatrix::Identity() - gain * observation_;
    out.covariance = a * s.covariance * a.transpose() + gain * r * gain.transpose();
    symmetrize(out.covariance);
    return out;
  }

  MeasurementVector innovation(const KalmanState& s, const BoundingBox& z) const {
    return to_measurement(z) - observation_ * s.mean;
  }

 private:
  static void symmetrize(StateMatrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

  StateMatrix process_noise(const KalmanState& s) const {
    if (config_.process_noise) return *config_.process_noise;
    const double h = s.mean(3);
    const double pos = config_.std_weight_position * h;
    const double vel = config_.std_weight_velocity * h;
    StateVector stds;
    stds << pos, pos, pos, pos, vel, vel, vel, vel;
    return stds.array().square().matrix().asDiagonal();
  }

  MeasurementMatrix measurement_noise(const KalmanState& s) const {
    if (config_.measurement_noise) return *config_.measurement_noise;
    const double sd = config_.std_weight_measurement * s.mean(3);
    return MeasurementMatrix::Identity() * (sd * sd);
  }

  KalmanConfig config_;
  StateMatrix transition_;
  Eigen::Matrix<double, 4, 8> observation_;
};

inline BoundingBox state_to_box(const KalmanState& s) {
  const double w = s.mean(2);
  const double h = s.mean(3);
  if (!(w > 0.0) || !(h > 0.0)) throw DegenerateStateError("kalman state has non-positive width or height");
  return box_from_center(s.mean(0), s.mean(1), w, h);
}

}  // namespace wtrack
