#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mppi {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline bool all_finite(const Mat& m) { return m.allFinite(); }

/// Seven-dimensional vehicle state. The first three entries are the
/// kinematic block (world position and heading), the remaining four the
/// dynamic block (roll, body-frame velocities, heading rate).
struct VehicleState {
  double p_x{0.0};        // world x position [m]
  double p_y{0.0};        // world y position [m]
  double theta{0.0};      // heading [rad]
  double roll{0.0};       // roll angle [rad]
  double v_x{0.0};        // longitudinal body-frame velocity [m/s]
  double v_y{0.0};        // lateral body-frame velocity [m/s]
  double theta_dot{0.0};  // heading rate [rad/s]

  static constexpr int kDim = 7;

  bool finite() const {
    return std::isfinite(p_x) && std::isfinite(p_y) && std::isfinite(theta) &&
           std::isfinite(roll) && std::isfinite(v_x) && std::isfinite(v_y) &&
           std::isfinite(theta_dot);
  }

  // dynamic sub-state (roll, v_x, v_y, theta_dot)
  Eigen::Vector4d dynamic_block() const { return {roll, v_x, v_y, theta_dot}; }
};

using StateVec = Eigen::Matrix<double, VehicleState::kDim, 1>;

/// Lossless, order-preserving conversion to a flat 7-vector.
inline StateVec flatten_state(const VehicleState& s) {
  StateVec v;
  v << s.p_x, s.p_y, s.theta, s.roll, s.v_x, s.v_y, s.theta_dot;
  return v;
}

/// Inverse of flatten_state. Rejects non-finite input.
inline VehicleState unflatten_state(const StateVec& v) {
  if (!v.allFinite()) {
    throw std::invalid_argument("unflatten_state: non-finite entry");
  }
  return VehicleState{v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

/// Normalized actuator command pair.
struct ControlInput {
  double steer{0.0};
  double throttle{0.0};

  static constexpr int kDim = 2;

  Eigen::Vector2d vec() const { return {steer, throttle}; }
  static ControlInput from_vec(const Eigen::Vector2d& v) { return {v[0], v[1]}; }
};

/// Open-loop mean control sequence U, one row per timestep.
struct ControlPlan {
  Mat values;  // T x m

  ControlPlan() = default;
  ControlPlan(int horizon, int dim) : values(Mat::Zero(horizon, dim)) {
    if (horizon < 1 || dim < 1) {
      throw std::invalid_argument("ControlPlan: horizon and dim must be >= 1");
    }
  }
  explicit ControlPlan(Mat v) : values(std::move(v)) {
    if (values.rows() < 1 || values.cols() < 1 || !values.allFinite()) {
      throw std::invalid_argument("ControlPlan: needs a finite T x m matrix, T >= 1");
    }
  }

  int horizon() const { return static_cast<int>(values.rows()); }
  int dim() const { return static_cast<int>(values.cols()); }
};

/// Sampling configuration shared by the optimizer and the samplers.
/// `sigma_diag` holds the diagonal of the (diagonal) covariance, i.e.
/// per-channel variances.
struct SamplingParams {
  int samples{1200};            // K
  int horizon_steps{80};        // T
  double dt{0.025};             // step duration [s]
  Vec sigma_diag;               // m variances, all > 0
  double lambda{12.5};          // inverse temperature, > 0
  double gamma{0.1};            // control-cost coefficient, >= 0
  double explore_fraction{0.01};
  Mat base_mean;                // optional T x m nominal sequence, empty = zero
  std::uint64_t seed{0};

  int dim() const { return static_cast<int>(sigma_diag.size()); }

  void validate() const {
    if (samples < 1) throw std::invalid_argument("SamplingParams: samples must be >= 1");
    if (horizon_steps < 1) throw std::invalid_argument("SamplingParams: horizon_steps must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("SamplingParams: dt must be > 0");
    if (sigma_diag.size() < 1 || !(sigma_diag.minCoeff() > 0.0) || !sigma_diag.allFinite()) {
      throw std::invalid_argument("SamplingParams: sigma_diag entries must be finite and > 0");
    }
    if (!(lambda > 0.0)) throw std::invalid_argument("SamplingParams: lambda must be > 0");
    if (!(gamma >= 0.0)) throw std::invalid_argument("SamplingParams: gamma must be >= 0");
    if (!(explore_fraction >= 0.0 && explore_fraction < 1.0)) {
      throw std::invalid_argument("SamplingParams: explore_fraction must be in [0, 1)");
    }
    if (base_mean.size() != 0 &&
        (base_mean.rows() != horizon_steps || base_mean.cols() != sigma_diag.size() ||
         !base_mean.allFinite())) {
      throw std::invalid_argument("SamplingParams: base_mean must be a finite T x m matrix");
    }
  }
};

/// K sampled noise sequences plus per-sample exploration flags. Flagged
/// samples are rolled out around zero instead of the current plan.
struct PerturbationBatch {
  std::vector<Mat> eps;                 // K entries of T x m
  std::vector<std::uint8_t> zero_mean_flag;  // K entries

  int samples() const { return static_cast<int>(eps.size()); }
};

}  // namespace mppi
