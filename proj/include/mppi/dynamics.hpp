#pragma once

#include "mppi/types.hpp"

#include <iosfwd>
#include <memory>
#include <string>

namespace mppi {

/// Per-channel actuator limits.
struct ControlBounds {
  Vec lower;
  Vec upper;

  ControlBounds() : lower(Vec::Constant(2, -1.0)), upper(Vec::Constant(2, 1.0)) {}
  ControlBounds(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) { validate(); }

  void validate() const {
    if (lower.size() != upper.size() || lower.size() < 1) {
      throw std::invalid_argument("ControlBounds: dimension mismatch");
    }
    for (int i = 0; i < lower.size(); ++i) {
      if (!(lower[i] < upper[i])) {
        throw std::invalid_argument("ControlBounds: lower must be < upper");
      }
    }
  }
};

/// Componentwise clamping function g(v); idempotent.
Vec clamp_controls(const Vec& v, const ControlBounds& bounds);
ControlInput clamp_controls(const ControlInput& v, const ControlBounds& bounds);

/// Physical parameters of the lumped-tire bicycle model. The normalized
/// steering/throttle commands are mapped to a steering angle [rad] and a
/// rear longitudinal force [N] by steer_scale and force_scale.
///
/// The mass and axle positions follow the 1:5 platform; inertia, cornering
/// stiffness, friction and load are plausible desk values, not identified
/// ones (see config docs).
struct BicycleParams {
  double mass{22.0};        // M [kg]
  double yaw_inertia{1.8};  // I_z [kg m^2]
  double a{0.45};           // CoM to front axle [m]
  double b{0.35};           // CoM to rear axle [m]
  double stiffness{180.0};  // cornering stiffness C [N/rad]; soft, dirt-like
  double mu{0.65};          // tire-ground friction coefficient
  double load{107.9};       // normal load per lumped tire F_z [N]
  double steer_scale{0.35}; // rad of steering angle per unit command
  double force_scale{35.0}; // N of rear drive force per unit command

  void validate() const {
    const double vals[] = {mass, yaw_inertia, a, b, stiffness, mu, load,
                           steer_scale, force_scale};
    for (double v : vals) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("BicycleParams: all parameters must be positive");
      }
    }
  }
};

/// Brush-tire lateral force for one lumped tire. Saturated regime returns
/// -mu*xi*F_z*sign(alpha); below the crossover slip angle the cubic
/// pre-saturation expression applies. Continuous across the branch point.
/// Throws when |u_F| exceeds the friction circle mu*F_z.
double brush_tire_force(double alpha, double u_F, const BicycleParams& p);

/// One explicit-Euler step of the analytic bicycle truth model. Roll has no
/// analytic equation and is propagated unchanged.
VehicleState step_bicycle_truth(const VehicleState& x, const ControlInput& v,
                                double dt, const BicycleParams& p);

/// Coefficients of the learned basis-function model, mapping the 25 basis
/// values to (roll_dot, vx_dot, vy_dot, theta_ddot).
struct ThetaMatrix {
  Eigen::Matrix<double, 25, 4> coeffs = Eigen::Matrix<double, 25, 4>::Zero();

  static constexpr int kBasis = 25;
  static constexpr int kOutputs = 4;
};

using BasisVec = Eigen::Matrix<double, 25, 1>;

/// Evaluates the 25 basis functions at a dynamic state and input. Slip
/// angles and the vy/vx ratio switch to their degenerate branches when
/// v_x <= 0.1.
BasisVec eval_basis(const Eigen::Vector4d& x_d, const ControlInput& v);

/// One explicit-Euler step of the basis-function model: kinematic block by
/// the body-to-world velocity rotation, dynamic block by Theta^T phi.
VehicleState step_basis_model(const VehicleState& x, const ControlInput& v,
                              double dt, const ThetaMatrix& theta);

/// One sample of a system-identification dataset: dynamic state, input, and
/// the observed dynamic-state derivative.
struct SysidSample {
  Eigen::Vector4d x_d;
  ControlInput v;
  Eigen::Vector4d target;
};

/// Ridge regression of Theta against one-step derivative targets:
/// Theta = (Phi^T Phi + reg I)^{-1} Phi^T Y. With reg = 0 a rank-revealing
/// solve is used and rank deficiency is an error.
ThetaMatrix fit_theta(const std::vector<SysidSample>& dataset, double reg);

/// Two-hidden-layer tanh network, 6 -> 32 -> 32 -> 4 (1412 parameters).
struct MlpWeights {
  Eigen::Matrix<double, 32, 6> w1 = Eigen::Matrix<double, 32, 6>::Zero();
  Eigen::Matrix<double, 32, 1> b1 = Eigen::Matrix<double, 32, 1>::Zero();
  Eigen::Matrix<double, 32, 32> w2 = Eigen::Matrix<double, 32, 32>::Zero();
  Eigen::Matrix<double, 32, 1> b2 = Eigen::Matrix<double, 32, 1>::Zero();
  Eigen::Matrix<double, 4, 32> w3 = Eigen::Matrix<double, 4, 32>::Zero();
  Eigen::Matrix<double, 4, 1> b3 = Eigen::Matrix<double, 4, 1>::Zero();

  static constexpr int kParamCount = 1412;
};

/// Forward pass: identity output layer on top of two tanh hidden layers.
/// Input is the dynamic state concatenated with (steer, throttle).
Eigen::Vector4d mlp_forward(const Eigen::Vector4d& x_d, const ControlInput& v,
                            const MlpWeights& w);

/// One explicit-Euler step using the network as the dynamic-block derivative.
VehicleState step_mlp_model(const VehicleState& x, const ControlInput& v,
                            double dt, const MlpWeights& w);

/// Forward-model interface shared by the truth, basis and network models.
class VehicleModel {
 public:
  virtual ~VehicleModel() = default;
  virtual VehicleState step(const VehicleState& x, const ControlInput& v,
                            double dt) const = 0;
};

class BicycleTruthModel final : public VehicleModel {
 public:
  explicit BicycleTruthModel(BicycleParams p) : params_(p) { params_.validate(); }
  VehicleState step(const VehicleState& x, const ControlInput& v,
                    double dt) const override {
    return step_bicycle_truth(x, v, dt, params_);
  }
  const BicycleParams& params() const { return params_; }

 private:
  BicycleParams params_;
};

class BasisFunctionModel final : public VehicleModel {
 public:
  explicit BasisFunctionModel(ThetaMatrix theta) : theta_(std::move(theta)) {}
  VehicleState step(const VehicleState& x, const ControlInput& v,
                    double dt) const override {
    return step_basis_model(x, v, dt, theta_);
  }
  const ThetaMatrix& theta() const { return theta_; }

 private:
  ThetaMatrix theta_;
};

class MlpModel final : public VehicleModel {
 public:
  explicit MlpModel(MlpWeights w) : weights_(std::move(w)) {}
  VehicleState step(const VehicleState& x, const ControlInput& v,
                    double dt) const override {
    return step_mlp_model(x, v, dt, weights_);
  }

 private:
  MlpWeights weights_;
};

// File formats: Theta is 25 rows x 4 whitespace-separated values; MLP files
// start with the four layer sizes followed by row-major weight matrices and
// bias vectors; sysid datasets have one "4 state + 2 input + 4 target" row
// per sample (whitespace or comma separated, '#' comments allowed).
ThetaMatrix load_theta(const std::string& path);
void save_theta(const ThetaMatrix& theta, const std::string& path);
MlpWeights load_mlp(const std::string& path);
void save_mlp(const MlpWeights& w, const std::string& path);
std::vector<SysidSample> load_sysid_dataset(const std::string& path);
void save_sysid_dataset(const std::vector<SysidSample>& rows, const std::string& path);

}  // namespace mppi
