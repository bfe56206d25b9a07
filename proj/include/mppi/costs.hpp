#pragma once

#include "mppi/dynamics.hpp"
#include "mppi/types.hpp"

#include <string>

namespace mppi {

/// Gridded track cost h(p_x, p_y), row-major, bilinear lookup.
struct CostMap {
  int width{0};
  int height{0};
  double x0{0.0};        // world position of the (0,0) cell centre
  double y0{0.0};
  double resolution{1.0};  // metres per cell
  std::vector<double> values;

  static constexpr double kCap = 2.5;

  double at(int ix, int iy) const { return values[static_cast<size_t>(iy) * width + ix]; }
  double& at(int ix, int iy) { return values[static_cast<size_t>(iy) * width + ix]; }

  void validate() const {
    if (width < 2 || height < 2) {
      throw std::invalid_argument("CostMap: width and height must be >= 2");
    }
    if (!(resolution > 0.0)) throw std::invalid_argument("CostMap: resolution must be > 0");
    if (values.size() != static_cast<size_t>(width) * height) {
      throw std::invalid_argument("CostMap: value count mismatch");
    }
    for (double v : values) {
      if (!std::isfinite(v) || std::abs(v) > kCap) {
        throw std::invalid_argument("CostMap: values must be finite and within +-2.5");
      }
    }
  }
};

/// Bilinear interpolation of the 4 surrounding cells; out-of-range queries
/// clamp to the edge cells.
double costmap_lookup(const CostMap& map, double p_x, double p_y);

/// Weights and thresholds of the driving cost. alpha_* defaults are tuned
/// values, not identified ones.
struct CostParams {
  double alpha_track{100.0};
  double alpha_speed{4.25};
  double alpha_stab{10.0};
  double v_des{6.0};               // target forward speed [m/s]
  double impulse{10000.0};         // hard-penalty magnitude
  double decay{0.9};               // per-step decay of the boundary impulse
  double boundary_threshold{0.99}; // map value counted as off-track
  double slip_limit{0.75};         // [rad]

  void validate() const {
    if (!(alpha_track >= 0.0 && alpha_speed >= 0.0 && alpha_stab >= 0.0)) {
      throw std::invalid_argument("CostParams: weights must be >= 0");
    }
    if (!(decay > 0.0 && decay <= 1.0)) {
      throw std::invalid_argument("CostParams: decay must be in (0, 1]");
    }
  }
};

/// Side slip angle -atan(v_y / |v_x|), zero below a small forward-speed guard.
double side_slip(double v_x, double v_y);

/// Running state cost: track (with time-decaying boundary impulse), speed,
/// and stabilizing slip terms.
double state_cost(const VehicleState& x, int t, const CostMap& map, const CostParams& cp);

/// Control-cost coupling gamma * u^T Sigma^{-1} v for one step.
double control_cost_increment(const Vec& u, const Vec& v, double gamma, const Vec& sigma_diag);
double control_cost_increment(const ControlInput& u, const ControlInput& v, double gamma,
                              const Vec& sigma_diag);

/// Rolls one perturbed input sequence through the model and accumulates
/// running state cost, control-cost increments and the terminal cost.
/// Inputs are clamped before entering the dynamics; the control-cost term
/// uses the unclamped realized input.
double trajectory_cost(const VehicleState& x0, const ControlPlan& plan, const Mat& eps,
                       const VehicleModel& model, const ControlBounds& bounds,
                       const CostMap& map, const CostParams& cp, const SamplingParams& sp,
                       bool terminal_cost = true);

/// Synthetic stadium-shaped track: a straight spine of the given length with
/// capped ends, normalized signed distance 0 on the centreline and +-1 on
/// the boundaries, |.| taken and capped at 2.5.
struct OvalSpec {
  double straight_length{12.0};  // length of the centreline spine [m]
  double radius{6.0};            // centreline radius around the spine [m]
  double track_width{5.0};       // distance between inner and outer boundary [m]
  double resolution{0.1};        // [m per cell]
  double border{2.0};            // extra map margin beyond the outer boundary [m]
};

CostMap generate_oval_costmap(const OvalSpec& spec);

/// Distance from a point to the stadium spine (segment of straight_length
/// centred on the origin, along x).
double oval_spine_distance(const OvalSpec& spec, double p_x, double p_y);

// Plain-text map format: "width height x0 y0 resolution" on the first line,
// then height rows of width values.
CostMap load_costmap(const std::string& path);
void save_costmap(const CostMap& map, const std::string& path);

}  // namespace mppi
