#pragma once

#include "mppi/controller.hpp"
#include "mppi/costs.hpp"
#include "mppi/dynamics.hpp"

#include <string>
#include <vector>

namespace mppi {

/// Instantaneous additive velocity/heading-rate kick applied to the plant.
struct Disturbance {
  double time_s{0.0};
  double dv_x{0.0};
  double dv_y{0.0};
  double dtheta_dot{0.0};
};

struct StepRecord {
  double time{0.0};
  VehicleState state;     // plant state when the control was computed
  ControlInput commanded; // clamped first plan input
  ControlInput realized;  // commanded plus execution noise (pre-clamp)
  double cost{0.0};       // instantaneous state cost (impulse at t = 0)
  double map_value{0.0};  // h at the state position
};

struct EpisodeTrace {
  std::vector<StepRecord> steps;
  double dt{0.0};
  std::uint64_t seed{0};
  bool aborted{false};            // non-finite state encountered
  std::string config_snapshot;    // filled by the caller, for provenance
};

enum class FailureReason { kNone, kBoundary, kSpinout };

struct LapMetrics {
  int lap_index{0};
  double lap_time{0.0};
  double v_min{0.0};
  double v_max{0.0};
  bool success{false};
  FailureReason reason{FailureReason::kNone};
  bool partial{false};  // head/tail segment counted only because it failed
};

const char* failure_reason_name(FailureReason r);

/// Start-line geometry and failure thresholds for lap classification.
struct LapConfig {
  double line_x{0.0};
  double band_y_min{-1.0};
  double band_y_max{0.0};
  int crossing_sign{1};          // +1: p_x increases through line_x
  double boundary_h{0.99};
  double boundary_dwell_s{0.5};
  double spin_slip_rad{1.2};
  double spin_dwell_s{0.25};
};

/// Splits a trace into laps at directed start-line crossings. The spawn-to-
/// first-crossing segment is the discarded first lap; discarded or
/// incomplete segments still emit a (partial) failed lap when a failure
/// condition triggered inside them, so crashes are never silently dropped.
std::vector<LapMetrics> classify_laps(const EpisodeTrace& trace, const CostMap& map,
                                      const LapConfig& lap);

/// Closed-loop experiment configuration. The plant is always the analytic
/// truth model; the controller's forward model is chosen separately.
struct SimConfig {
  SamplingParams sampling;
  WeightRuleConfig weight_rule;
  int sg_window{9};   // 0 disables smoothing
  int sg_degree{3};
  ControlBounds bounds;
  CostParams costs;
  BicycleParams plant;
  bool controller_terminal_cost{true};
  double episode_s{30.0};
  bool exec_noise{true};
  Vec exec_noise_diag;       // empty = sampling covariance
  Vec estimate_noise_diag;   // 7 std devs; empty = exact state feedback
  std::vector<Disturbance> disturbances;
  VehicleState start_state;
  LapConfig lap;
};

struct EpisodeResult {
  EpisodeTrace trace;
  std::vector<LapMetrics> laps;
};

/// Runs one closed-loop episode: state estimate, mpc_step, execution noise,
/// clamped truth dynamics, optional disturbances. Deterministic given the
/// seed, independent of n_threads.
EpisodeResult simulate_episode(const SimConfig& cfg, const VehicleModel& controller_model,
                               const CostMap& map, int n_threads = 1);

// Delimited text outputs; one row per step / per lap.
void save_trace(const EpisodeTrace& trace, const std::string& path);
void save_lap_metrics(const std::vector<LapMetrics>& laps, const std::string& path);

}  // namespace mppi
