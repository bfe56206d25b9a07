#pragma once

#include "mppi/costs.hpp"
#include "mppi/dynamics.hpp"
#include "mppi/sampler.hpp"
#include "mppi/smoothing.hpp"
#include "mppi/types.hpp"
#include "mppi/weights.hpp"

#include <functional>
#include <optional>

namespace mppi {

/// Type-erased rollout target: a step function with clamping applied inside,
/// a running cost evaluated on the post-step state (t is the step index,
/// which also drives the impulse decay), and a terminal cost.
struct RolloutSystem {
  int state_dim{0};
  int control_dim{0};
  std::function<void(const double* x, const double* v, int t, double* x_next)> step;
  std::function<double(const double* x, int t)> running_cost;
  std::function<double(const double* x)> terminal_cost;
};

/// Binds a vehicle model, bounds and the driving cost into a rollout system.
/// The caller keeps model and map alive for the lifetime of the system.
RolloutSystem make_vehicle_system(const VehicleModel& model, const ControlBounds& bounds,
                                  const CostMap& map, const CostParams& cp, double dt,
                                  int horizon, bool with_terminal = true);

enum class WeightRule { kInfoTheoretic, kCrossEntropy };

struct WeightRuleConfig {
  WeightRule rule{WeightRule::kInfoTheoretic};
  double delta{0.8};  // CEM eliteness threshold
};

/// Everything the receding-horizon loop carries between steps.
struct ControllerState {
  ControlPlan plan;
  std::uint64_t iteration{0};
  SamplingParams params;
  WeightRuleConfig weight_rule;
  std::optional<SGFilter> filter;  // nullopt = no smoothing
  ControlBounds bounds;

  void validate() const {
    params.validate();
    bounds.validate();
    if (plan.horizon() != params.horizon_steps || plan.dim() != params.dim()) {
      throw std::invalid_argument("ControllerState: plan shape must match params");
    }
    if (bounds.lower.size() != params.dim()) {
      throw std::invalid_argument("ControllerState: bounds dimension mismatch");
    }
  }
};

ControllerState make_controller_state(const SamplingParams& params,
                                      const WeightRuleConfig& rule,
                                      std::optional<SGFilter> filter,
                                      const ControlBounds& bounds);

/// Evaluates the cost of every sample. Unflagged samples roll out
/// v_t = u_t + eps_t and accumulate the gamma * u^T Sigma^{-1} v coupling;
/// zero-mean samples roll out v_t = eps_t, their stored perturbation is
/// rewritten to v_t - u_t, and their cost carries the importance correction
/// for the N(0, Sigma) proposal so the weighted update stays unbiased for
/// any exploration fraction. Results are independent of the thread count.
Vec rollout_batch(const RolloutSystem& system, const Vec& x0, const ControllerState& cs,
                  PerturbationBatch& batch, int n_threads = 1);

/// U' = U + SGF * (sum_k w_k eps_k); no clamping is applied to the plan.
ControlPlan update_plan(const ControllerState& cs, const PerturbationBatch& batch,
                        const WeightResult& weights);

WeightResult compute_weights(const ControllerState& cs, const Vec& costs);

/// One full receding-horizon iteration: sample, roll out, weight, update,
/// emit the clamped first input, then shift the plan and re-initialize the
/// tail to zero.
Vec mpc_step(const RolloutSystem& system, const Vec& x0, ControllerState& cs,
             int n_threads = 1);

/// Repeated sample/weight/update passes on a fixed initial state, without
/// the receding-horizon shift. Used for open-loop studies.
ControlPlan optimize_to_convergence(const RolloutSystem& system, const Vec& x0,
                                    ControllerState& cs, int iterations,
                                    int n_threads = 1);

}  // namespace mppi
