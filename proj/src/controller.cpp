#include "mppi/controller.hpp"

#include "mppi/parallel.hpp"

namespace mppi {

RolloutSystem make_vehicle_system(const VehicleModel& model, const ControlBounds& bounds,
                                  const CostMap& map, const CostParams& cp, double dt,
                                  int horizon, bool with_terminal) {
  RolloutSystem sys;
  sys.state_dim = VehicleState::kDim;
  sys.control_dim = ControlInput::kDim;
  sys.step = [&model, bounds, dt](const double* x, const double* v, int, double* x_next) {
    const VehicleState s{x[0], x[1], x[2], x[3], x[4], x[5], x[6]};
    const ControlInput u{std::clamp(v[0], bounds.lower[0], bounds.upper[0]),
                         std::clamp(v[1], bounds.lower[1], bounds.upper[1])};
    const VehicleState n = model.step(s, u, dt);
    x_next[0] = n.p_x; x_next[1] = n.p_y; x_next[2] = n.theta; x_next[3] = n.roll;
    x_next[4] = n.v_x; x_next[5] = n.v_y; x_next[6] = n.theta_dot;
  };
  sys.running_cost = [&map, cp](const double* x, int t) {
    const VehicleState s{x[0], x[1], x[2], x[3], x[4], x[5], x[6]};
    return state_cost(s, t, map, cp);
  };
  if (with_terminal) {
    // default terminal cost: the running cost evaluated once more at t = T
    sys.terminal_cost = [&map, cp, horizon](const double* x) {
      const VehicleState s{x[0], x[1], x[2], x[3], x[4], x[5], x[6]};
      return state_cost(s, horizon, map, cp);
    };
  } else {
    sys.terminal_cost = [](const double*) { return 0.0; };
  }
  return sys;
}

ControllerState make_controller_state(const SamplingParams& params,
                                      const WeightRuleConfig& rule,
                                      std::optional<SGFilter> filter,
                                      const ControlBounds& bounds) {
  ControllerState cs;
  cs.params = params;
  cs.weight_rule = rule;
  cs.filter = std::move(filter);
  cs.bounds = bounds;
  if (params.base_mean.size() != 0) {
    cs.plan = ControlPlan(params.base_mean);
  } else {
    cs.plan = ControlPlan(params.horizon_steps, params.dim());
  }
  cs.validate();
  return cs;
}

Vec rollout_batch(const RolloutSystem& system, const Vec& x0, const ControllerState& cs,
                  PerturbationBatch& batch, int n_threads) {
  cs.validate();
  if (x0.size() != system.state_dim) {
    throw std::invalid_argument("rollout_batch: x0 dimension mismatch");
  }
  if (system.control_dim != cs.params.dim()) {
    throw std::invalid_argument("rollout_batch: control dimension mismatch");
  }
  const int K = batch.samples();
  const int T = cs.params.horizon_steps;
  const int m = system.control_dim;

  // Zero-mean samples realize v = eps; storing eps - U keeps the
  // aggregation formula v = U + stored_eps valid for every sample.
  for (int k = 0; k < K; ++k) {
    if (batch.zero_mean_flag[k]) batch.eps[k] -= cs.plan.values;
  }

  const double lambda = cs.params.lambda;
  const double gamma = cs.params.gamma;

  Vec costs(K);
  parallel_for_chunks(K, n_threads, [&](int begin, int end) {
    std::vector<double> x(system.state_dim), x_next(system.state_dim), v(m), u(m);
    for (int k = begin; k < end; ++k) {
      for (int i = 0; i < system.state_dim; ++i) x[i] = x0[i];
      const Mat& eps = batch.eps[k];
      const bool zero_mean = batch.zero_mean_flag[k] != 0;
      double cost = 0.0;
      for (int t = 0; t < T; ++t) {
        double uv = 0.0, uu = 0.0;
        for (int c = 0; c < m; ++c) {
          u[c] = cs.plan.values(t, c);
          v[c] = u[c] + eps(t, c);
          uv += u[c] * v[c] / cs.params.sigma_diag[c];
          uu += u[c] * u[c] / cs.params.sigma_diag[c];
        }
        system.step(x.data(), v.data(), t, x_next.data());
        x.swap(x_next);
        // Zero-mean samples are drawn from N(0, Sigma) rather than the
        // plan-centred proposal, so their importance weight carries the
        // density ratio against the gamma-mixture base instead of the
        // plan-sample coupling term; this is what keeps the weighted
        // estimate unbiased for any exploration fraction.
        const double coupling =
            zero_mean ? (gamma - lambda) * uv + 0.5 * lambda * uu : gamma * uv;
        cost += system.running_cost(x.data(), t) + coupling;
      }
      cost += system.terminal_cost(x.data());
      costs[k] = cost;
    }
  });
  return costs;
}

WeightResult compute_weights(const ControllerState& cs, const Vec& costs) {
  if (cs.weight_rule.rule == WeightRule::kCrossEntropy) {
    return cem_weights(costs, cs.weight_rule.delta);
  }
  return it_weights(costs, cs.params.lambda);
}

ControlPlan update_plan(const ControllerState& cs, const PerturbationBatch& batch,
                        const WeightResult& weights) {
  const int K = batch.samples();
  if (weights.weights.size() != K) {
    throw std::invalid_argument("update_plan: weight/sample count mismatch");
  }
  // fixed ascending-index reduction so the sum is bit-stable
  Mat agg = Mat::Zero(cs.plan.horizon(), cs.plan.dim());
  for (int k = 0; k < K; ++k) {
    if (weights.weights[k] != 0.0) agg += weights.weights[k] * batch.eps[k];
  }
  if (cs.filter) agg = sg_smooth(agg, *cs.filter);
  return ControlPlan(Mat(cs.plan.values + agg));
}

Vec mpc_step(const RolloutSystem& system, const Vec& x0, ControllerState& cs,
             int n_threads) {
  PerturbationBatch batch = sample_perturbations(cs.params, cs.iteration);
  const Vec costs = rollout_batch(system, x0, cs, batch, n_threads);
  const WeightResult w = compute_weights(cs, costs);
  cs.plan = update_plan(cs, batch, w);

  const Vec u0 = clamp_controls(Vec(cs.plan.values.row(0).transpose()), cs.bounds);

  // warm start: slide the unexecuted tail forward, re-initialize the end
  const int T = cs.plan.horizon();
  for (int t = 0; t + 1 < T; ++t) cs.plan.values.row(t) = cs.plan.values.row(t + 1);
  cs.plan.values.row(T - 1).setZero();
  ++cs.iteration;
  return u0;
}

ControlPlan optimize_to_convergence(const RolloutSystem& system, const Vec& x0,
                                    ControllerState& cs, int iterations,
                                    int n_threads) {
  if (iterations < 1) {
    throw std::invalid_argument("optimize_to_convergence: iterations must be >= 1");
  }
  for (int i = 0; i < iterations; ++i) {
    PerturbationBatch batch = sample_perturbations(cs.params, cs.iteration);
    const Vec costs = rollout_batch(system, x0, cs, batch, n_threads);
    const WeightResult w = compute_weights(cs, costs);
    cs.plan = update_plan(cs, batch, w);
    ++cs.iteration;
  }
  return cs.plan;
}

}  // namespace mppi
