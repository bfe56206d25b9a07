#include "mppi/simulator.hpp"

#include "mppi/sampler.hpp"

#include <cstdio>
#include <fstream>

namespace mppi {

const char* failure_reason_name(FailureReason r) {
  switch (r) {
    case FailureReason::kBoundary: return "boundary";
    case FailureReason::kSpinout: return "spinout";
    default: return "none";
  }
}

namespace {

struct SegmentStats {
  double v_min{0.0};
  double v_max{0.0};
  bool failed{false};
  FailureReason reason{FailureReason::kNone};
};

SegmentStats scan_segment(const EpisodeTrace& trace, const CostMap& map,
                          const LapConfig& lap, size_t begin, size_t end) {
  SegmentStats st;
  st.v_min = std::numeric_limits<double>::infinity();
  st.v_max = -std::numeric_limits<double>::infinity();
  int boundary_run = 0;
  int spin_run = 0;
  const int boundary_steps = static_cast<int>(std::floor(lap.boundary_dwell_s / trace.dt));
  const int spin_steps = static_cast<int>(std::floor(lap.spin_dwell_s / trace.dt));
  for (size_t i = begin; i < end; ++i) {
    const VehicleState& s = trace.steps[i].state;
    st.v_min = std::min(st.v_min, s.v_x);
    st.v_max = std::max(st.v_max, s.v_x);
    const double h = costmap_lookup(map, s.p_x, s.p_y);
    boundary_run = (h > lap.boundary_h) ? boundary_run + 1 : 0;
    spin_run = (std::abs(side_slip(s.v_x, s.v_y)) > lap.spin_slip_rad) ? spin_run + 1 : 0;
    if (!st.failed && boundary_run > boundary_steps) {
      st.failed = true;
      st.reason = FailureReason::kBoundary;
    }
    if (!st.failed && spin_run > spin_steps) {
      st.failed = true;
      st.reason = FailureReason::kSpinout;
    }
  }
  return st;
}

}  // namespace

std::vector<LapMetrics> classify_laps(const EpisodeTrace& trace, const CostMap& map,
                                      const LapConfig& lap) {
  std::vector<LapMetrics> out;
  const size_t n = trace.steps.size();
  if (n < 2) return out;

  std::vector<size_t> crossings;
  for (size_t i = 1; i < n; ++i) {
    const double prev = trace.steps[i - 1].state.p_x - lap.line_x;
    const double cur = trace.steps[i].state.p_x - lap.line_x;
    const double y = trace.steps[i].state.p_y;
    const double sgn = static_cast<double>(lap.crossing_sign);
    if (sgn * prev < 0.0 && sgn * cur >= 0.0 && y >= lap.band_y_min && y <= lap.band_y_max) {
      crossings.push_back(i);
    }
  }

  int lap_index = 0;
  auto emit = [&](size_t begin, size_t end, bool partial) {
    const SegmentStats st = scan_segment(trace, map, lap, begin, end);
    if (partial && !st.failed) return;  // discarded first lap / incomplete tail
    LapMetrics m;
    m.lap_index = lap_index++;
    m.lap_time = (end - begin) * trace.dt;
    m.v_min = st.v_min;
    m.v_max = st.v_max;
    m.success = !st.failed;
    m.reason = st.reason;
    m.partial = partial;
    out.push_back(m);
  };

  if (crossings.empty()) {
    emit(0, n, true);
    return out;
  }
  emit(0, crossings.front(), true);
  for (size_t j = 0; j + 1 < crossings.size(); ++j) {
    emit(crossings[j], crossings[j + 1], false);
  }
  const bool trailing = crossings.back() + 1 < n || trace.aborted;
  if (trailing) emit(crossings.back(), n, true);
  return out;
}

EpisodeResult simulate_episode(const SimConfig& cfg, const VehicleModel& controller_model,
                               const CostMap& map, int n_threads) {
  cfg.sampling.validate();
  cfg.costs.validate();
  cfg.plant.validate();

  std::optional<SGFilter> filter;
  if (cfg.sg_window > 0) filter = sg_coefficients(cfg.sg_window, cfg.sg_degree);
  ControllerState cs =
      make_controller_state(cfg.sampling, cfg.weight_rule, filter, cfg.bounds);
  const RolloutSystem system =
      make_vehicle_system(controller_model, cfg.bounds, map, cfg.costs, cfg.sampling.dt,
                          cfg.sampling.horizon_steps, cfg.controller_terminal_cost);

  const Vec exec_diag =
      cfg.exec_noise_diag.size() > 0 ? cfg.exec_noise_diag : cfg.sampling.sigma_diag;

  const int steps = static_cast<int>(std::lround(cfg.episode_s / cfg.sampling.dt));
  EpisodeResult result;
  result.trace.dt = cfg.sampling.dt;
  result.trace.seed = cfg.sampling.seed;
  result.trace.steps.reserve(steps);

  VehicleState x = cfg.start_state;
  for (int i = 0; i < steps; ++i) {
    if (!x.finite()) {
      result.trace.aborted = true;
      break;
    }

    VehicleState estimate = x;
    if (cfg.estimate_noise_diag.size() == VehicleState::kDim) {
      StateVec noisy = flatten_state(x);
      for (int c = 0; c < VehicleState::kDim; ++c) {
        noisy[c] += cfg.estimate_noise_diag[c] *
                    rng::counter_normal(cfg.sampling.seed, rng::kStreamEstimateNoise,
                                        static_cast<std::uint64_t>(i), 0, 0, c);
      }
      estimate = unflatten_state(noisy);
    }

    const Vec u0 = mpc_step(system, Vec(flatten_state(estimate)), cs, n_threads);
    ControlInput commanded{u0[0], u0[1]};
    ControlInput realized = commanded;
    if (cfg.exec_noise) {
      realized.steer += std::sqrt(exec_diag[0]) *
                        rng::counter_normal(cfg.sampling.seed, rng::kStreamExecutionNoise,
                                            static_cast<std::uint64_t>(i), 0, 0, 0);
      realized.throttle += std::sqrt(exec_diag[1]) *
                           rng::counter_normal(cfg.sampling.seed, rng::kStreamExecutionNoise,
                                               static_cast<std::uint64_t>(i), 0, 0, 1);
    }

    StepRecord rec;
    rec.time = i * cfg.sampling.dt;
    rec.state = x;
    rec.commanded = commanded;
    rec.realized = realized;
    rec.cost = state_cost(x, 0, map, cfg.costs);
    rec.map_value = costmap_lookup(map, x.p_x, x.p_y);
    result.trace.steps.push_back(rec);

    x = step_bicycle_truth(x, clamp_controls(realized, cfg.bounds), cfg.sampling.dt,
                           cfg.plant);
    for (const Disturbance& d : cfg.disturbances) {
      if (std::lround(d.time_s / cfg.sampling.dt) == i + 1) {
        x.v_x += d.dv_x;
        x.v_y += d.dv_y;
        x.theta_dot += d.dtheta_dot;
      }
    }
  }

  result.laps = classify_laps(result.trace, map, cfg.lap);
  return result;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_trace(const EpisodeTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out << "time_s,p_x,p_y,theta,roll,v_x,v_y,theta_dot,"
         "steer_cmd,throttle_cmd,steer_real,throttle_real,cost,map_h\n";
  for (const StepRecord& r : trace.steps) {
    out << fmt(r.time) << ',' << fmt(r.state.p_x) << ',' << fmt(r.state.p_y) << ','
        << fmt(r.state.theta) << ',' << fmt(r.state.roll) << ',' << fmt(r.state.v_x) << ','
        << fmt(r.state.v_y) << ',' << fmt(r.state.theta_dot) << ','
        << fmt(r.commanded.steer) << ',' << fmt(r.commanded.throttle) << ','
        << fmt(r.realized.steer) << ',' << fmt(r.realized.throttle) << ','
        << fmt(r.cost) << ',' << fmt(r.map_value) << '\n';
  }
}

void save_lap_metrics(const std::vector<LapMetrics>& laps, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metrics file: " + path);
  out << "lap,lap_time_s,v_min_mps,v_max_mps,success,failure_reason,partial\n";
  for (const LapMetrics& m : laps) {
    out << m.lap_index << ',' << fmt(m.lap_time) << ',' << fmt(m.v_min) << ','
        << fmt(m.v_max) << ',' << (m.success ? 1 : 0) << ','
        << failure_reason_name(m.reason) << ',' << (m.partial ? 1 : 0) << '\n';
  }
}

}  // namespace mppi
