#include "mppi/simulator.hpp"

#include "mppi/config.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace mppi;

namespace {

// small, fast oval setup shared by the closed-loop tests
ExperimentConfig fast_config(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.sampling.samples = 192;
  cfg.sampling.horizon_steps = 40;
  cfg.sampling.dt = 0.025;
  cfg.sampling.sigma_diag = (Vec(2) << 0.0306, 0.0506).finished();
  cfg.sampling.lambda = 12.5;
  cfg.sampling.gamma = 0.1;
  cfg.sampling.explore_fraction = 0.01;
  cfg.sampling.seed = seed;
  cfg.seeds = {seed};
  cfg.oval = OvalSpec{10.0, 5.0, 4.0, 0.1, 1.5};
  cfg.costs.v_des = 4.0;
  cfg.episode_s = 8.0;
  cfg.spawn_speed = 3.0;
  return cfg;
}

EpisodeTrace synthetic_loop_trace(int laps, double lap_seconds, double radius,
                                  bool teleport_out) {
  // circular motion crossing x = 0 at the bottom once per lap
  EpisodeTrace trace;
  trace.dt = 0.05;
  const int steps_per_lap = static_cast<int>(lap_seconds / trace.dt);
  const int n = steps_per_lap * laps + steps_per_lap / 2;
  const double omega = 2.0 * M_PI / lap_seconds;
  const double speed = omega * radius;
  for (int i = 0; i < n; ++i) {
    StepRecord r;
    r.time = i * trace.dt;
    const double phi = -M_PI / 2.0 - 0.01 + omega * r.time;  // just behind the line
    r.state.p_x = radius * std::cos(phi);
    r.state.p_y = radius * std::sin(phi);
    r.state.theta = phi + M_PI / 2.0;
    r.state.v_x = speed;
    if (teleport_out && i >= steps_per_lap && i < steps_per_lap + 22) {
      r.state.p_x = 1000.0;  // 22 steps * 0.05 s = 1.1 s outside
    }
    trace.steps.push_back(r);
  }
  return trace;
}

CostMap ring_map(double radius, double width) {
  OvalSpec spec;
  spec.straight_length = 0.0;
  spec.radius = radius;
  spec.track_width = width;
  spec.resolution = 0.1;
  return generate_oval_costmap(spec);
}

LapConfig ring_lap(double radius, double width) {
  LapConfig lap;
  lap.line_x = 0.0;
  lap.band_y_min = -(radius + width);
  lap.band_y_max = -(radius - width);
  lap.crossing_sign = 1;
  return lap;
}

}  // namespace

TEST_CASE("constant-speed loop: all laps succeed with equal times") {
  const double radius = 5.0;
  const EpisodeTrace trace = synthetic_loop_trace(3, 10.0, radius, false);
  const CostMap map = ring_map(radius, 4.0);
  const auto laps = classify_laps(trace, map, ring_lap(radius, 4.0));
  REQUIRE(laps.size() == 3);
  for (const LapMetrics& m : laps) {
    CHECK(m.success);
    CHECK(!m.partial);
    CHECK(m.reason == FailureReason::kNone);
    CHECK(m.lap_time == doctest::Approx(10.0).epsilon(trace.dt / 10.0 + 0.02));
    CHECK(m.v_min <= m.v_max);
    CHECK(m.lap_time > 0.0);
  }
}

TEST_CASE("lap count equals crossings minus one") {
  const double radius = 5.0;
  for (int laps_in_trace : {1, 2, 4}) {
    const EpisodeTrace trace = synthetic_loop_trace(laps_in_trace, 8.0, radius, false);
    const CostMap map = ring_map(radius, 4.0);
    const auto laps = classify_laps(trace, map, ring_lap(radius, 4.0));
    // the trace crosses the line laps_in_trace + 1 times (spawn sits just
    // behind it); complete laps = crossings - 1
    CHECK(static_cast<int>(laps.size()) == laps_in_trace);
  }
}

TEST_CASE("a second teleported outside the boundary fails that lap") {
  const double radius = 5.0;
  const EpisodeTrace trace = synthetic_loop_trace(3, 10.0, radius, true);
  const CostMap map = ring_map(radius, 4.0);
  const auto laps = classify_laps(trace, map, ring_lap(radius, 4.0));
  REQUIRE(laps.size() == 3);
  CHECK(!laps[1].success);
  CHECK(laps[1].reason == FailureReason::kBoundary);
  CHECK(laps[0].success);
  CHECK(laps[2].success);
}

TEST_CASE("sustained slip marks a spinout") {
  EpisodeTrace trace = synthetic_loop_trace(2, 10.0, 5.0, false);
  for (size_t i = 60; i < 70; ++i) {  // 0.5 s with slip ~ 1.37 rad
    trace.steps[i].state.v_x = 1.0;
    trace.steps[i].state.v_y = -5.0;
  }
  const CostMap map = ring_map(5.0, 4.0);
  const auto laps = classify_laps(trace, map, ring_lap(5.0, 4.0));
  REQUIRE(!laps.empty());
  bool spun = false;
  for (const auto& m : laps) spun |= (m.reason == FailureReason::kSpinout);
  CHECK(spun);
}

TEST_CASE("same seed twice gives identical traces, different seeds differ") {
  const ExperimentConfig cfg = fast_config(77);
  const ResolvedExperiment rx = resolve_experiment(cfg);
  const EpisodeResult a = simulate_episode(rx.sim, *rx.controller_model, rx.map, 2);
  const EpisodeResult b = simulate_episode(rx.sim, *rx.controller_model, rx.map, 1);
  REQUIRE(a.trace.steps.size() == b.trace.steps.size());
  for (size_t i = 0; i < a.trace.steps.size(); ++i) {
    CHECK(flatten_state(a.trace.steps[i].state) == flatten_state(b.trace.steps[i].state));
    CHECK(a.trace.steps[i].commanded.steer == b.trace.steps[i].commanded.steer);
    CHECK(a.trace.steps[i].realized.throttle == b.trace.steps[i].realized.throttle);
  }

  SimConfig other = rx.sim;
  other.sampling.seed = 78;
  const EpisodeResult c = simulate_episode(other, *rx.controller_model, rx.map, 1);
  CHECK(c.trace.steps.back().state.p_x != a.trace.steps.back().state.p_x);
}

TEST_CASE("noise-free traces replay bitwise through the truth model") {
  ExperimentConfig cfg = fast_config(5);
  cfg.exec_noise = false;
  cfg.sampling.gamma = 0.0;
  cfg.episode_s = 4.0;
  const ResolvedExperiment rx = resolve_experiment(cfg);
  const EpisodeResult ep = simulate_episode(rx.sim, *rx.controller_model, rx.map, 2);

  VehicleState x = rx.sim.start_state;
  for (const StepRecord& rec : ep.trace.steps) {
    CHECK(flatten_state(rec.state) == flatten_state(x));
    x = step_bicycle_truth(x, clamp_controls(rec.commanded, cfg.bounds), rx.sim.sampling.dt,
                           cfg.vehicle);
  }
}

TEST_CASE("disturbances change nothing before their injection time") {
  ExperimentConfig cfg = fast_config(9);
  cfg.episode_s = 5.0;
  const ResolvedExperiment rx = resolve_experiment(cfg);
  const EpisodeResult clean = simulate_episode(rx.sim, *rx.controller_model, rx.map, 2);

  SimConfig disturbed = rx.sim;
  const double tau = 2.5;
  disturbed.disturbances = {Disturbance{tau, -1.0, 1.5, 3.0}};
  const EpisodeResult kicked = simulate_episode(disturbed, *rx.controller_model, rx.map, 2);

  bool any_after = false;
  for (size_t i = 0; i < clean.trace.steps.size(); ++i) {
    const double t = clean.trace.steps[i].time;
    const bool equal = flatten_state(clean.trace.steps[i].state) ==
                       flatten_state(kicked.trace.steps[i].state);
    if (t < tau) {
      CHECK(equal);
    } else if (!equal) {
      any_after = true;
    }
  }
  CHECK(any_after);
}

TEST_CASE("straight corridor: the controller stays inside across 20 seeds") {
  // corridor cost: |y| / half-width, clamped map built directly
  CostMap map;
  map.width = 240;
  map.height = 61;
  map.resolution = 0.25;
  map.x0 = -10.0;
  map.y0 = -7.5;
  map.values.resize(static_cast<size_t>(map.width) * map.height);
  for (int iy = 0; iy < map.height; ++iy) {
    for (int ix = 0; ix < map.width; ++ix) {
      const double y = map.y0 + iy * map.resolution;
      map.at(ix, iy) = std::min(std::abs(y) / 2.0, CostMap::kCap);
    }
  }
  map.validate();

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CAPTURE(seed);
    SimConfig sim;
    sim.sampling.samples = 128;
    sim.sampling.horizon_steps = 40;
    sim.sampling.dt = 0.025;
    sim.sampling.sigma_diag = (Vec(2) << 0.0306, 0.0506).finished();
    sim.sampling.lambda = 12.5;
    sim.sampling.gamma = 0.1;
    sim.sampling.explore_fraction = 0.01;
    sim.sampling.seed = seed;
    sim.costs.v_des = 5.0;
    sim.exec_noise = false;
    sim.episode_s = 6.0;
    sim.start_state.v_x = 4.0;
    sim.start_state.p_x = -8.0;
    const BicycleTruthModel model(sim.plant);
    const EpisodeResult ep = simulate_episode(sim, model, map, 2);
    for (const StepRecord& r : ep.trace.steps) {
      CHECK(std::abs(r.state.p_y) < 2.0);
    }
    CHECK(ep.trace.steps.back().state.p_x > 0.0);  // actually made progress
  }
}

TEST_CASE("trace and metrics files are written with the documented columns") {
  const ExperimentConfig cfg = fast_config(3);
  ResolvedExperiment rx = resolve_experiment(cfg);
  SimConfig sim = rx.sim;
  sim.episode_s = 1.0;
  const EpisodeResult ep = simulate_episode(sim, *rx.controller_model, rx.map, 1);

  const auto dir = std::filesystem::temp_directory_path();
  const std::string tpath = (dir / "mppi_trace_test.csv").string();
  const std::string mpath = (dir / "mppi_metrics_test.csv").string();
  save_trace(ep.trace, tpath);
  save_lap_metrics(ep.laps, mpath);

  std::ifstream tin(tpath);
  std::string header;
  std::getline(tin, header);
  CHECK(header ==
        "time_s,p_x,p_y,theta,roll,v_x,v_y,theta_dot,steer_cmd,throttle_cmd,"
        "steer_real,throttle_real,cost,map_h");
  int rows = 0;
  std::string line;
  while (std::getline(tin, line)) ++rows;
  CHECK(rows == static_cast<int>(ep.trace.steps.size()));

  std::ifstream min(mpath);
  std::getline(min, header);
  CHECK(header == "lap,lap_time_s,v_min_mps,v_max_mps,success,failure_reason,partial");
}
