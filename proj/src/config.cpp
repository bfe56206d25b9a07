#include "mppi/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace mppi {

using nlohmann::json;

namespace {

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vec vec_from_json(const json& arr) {
  Vec v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v[static_cast<int>(i)] = arr[i].get<double>();
  return v;
}

json sampling_to_json_obj(const SamplingParams& p) {
  json j;
  j["lambda"] = p.lambda;
  j["gamma"] = p.gamma;
  j["sigma_diag"] = vec_to_json(p.sigma_diag);
  j["horizon_steps"] = p.horizon_steps;
  j["dt"] = p.dt;
  j["samples"] = p.samples;
  j["explore_fraction"] = p.explore_fraction;
  j["seed"] = p.seed;
  if (p.base_mean.size() != 0) {
    json rows = json::array();
    for (int t = 0; t < p.base_mean.rows(); ++t) {
      json row = json::array();
      for (int c = 0; c < p.base_mean.cols(); ++c) row.push_back(p.base_mean(t, c));
      rows.push_back(row);
    }
    j["base_mean"] = rows;
  }
  return j;
}

SamplingParams sampling_from_json_obj(const json& j) {
  SamplingParams p;
  p.lambda = j.at("lambda").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.sigma_diag = vec_from_json(j.at("sigma_diag"));
  p.horizon_steps = j.at("horizon_steps").get<int>();
  p.dt = j.at("dt").get<double>();
  p.samples = j.at("samples").get<int>();
  p.explore_fraction = j.value("explore_fraction", 0.01);
  p.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("base_mean")) {
    const json& rows = j.at("base_mean");
    Mat m(rows.size(), p.sigma_diag.size());
    for (size_t t = 0; t < rows.size(); ++t) {
      for (int c = 0; c < m.cols(); ++c) {
        m(static_cast<int>(t), c) = rows[t][static_cast<size_t>(c)].get<double>();
      }
    }
    p.base_mean = m;
  }
  p.validate();
  return p;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string sampling_params_to_json(const SamplingParams& p) {
  return sampling_to_json_obj(p).dump(2) + "\n";
}

SamplingParams sampling_params_from_json(const std::string& text) {
  return sampling_from_json_obj(json::parse(text));
}

SamplingParams load_sampling_params(const std::string& path) {
  return sampling_params_from_json(read_file(path));
}

void save_sampling_params(const SamplingParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << sampling_params_to_json(p);
}

WeightRuleConfig parse_weight_rule(const std::string& name, double delta) {
  WeightRuleConfig rule;
  rule.delta = delta;
  if (name == "it") {
    rule.rule = WeightRule::kInfoTheoretic;
  } else if (name == "cem") {
    rule.rule = WeightRule::kCrossEntropy;
  } else {
    throw std::invalid_argument("weight_rule must be 'it' or 'cem', got: " + name);
  }
  return rule;
}

void ExperimentConfig::validate() const {
  sampling.validate();
  bounds.validate();
  costs.validate();
  vehicle.validate();
  // the derived base-mixing 1 - gamma/lambda must be a valid mixture weight
  if (sampling.gamma > sampling.lambda) {
    throw std::invalid_argument(
        "config: gamma must satisfy 0 <= gamma <= lambda (base mixing in [0, 1])");
  }
  if (sg_window != 0 && (sg_window < 3 || sg_window % 2 == 0 || sg_degree >= sg_window)) {
    throw std::invalid_argument("config: sg_window must be 0 (off) or odd with degree < window");
  }
  if (seeds.empty()) throw std::invalid_argument("config: seed list must not be empty");
  for (size_t i = 0; i < seeds.size(); ++i) {
    for (size_t j = i + 1; j < seeds.size(); ++j) {
      if (seeds[i] == seeds[j]) throw std::invalid_argument("config: seeds must be unique");
    }
  }
  if ((controller_model == ModelChoice::kBasis && theta_file.empty()) ||
      (controller_model == ModelChoice::kMlp && mlp_file.empty())) {
    throw std::invalid_argument("config: learned controller models need a weights file");
  }
  if (!(episode_s > 0.0)) throw std::invalid_argument("config: episode_s must be > 0");
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig cfg;
  cfg.sampling = sampling_from_json_obj(j.at("sampling"));

  if (j.contains("controller")) {
    const json& c = j.at("controller");
    cfg.weight_rule = parse_weight_rule(c.value("weight_rule", std::string("it")),
                                        c.value("delta", 0.8));
    cfg.sg_window = c.value("sg_window", 9);
    cfg.sg_degree = c.value("sg_degree", 3);
    if (c.contains("bounds_lower")) {
      cfg.bounds = ControlBounds(vec_from_json(c.at("bounds_lower")),
                                 vec_from_json(c.at("bounds_upper")));
    }
    const std::string model = c.value("model", std::string("truth"));
    if (model == "truth") {
      cfg.controller_model = ModelChoice::kTruth;
    } else if (model == "basis") {
      cfg.controller_model = ModelChoice::kBasis;
    } else if (model == "mlp") {
      cfg.controller_model = ModelChoice::kMlp;
    } else {
      throw std::invalid_argument("config: controller model must be truth|basis|mlp");
    }
    cfg.theta_file = c.value("theta_file", std::string());
    cfg.mlp_file = c.value("mlp_file", std::string());
    cfg.controller_terminal_cost = c.value("terminal_cost", true);
  }

  if (j.contains("costs")) {
    const json& c = j.at("costs");
    cfg.costs.alpha_track = c.value("alpha_track", cfg.costs.alpha_track);
    cfg.costs.alpha_speed = c.value("alpha_speed", cfg.costs.alpha_speed);
    cfg.costs.alpha_stab = c.value("alpha_stab", cfg.costs.alpha_stab);
    cfg.costs.v_des = c.value("v_des_mps", cfg.costs.v_des);
    cfg.costs.impulse = c.value("impulse", cfg.costs.impulse);
    cfg.costs.decay = c.value("decay", cfg.costs.decay);
    cfg.costs.boundary_threshold = c.value("boundary_threshold", cfg.costs.boundary_threshold);
    cfg.costs.slip_limit = c.value("slip_limit_rad", cfg.costs.slip_limit);
  }

  if (j.contains("vehicle")) {
    const json& v = j.at("vehicle");
    cfg.vehicle.mass = v.value("mass_kg", cfg.vehicle.mass);
    cfg.vehicle.yaw_inertia = v.value("yaw_inertia", cfg.vehicle.yaw_inertia);
    cfg.vehicle.a = v.value("a_m", cfg.vehicle.a);
    cfg.vehicle.b = v.value("b_m", cfg.vehicle.b);
    cfg.vehicle.stiffness = v.value("stiffness", cfg.vehicle.stiffness);
    cfg.vehicle.mu = v.value("mu", cfg.vehicle.mu);
    cfg.vehicle.load = v.value("load_n", cfg.vehicle.load);
    cfg.vehicle.steer_scale = v.value("steer_scale_rad", cfg.vehicle.steer_scale);
    cfg.vehicle.force_scale = v.value("force_scale_n", cfg.vehicle.force_scale);
  }

  if (j.contains("map")) {
    const json& m = j.at("map");
    cfg.map_file = m.value("file", std::string());
    if (m.contains("oval")) {
      const json& o = m.at("oval");
      cfg.oval.straight_length = o.value("straight_m", cfg.oval.straight_length);
      cfg.oval.radius = o.value("radius_m", cfg.oval.radius);
      cfg.oval.track_width = o.value("width_m", cfg.oval.track_width);
      cfg.oval.resolution = o.value("resolution_m", cfg.oval.resolution);
      cfg.oval.border = o.value("border_m", cfg.oval.border);
    }
  }

  if (j.contains("sim")) {
    const json& s = j.at("sim");
    cfg.episode_s = s.value("episode_s", cfg.episode_s);
    cfg.exec_noise = s.value("exec_noise", cfg.exec_noise);
    if (s.contains("exec_noise_diag")) cfg.exec_noise_diag = vec_from_json(s.at("exec_noise_diag"));
    if (s.contains("estimate_noise_diag")) {
      cfg.estimate_noise_diag = vec_from_json(s.at("estimate_noise_diag"));
    }
    cfg.clockwise = s.value("direction", std::string("ccw")) == "cw";
    cfg.spawn_speed = s.value("spawn_speed_mps", cfg.spawn_speed);
    if (s.contains("disturbances")) {
      for (const json& d : s.at("disturbances")) {
        cfg.disturbances.push_back(Disturbance{d.value("time_s", 0.0), d.value("dv_x", 0.0),
                                               d.value("dv_y", 0.0), d.value("dtheta_dot", 0.0)});
      }
    }
  }

  if (j.contains("run")) {
    const json& r = j.at("run");
    if (r.contains("seeds")) {
      cfg.seeds.clear();
      for (const json& s : r.at("seeds")) cfg.seeds.push_back(s.get<std::uint64_t>());
    }
    cfg.out_dir = r.value("out_dir", cfg.out_dir);
  }

  if (j.contains("benchmark")) {
    const json& b = j.at("benchmark");
    if (b.contains("rules")) {
      cfg.benchmark_rules.clear();
      for (const json& r : b.at("rules")) cfg.benchmark_rules.push_back(r.get<std::string>());
    }
    if (b.contains("targets_mps")) {
      cfg.benchmark_targets.clear();
      for (const json& t : b.at("targets_mps")) cfg.benchmark_targets.push_back(t.get<double>());
    }
  }

  cfg.validate();
  return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["sampling"] = sampling_to_json_obj(cfg.sampling);
  json c;
  c["weight_rule"] = cfg.weight_rule.rule == WeightRule::kCrossEntropy ? "cem" : "it";
  c["delta"] = cfg.weight_rule.delta;
  c["sg_window"] = cfg.sg_window;
  c["sg_degree"] = cfg.sg_degree;
  c["bounds_lower"] = vec_to_json(cfg.bounds.lower);
  c["bounds_upper"] = vec_to_json(cfg.bounds.upper);
  c["model"] = cfg.controller_model == ModelChoice::kTruth
                   ? "truth"
                   : (cfg.controller_model == ModelChoice::kBasis ? "basis" : "mlp");
  c["theta_file"] = cfg.theta_file;
  c["mlp_file"] = cfg.mlp_file;
  c["terminal_cost"] = cfg.controller_terminal_cost;
  j["controller"] = c;

  json costs;
  costs["alpha_track"] = cfg.costs.alpha_track;
  costs["alpha_speed"] = cfg.costs.alpha_speed;
  costs["alpha_stab"] = cfg.costs.alpha_stab;
  costs["v_des_mps"] = cfg.costs.v_des;
  costs["impulse"] = cfg.costs.impulse;
  costs["decay"] = cfg.costs.decay;
  costs["boundary_threshold"] = cfg.costs.boundary_threshold;
  costs["slip_limit_rad"] = cfg.costs.slip_limit;
  j["costs"] = costs;

  json veh;
  veh["mass_kg"] = cfg.vehicle.mass;
  veh["yaw_inertia"] = cfg.vehicle.yaw_inertia;
  veh["a_m"] = cfg.vehicle.a;
  veh["b_m"] = cfg.vehicle.b;
  veh["stiffness"] = cfg.vehicle.stiffness;
  veh["mu"] = cfg.vehicle.mu;
  veh["load_n"] = cfg.vehicle.load;
  veh["steer_scale_rad"] = cfg.vehicle.steer_scale;
  veh["force_scale_n"] = cfg.vehicle.force_scale;
  veh["note"] = "desk-tuned values, not identified from hardware";
  j["vehicle"] = veh;

  json map;
  if (!cfg.map_file.empty()) map["file"] = cfg.map_file;
  json oval;
  oval["straight_m"] = cfg.oval.straight_length;
  oval["radius_m"] = cfg.oval.radius;
  oval["width_m"] = cfg.oval.track_width;
  oval["resolution_m"] = cfg.oval.resolution;
  oval["border_m"] = cfg.oval.border;
  map["oval"] = oval;
  j["map"] = map;

  json sim;
  sim["episode_s"] = cfg.episode_s;
  sim["exec_noise"] = cfg.exec_noise;
  if (cfg.exec_noise_diag.size() > 0) sim["exec_noise_diag"] = vec_to_json(cfg.exec_noise_diag);
  if (cfg.estimate_noise_diag.size() > 0) {
    sim["estimate_noise_diag"] = vec_to_json(cfg.estimate_noise_diag);
  }
  sim["direction"] = cfg.clockwise ? "cw" : "ccw";
  sim["spawn_speed_mps"] = cfg.spawn_speed;
  json dist = json::array();
  for (const Disturbance& d : cfg.disturbances) {
    dist.push_back({{"time_s", d.time_s}, {"dv_x", d.dv_x}, {"dv_y", d.dv_y},
                    {"dtheta_dot", d.dtheta_dot}});
  }
  sim["disturbances"] = dist;
  j["sim"] = sim;

  json run;
  run["seeds"] = cfg.seeds;
  run["out_dir"] = cfg.out_dir;
  j["run"] = run;

  json bench;
  bench["rules"] = cfg.benchmark_rules;
  bench["targets_mps"] = cfg.benchmark_targets;
  j["benchmark"] = bench;

  return j.dump(2) + "\n";
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from_json(read_file(path));
}

ResolvedExperiment resolve_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ResolvedExperiment r;
  r.cfg = cfg;

  if (!cfg.map_file.empty()) {
    r.map = load_costmap(cfg.map_file);
  } else {
    r.map = generate_oval_costmap(cfg.oval);
  }

  switch (cfg.controller_model) {
    case ModelChoice::kTruth:
      r.controller_model = std::make_unique<BicycleTruthModel>(cfg.vehicle);
      break;
    case ModelChoice::kBasis:
      r.controller_model = std::make_unique<BasisFunctionModel>(load_theta(cfg.theta_file));
      break;
    case ModelChoice::kMlp:
      r.controller_model = std::make_unique<MlpModel>(load_mlp(cfg.mlp_file));
      break;
  }

  SimConfig& sim = r.sim;
  sim.sampling = cfg.sampling;
  sim.weight_rule = cfg.weight_rule;
  sim.sg_window = cfg.sg_window;
  sim.sg_degree = cfg.sg_degree;
  sim.bounds = cfg.bounds;
  sim.costs = cfg.costs;
  sim.plant = cfg.vehicle;
  sim.controller_terminal_cost = cfg.controller_terminal_cost;
  sim.episode_s = cfg.episode_s;
  sim.exec_noise = cfg.exec_noise;
  sim.exec_noise_diag = cfg.exec_noise_diag;
  sim.estimate_noise_diag = cfg.estimate_noise_diag;
  sim.disturbances = cfg.disturbances;

  // spawn on the centreline at the top of the oval, half a lap from the
  // start line at the bottom; the ramp-up segment is the discarded lap
  sim.start_state = VehicleState{};
  sim.start_state.p_x = 0.0;
  sim.start_state.p_y = cfg.oval.radius;
  sim.start_state.theta = cfg.clockwise ? 0.0 : M_PI;
  sim.start_state.v_x = cfg.spawn_speed;

  sim.lap.line_x = 0.0;
  sim.lap.band_y_min = -(cfg.oval.radius + cfg.oval.track_width);
  sim.lap.band_y_max = -(cfg.oval.radius - cfg.oval.track_width);
  sim.lap.crossing_sign = cfg.clockwise ? -1 : 1;
  sim.lap.boundary_h = cfg.costs.boundary_threshold;

  return r;
}

}  // namespace mppi
