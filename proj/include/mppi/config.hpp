#pragma once

#include "mppi/simulator.hpp"

#include <memory>
#include <string>
#include <vector>

namespace mppi {

/// Keys: lambda, gamma, sigma_diag, horizon_steps, dt, samples,
/// explore_fraction, seed, plus optional base_mean (T x m nested arrays).
std::string sampling_params_to_json(const SamplingParams& p);
SamplingParams sampling_params_from_json(const std::string& text);
SamplingParams load_sampling_params(const std::string& path);
void save_sampling_params(const SamplingParams& p, const std::string& path);

enum class ModelChoice { kTruth, kBasis, kMlp };

/// Full experiment description as loaded from a config file. Vehicle and
/// cost-weight defaults are tuned desk values; the run banner marks every
/// output as simulation data.
struct ExperimentConfig {
  SamplingParams sampling;

  // controller
  WeightRuleConfig weight_rule;
  int sg_window{9};
  int sg_degree{3};
  ControlBounds bounds;
  ModelChoice controller_model{ModelChoice::kTruth};
  std::string theta_file;
  std::string mlp_file;
  bool controller_terminal_cost{true};

  CostParams costs;
  BicycleParams vehicle;

  // map: file wins when non-empty, otherwise the oval generator
  std::string map_file;
  OvalSpec oval;

  // sim
  double episode_s{30.0};
  bool exec_noise{true};
  Vec exec_noise_diag;
  Vec estimate_noise_diag;
  std::vector<Disturbance> disturbances;
  bool clockwise{false};
  double spawn_speed{3.0};  // initial v_x [m/s]; the ramp-up lap is discarded anyway

  // run / benchmark
  std::vector<std::uint64_t> seeds{1};
  std::string out_dir{"out"};
  std::vector<std::string> benchmark_rules{"it", "cem"};
  std::vector<double> benchmark_targets{6.0, 8.5, 11.0};

  void validate() const;
};

ExperimentConfig experiment_config_from_json(const std::string& text);
std::string experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_experiment_config(const std::string& path);

/// Runtime objects resolved from a config: the cost map, the controller's
/// forward model and the per-episode sim configuration (spawn pose and lap
/// geometry derived from the oval when no file map is given).
struct ResolvedExperiment {
  ExperimentConfig cfg;
  CostMap map;
  std::unique_ptr<VehicleModel> controller_model;
  SimConfig sim;
};

ResolvedExperiment resolve_experiment(const ExperimentConfig& cfg);

WeightRuleConfig parse_weight_rule(const std::string& name, double delta);

}  // namespace mppi
