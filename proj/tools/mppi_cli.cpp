#include "mppi/benchmark.hpp"
#include "mppi/config.hpp"
#include "mppi/report.hpp"
#include "mppi/verification.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;

namespace {

std::string seed_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

std::string target_tag(double target) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", target);
  std::string s(buf);
  for (char& c : s) {
    if (c == '.') c = 'p';
  }
  return s;
}

// timestamps are confined to this sidecar so every other output is a pure
// function of (config, seeds)
void write_run_info(const std::string& dir, const std::string& command) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char stamp[64];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  std::ofstream out(dir + "/run_info.json");
  out << "{\n  \"command\": \"" << command << "\",\n  \"written_at\": \"" << stamp
      << "\"\n}\n";
}

int cmd_run(const std::string& config_path, const std::string& out_override, int threads) {
  mppi::ExperimentConfig cfg = mppi::load_experiment_config(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  mppi::ResolvedExperiment rx = mppi::resolve_experiment(cfg);
  fs::create_directories(cfg.out_dir);

  const std::string snapshot = mppi::experiment_config_to_json(cfg);
  {
    std::ofstream snap(cfg.out_dir + "/config_resolved.json");
    snap << snapshot;
  }
  std::vector<mppi::EpisodeResult> episodes;
  episodes.reserve(cfg.seeds.size());
  for (std::uint64_t seed : cfg.seeds) {
    mppi::SimConfig sim = rx.sim;
    sim.sampling.seed = seed;
    mppi::EpisodeResult ep = mppi::simulate_episode(sim, *rx.controller_model, rx.map, threads);
    ep.trace.config_snapshot = snapshot;

    const std::string tag = seed_tag(seed);
    mppi::save_trace(ep.trace, cfg.out_dir + "/trace_" + tag + ".csv");
    mppi::save_lap_metrics(ep.laps, cfg.out_dir + "/metrics_" + tag + ".csv");
    mppi::write_overlay_svg(cfg.out_dir + "/overlay_" + tag + ".svg", rx.map, ep.trace);
    episodes.push_back(std::move(ep));
  }

  const std::string method = mppi::rule_display_name(cfg.weight_rule, cfg.controller_model);
  const std::vector<mppi::SummaryRow> rows = {
      mppi::summarize_cell(method, cfg.costs.v_des, episodes)};
  mppi::save_summary_csv(rows, cfg.out_dir + "/summary.csv");
  write_run_info(cfg.out_dir, "run");
  std::cout << mppi::format_summary_table(rows);
  return 0;
}

int cmd_benchmark(const std::string& config_path, const std::string& out_override,
                  int threads) {
  mppi::ExperimentConfig cfg = mppi::load_experiment_config(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  mppi::ResolvedExperiment rx = mppi::resolve_experiment(cfg);
  fs::create_directories(cfg.out_dir);
  {
    std::ofstream snap(cfg.out_dir + "/config_resolved.json");
    snap << mppi::experiment_config_to_json(cfg);
  }

  std::vector<mppi::SummaryRow> rows;
  for (const std::string& rule_name : cfg.benchmark_rules) {
    const mppi::WeightRuleConfig rule =
        mppi::parse_weight_rule(rule_name, cfg.weight_rule.delta);
    for (double target : cfg.benchmark_targets) {
      const auto episodes = mppi::run_seed_sweep(rx, rule, target, cfg.seeds, threads);
      for (size_t i = 0; i < cfg.seeds.size(); ++i) {
        const std::string name = cfg.out_dir + "/metrics_" + rule_name + "_" +
                                 target_tag(target) + "_" + seed_tag(cfg.seeds[i]) + ".csv";
        mppi::save_lap_metrics(episodes[i].laps, name);
      }
      rows.push_back(mppi::summarize_cell(
          mppi::rule_display_name(rule, cfg.controller_model), target, episodes));
    }
  }
  mppi::save_summary_csv(rows, cfg.out_dir + "/benchmark_summary.csv");
  write_run_info(cfg.out_dir, "benchmark");
  std::cout << mppi::format_summary_table(rows);
  return 0;
}

int cmd_sysid(const std::string& data_path, double reg, const std::string& out_path) {
  const std::vector<mppi::SysidSample> rows = mppi::load_sysid_dataset(data_path);
  if (rows.empty()) {
    std::cerr << "sysid: dataset is empty\n";
    return 1;
  }
  if (rows.size() < 25) {
    std::cerr << "sysid: warning: only " << rows.size()
              << " rows (< 25 basis functions); the fit is underdetermined and "
                 "requires reg > 0\n";
  }

  // deterministic 80/20 split: every 5th row validates
  std::vector<mppi::SysidSample> train, val;
  for (size_t i = 0; i < rows.size(); ++i) {
    ((i % 5 == 4) ? val : train).push_back(rows[i]);
  }
  if (train.empty()) train = rows;

  const mppi::ThetaMatrix theta = mppi::fit_theta(train, reg);
  mppi::save_theta(theta, out_path);

  auto report = [&](const char* name, const std::vector<mppi::SysidSample>& set) {
    if (set.empty()) return;
    double se = 0.0, ae = 0.0;
    for (const auto& s : set) {
      const Eigen::Vector4d pred =
          theta.coeffs.transpose() * mppi::eval_basis(s.x_d, s.v);
      const Eigen::Vector4d err = pred - s.target;
      se += err.squaredNorm() / 4.0;
      ae += err.cwiseAbs().sum() / 4.0;
    }
    std::printf("%-10s rows %6zu   MSE %.6g   MAE %.6g\n", name, set.size(),
                se / set.size(), ae / set.size());
  };
  report("train", train);
  report("validation", val);
  std::cout << "theta written to " << out_path << "\n";
  return 0;
}

int cmd_verify(std::uint64_t seed) {
  const std::vector<mppi::CheckRow> rows = mppi::run_verification_suite(seed);
  bool ok = true;
  for (const mppi::CheckRow& r : rows) {
    const bool effective_pass = r.pass;
    if (!effective_pass && !r.expected_negative) ok = false;
    std::printf("%-32s stat %14.6g  threshold %12.6g  %s%s\n", r.name.c_str(),
                r.statistic, r.threshold, effective_pass ? "PASS" : "FAIL",
                r.expected_negative ? " (expected-negative)" : "");
  }
  std::cout << (ok ? "verification suite: all checks passed\n"
                   : "verification suite: FAILURES present\n");
  return ok ? 0 : 1;
}

int cmd_genmap(const mppi::OvalSpec& spec, const std::string& out_path) {
  const mppi::CostMap map = mppi::generate_oval_costmap(spec);
  mppi::save_costmap(map, out_path);
  std::cout << "map " << map.width << "x" << map.height << " written to " << out_path
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling-based MPC toolkit: information-theoretic and cross-entropy "
               "controllers over parallel trajectory rollouts"};
  app.require_subcommand(1);
  app.fallthrough();

  int threads = static_cast<int>(std::thread::hardware_concurrency());
  app.add_option("--threads", threads, "worker thread count")->capture_default_str();

  std::string config_path, out_dir;
  auto* run = app.add_subcommand("run", "closed-loop episodes for one configuration");
  run->add_option("--config", config_path, "experiment config (json)")->required();
  run->add_option("--out", out_dir, "output directory override");

  auto* bench = app.add_subcommand("benchmark", "weight-rule x speed-target sweep");
  bench->add_option("--config", config_path, "experiment config (json)")->required();
  bench->add_option("--out", out_dir, "output directory override");

  std::string data_path, theta_out = "theta.txt";
  double reg = 1e-6;
  auto* sysid = app.add_subcommand("sysid", "fit the basis-function model to a dataset");
  sysid->add_option("--data", data_path, "dataset (4 state + 2 input + 4 target columns)")
      ->required();
  sysid->add_option("--reg", reg, "Tikhonov coefficient")->capture_default_str();
  sysid->add_option("--out", theta_out, "output theta file")->capture_default_str();

  std::uint64_t seed = 0;
  auto* verify = app.add_subcommand("verify", "run the theory verification suite");
  verify->add_option("--seed", seed, "suite seed")->capture_default_str();

  mppi::OvalSpec spec;
  std::string map_out = "map.txt";
  auto* genmap = app.add_subcommand("genmap", "generate a synthetic oval cost map");
  genmap->add_option("--straight", spec.straight_length, "spine length [m]")
      ->capture_default_str();
  genmap->add_option("--radius", spec.radius, "centreline radius [m]")->capture_default_str();
  genmap->add_option("--width", spec.track_width, "track width [m]")->capture_default_str();
  genmap->add_option("--resolution", spec.resolution, "cell size [m]")->capture_default_str();
  genmap->add_option("--border", spec.border, "map margin [m]")->capture_default_str();
  genmap->add_option("--out", map_out, "output map file")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  if (threads < 1) threads = 1;

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, threads);
    if (bench->parsed()) return cmd_benchmark(config_path, out_dir, threads);
    if (sysid->parsed()) return cmd_sysid(data_path, reg, theta_out);
    if (verify->parsed()) return cmd_verify(seed);
    if (genmap->parsed()) return cmd_genmap(spec, map_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
