#pragma once

#include "mppi/config.hpp"
#include "mppi/simulator.hpp"

#include <string>
#include <vector>

namespace mppi {

/// One aggregate row in the lap-statistics table: success rate over all
/// classified laps, time and speed statistics over the successful ones.
struct SummaryRow {
  std::string method;
  double target_mps{0.0};
  int laps{0};
  int successes{0};
  double success_pct{0.0};
  double lap_time_mean{0.0};
  double lap_time_std{0.0};
  double v_min{0.0};
  double v_max{0.0};
};

/// Runs one episode per seed with the given weight rule and speed target.
/// Episodes are independent and run in parallel; each episode's rollouts
/// stay single-threaded so results never depend on the worker count.
std::vector<EpisodeResult> run_seed_sweep(const ResolvedExperiment& rx,
                                          const WeightRuleConfig& rule, double target_mps,
                                          const std::vector<std::uint64_t>& seeds,
                                          int n_threads);

SummaryRow summarize_cell(const std::string& method, double target_mps,
                          const std::vector<EpisodeResult>& episodes);

std::string format_summary_table(const std::vector<SummaryRow>& rows);
void save_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);

std::string rule_display_name(const WeightRuleConfig& rule, ModelChoice model);

}  // namespace mppi
