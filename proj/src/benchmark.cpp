#include "mppi/benchmark.hpp"

#include "mppi/parallel.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mppi {

std::vector<EpisodeResult> run_seed_sweep(const ResolvedExperiment& rx,
                                          const WeightRuleConfig& rule, double target_mps,
                                          const std::vector<std::uint64_t>& seeds,
                                          int n_threads) {
  std::vector<EpisodeResult> results(seeds.size());
  parallel_for_chunks(static_cast<int>(seeds.size()), n_threads, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      SimConfig sim = rx.sim;
      sim.sampling.seed = seeds[i];
      sim.weight_rule = rule;
      sim.costs.v_des = target_mps;
      results[i] = simulate_episode(sim, *rx.controller_model, rx.map, /*n_threads=*/1);
    }
  });
  return results;
}

SummaryRow summarize_cell(const std::string& method, double target_mps,
                          const std::vector<EpisodeResult>& episodes) {
  SummaryRow row;
  row.method = method;
  row.target_mps = target_mps;

  std::vector<double> times;
  double v_lo = std::numeric_limits<double>::infinity();
  double v_hi = -std::numeric_limits<double>::infinity();
  for (const EpisodeResult& ep : episodes) {
    for (const LapMetrics& lap : ep.laps) {
      ++row.laps;
      if (lap.success) {
        ++row.successes;
        times.push_back(lap.lap_time);
        v_lo = std::min(v_lo, lap.v_min);
        v_hi = std::max(v_hi, lap.v_max);
      }
    }
  }
  row.success_pct = row.laps > 0 ? 100.0 * row.successes / row.laps : 0.0;
  if (!times.empty()) {
    double mean = 0.0;
    for (double t : times) mean += t;
    mean /= times.size();
    double var = 0.0;
    for (double t : times) var += (t - mean) * (t - mean);
    row.lap_time_mean = mean;
    row.lap_time_std = times.size() > 1 ? std::sqrt(var / (times.size() - 1)) : 0.0;
    row.v_min = v_lo;
    row.v_max = v_hi;
  }
  return row;
}

std::string rule_display_name(const WeightRuleConfig& rule, ModelChoice model) {
  std::string name = rule.rule == WeightRule::kCrossEntropy ? "CEM" : "IT-MPC";
  switch (model) {
    case ModelChoice::kTruth: name += "-truth"; break;
    case ModelChoice::kBasis: name += "-BF"; break;
    case ModelChoice::kMlp: name += "-NN"; break;
  }
  return name;
}

std::string format_summary_table(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  char buf[160];
  out << "NOTE: simulation results on a synthetic track, not field data.\n";
  std::snprintf(buf, sizeof(buf), "%-16s %-8s %-6s %-10s %-16s %-14s\n", "Method",
                "Target", "Laps", "Success %", "Lap Time", "Speed m/s");
  out << buf;
  for (const SummaryRow& r : rows) {
    if (r.successes > 0) {
      std::snprintf(buf, sizeof(buf),
                    "%-16s %-8.1f %-6d %-10.2f %6.2f +- %-6.2f %5.2f - %-5.2f\n",
                    r.method.c_str(), r.target_mps, r.laps, r.success_pct, r.lap_time_mean,
                    r.lap_time_std, r.v_min, r.v_max);
    } else {
      std::snprintf(buf, sizeof(buf), "%-16s %-8.1f %-6d %-10.2f %-16s %-14s\n",
                    r.method.c_str(), r.target_mps, r.laps, r.success_pct, "N/A", "N/A");
    }
    out << buf;
  }
  return out.str();
}

void save_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write summary file: " + path);
  out << "method,target_mps,laps,successes,success_pct,lap_time_mean_s,lap_time_std_s,"
         "v_min_mps,v_max_mps\n";
  char buf[256];
  for (const SummaryRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.method.c_str(), r.target_mps, r.laps, r.successes, r.success_pct,
                  r.lap_time_mean, r.lap_time_std, r.v_min, r.v_max);
    out << buf;
  }
}

}  // namespace mppi
