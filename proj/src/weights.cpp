#include "mppi/weights.hpp"

#include <algorithm>
#include <numeric>

namespace mppi {

WeightResult it_weights(const Vec& costs, double lambda) {
  const int K = static_cast<int>(costs.size());
  if (K < 1) throw std::invalid_argument("it_weights: need at least one cost");
  if (!(lambda > 0.0)) throw std::invalid_argument("it_weights: lambda must be > 0");
  if (!costs.allFinite()) throw std::invalid_argument("it_weights: non-finite cost");

  WeightResult r;
  r.rho = costs.minCoeff();
  r.weights.resize(K);
  double eta = 0.0;
  for (int k = 0; k < K; ++k) {
    r.weights[k] = std::exp(-(costs[k] - r.rho) / lambda);
    eta += r.weights[k];
  }
  r.normalizer = eta;
  r.weights /= eta;
  return r;
}

WeightResult cem_weights(const Vec& costs, double delta) {
  const int K = static_cast<int>(costs.size());
  if (K < 1) throw std::invalid_argument("cem_weights: need at least one cost");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("cem_weights: delta must be in (0, 1)");
  }
  if (!costs.allFinite()) throw std::invalid_argument("cem_weights: non-finite cost");

  const int elite = static_cast<int>(std::lround(K * (1.0 - delta)));
  if (elite < 1) {
    throw std::invalid_argument("cem_weights: delta leaves an empty elite set");
  }

  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (costs[a] != costs[b]) return costs[a] < costs[b];
    return a < b;
  });

  WeightResult r;
  r.rho = costs[order.front()];
  r.normalizer = static_cast<double>(elite);
  r.weights = Vec::Zero(K);
  for (int i = 0; i < elite; ++i) r.weights[order[i]] = 1.0 / elite;
  return r;
}

}  // namespace mppi
