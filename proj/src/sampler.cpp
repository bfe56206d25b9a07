#include "mppi/sampler.hpp"

namespace mppi {

PerturbationBatch sample_perturbations(const SamplingParams& params,
                                       std::uint64_t iteration) {
  params.validate();
  const int K = params.samples;
  const int T = params.horizon_steps;
  const int m = params.dim();

  Vec scale(m);
  for (int c = 0; c < m; ++c) scale[c] = std::sqrt(params.sigma_diag[c]);

  PerturbationBatch batch;
  batch.eps.resize(K);
  batch.zero_mean_flag.assign(K, 0);

  for (int k = 0; k < K; ++k) {
    Mat e(T, m);
    for (int t = 0; t < T; ++t) {
      for (int pair = 0; pair * 2 < m; ++pair) {
        double z0 = 0.0, z1 = 0.0;
        rng::normal_pair(rng::counter_hash(params.seed, rng::kStreamPerturbations,
                                           iteration, static_cast<std::uint64_t>(k),
                                           static_cast<std::uint64_t>(t),
                                           static_cast<std::uint64_t>(pair)),
                         z0, z1);
        e(t, 2 * pair) = scale[2 * pair] * z0;
        if (2 * pair + 1 < m) e(t, 2 * pair + 1) = scale[2 * pair + 1] * z1;
      }
    }
    batch.eps[k] = std::move(e);
  }

  const int n_zero = static_cast<int>(std::lround(params.explore_fraction * K));
  for (int k = K - n_zero; k < K; ++k) batch.zero_mean_flag[k] = 1;
  return batch;
}

}  // namespace mppi
