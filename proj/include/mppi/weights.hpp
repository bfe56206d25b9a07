#pragma once

#include "mppi/types.hpp"

namespace mppi {

/// Normalized probability weights over trajectory samples, together with
/// the min-cost baseline used for the numerically stable exponentiation.
struct WeightResult {
  Vec weights;        // K entries, sum to 1
  double rho{0.0};    // min_k S_k
  double normalizer{0.0};  // eta-tilde for the softmin, elite count for CEM
};

/// Softmin weighting: w_k = exp(-(S_k - rho) / lambda) / eta.
/// Shift-invariant in the costs and safe for arbitrarily large offsets.
WeightResult it_weights(const Vec& costs, double lambda);

/// Cross-entropy weighting: the round(K * (1 - delta)) lowest-cost samples
/// share the mass uniformly, everything else gets zero. Ties are broken by
/// ascending sample index so the elite count is always exact.
WeightResult cem_weights(const Vec& costs, double delta);

}  // namespace mppi
