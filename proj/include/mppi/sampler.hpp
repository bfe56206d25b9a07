#pragma once

#include "mppi/types.hpp"

#include <cstdint>

namespace mppi {

// Counter-based Gaussian generation. Every draw is a pure function of
// (seed, stream, iteration, k, t, component), so sampling is reproducible
// under any parallel schedule and can be re-evaluated out of order.

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t iteration, std::uint64_t k,
                                  std::uint64_t t, std::uint64_t pair) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ iteration);
  h = splitmix64(h ^ k);
  h = splitmix64(h ^ t);
  h = splitmix64(h ^ pair);
  return h;
}

// Independent standard-normal pair via Box-Muller from one counter value.
inline void normal_pair(std::uint64_t h, double& z0, double& z1) {
  const double u1 = static_cast<double>((h >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(splitmix64(h) >> 11) * 0x1.0p-53;  // [0, 1)
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * M_PI * u2;
  z0 = r * std::cos(phi);
  z1 = r * std::sin(phi);
}

// Standard normal addressed by counters; component 2j / 2j+1 take the two
// branches of the same Box-Muller draw.
inline double counter_normal(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t iteration, std::uint64_t k,
                             std::uint64_t t, int component) {
  double z0 = 0.0, z1 = 0.0;
  normal_pair(counter_hash(seed, stream, iteration, k, t,
                           static_cast<std::uint64_t>(component / 2)),
              z0, z1);
  return (component % 2 == 0) ? z0 : z1;
}

// Fixed stream ids, one per independent noise consumer.
constexpr std::uint64_t kStreamPerturbations = 0x706572747572626full;
constexpr std::uint64_t kStreamExecutionNoise = 0x657865636e6f6973ull;
constexpr std::uint64_t kStreamEstimateNoise = 0x657374696d617465ull;
constexpr std::uint64_t kStreamVerification = 0x7665726966790000ull;

}  // namespace rng

/// Draws K i.i.d. Gaussian control-noise sequences eps ~ N(0, Sigma) and
/// flags the trailing round(explore_fraction * K) samples as zero-mean
/// exploration samples.
PerturbationBatch sample_perturbations(const SamplingParams& params,
                                       std::uint64_t iteration);

}  // namespace mppi
