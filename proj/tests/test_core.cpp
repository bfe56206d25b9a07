#include "mppi/config.hpp"
#include "mppi/sampler.hpp"
#include "mppi/types.hpp"

#include <doctest.h>

#include <cmath>

using namespace mppi;

namespace {

SamplingParams reference_params(int samples, int horizon, std::uint64_t seed) {
  SamplingParams p;
  p.samples = samples;
  p.horizon_steps = horizon;
  p.dt = 0.025;
  p.sigma_diag = (Vec(2) << 0.0306, 0.0506).finished();
  p.lambda = 12.5;
  p.gamma = 0.1;
  p.explore_fraction = 0.0;
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("state flatten/unflatten round trip") {
  VehicleState zero;
  CHECK(flatten_state(zero).isZero());

  VehicleState s{1.5, -2.25, 0.75, 0.01, 6.5, -0.4, 1.2};
  const VehicleState back = unflatten_state(flatten_state(s));
  CHECK(back.p_x == s.p_x);
  CHECK(back.p_y == s.p_y);
  CHECK(back.theta == s.theta);
  CHECK(back.roll == s.roll);
  CHECK(back.v_x == s.v_x);
  CHECK(back.v_y == s.v_y);
  CHECK(back.theta_dot == s.theta_dot);

  StateVec v = flatten_state(s);
  v[3] = std::nan("");
  CHECK_THROWS_AS(unflatten_state(v), std::invalid_argument);
}

TEST_CASE("flatten order is (p_x, p_y, theta, roll, v_x, v_y, theta_dot)") {
  VehicleState s{1, 2, 3, 4, 5, 6, 7};
  const StateVec v = flatten_state(s);
  for (int i = 0; i < 7; ++i) CHECK(v[i] == i + 1);
}

TEST_CASE("sampler determinism: same (seed, iteration) is bit-identical") {
  const SamplingParams p = reference_params(16, 20, 99);
  const PerturbationBatch a = sample_perturbations(p, 7);
  const PerturbationBatch b = sample_perturbations(p, 7);
  REQUIRE(a.samples() == b.samples());
  for (int k = 0; k < a.samples(); ++k) {
    CHECK(a.eps[k] == b.eps[k]);
  }
  const PerturbationBatch c = sample_perturbations(p, 8);
  CHECK(a.eps[0] != c.eps[0]);
}

TEST_CASE("sampler addresses elements by counters, not draw order") {
  const SamplingParams p = reference_params(8, 10, 123);
  const PerturbationBatch batch = sample_perturbations(p, 3);
  for (int k = 0; k < 8; ++k) {
    for (int t = 0; t < 10; ++t) {
      const double z0 = rng::counter_normal(p.seed, rng::kStreamPerturbations, 3, k, t, 0);
      const double z1 = rng::counter_normal(p.seed, rng::kStreamPerturbations, 3, k, t, 1);
      CHECK(batch.eps[k](t, 0) == std::sqrt(p.sigma_diag[0]) * z0);
      CHECK(batch.eps[k](t, 1) == std::sqrt(p.sigma_diag[1]) * z1);
    }
  }
}

TEST_CASE("sample covariance matches the configured sigma within 10%") {
  const SamplingParams p = reference_params(1200, 100, 2024);
  const PerturbationBatch batch = sample_perturbations(p, 0);
  for (int c = 0; c < 2; ++c) {
    double sum = 0.0, sum2 = 0.0;
    const double n = 1200.0 * 100.0;
    for (const Mat& e : batch.eps) {
      sum += e.col(c).sum();
      sum2 += e.col(c).squaredNorm();
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(var == doctest::Approx(p.sigma_diag[c]).epsilon(0.10));
  }
}

TEST_CASE("scalar batch mean and variance at 1e5 draws") {
  SamplingParams p = reference_params(100000, 1, 5);
  p.sigma_diag = (Vec(1) << 0.25).finished();
  const PerturbationBatch batch = sample_perturbations(p, 0);
  double sum = 0.0, sum2 = 0.0;
  for (const Mat& e : batch.eps) {
    sum += e(0, 0);
    sum2 += e(0, 0) * e(0, 0);
  }
  const double n = 1e5;
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  const double se_mean = std::sqrt(0.25 / n);
  CHECK(std::abs(mean) <= 4.0 * se_mean);
  CHECK(var == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("explore fraction flags exactly round(f*K) trailing samples") {
  SamplingParams p = reference_params(10, 4, 1);
  p.explore_fraction = 0.1;
  const PerturbationBatch batch = sample_perturbations(p, 0);
  int flagged = 0;
  for (auto f : batch.zero_mean_flag) flagged += f;
  CHECK(flagged == 1);
  CHECK(batch.zero_mean_flag.back() == 1);
  CHECK(batch.zero_mean_flag.front() == 0);
}

TEST_CASE("invalid sampling params are rejected") {
  SamplingParams p = reference_params(0, 10, 1);
  CHECK_THROWS_AS(sample_perturbations(p, 0), std::invalid_argument);
  p = reference_params(4, 10, 1);
  p.sigma_diag[1] = 0.0;
  CHECK_THROWS_AS(sample_perturbations(p, 0), std::invalid_argument);
  p = reference_params(4, 10, 1);
  p.explore_fraction = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.explore_fraction = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("sampling params survive the config round trip") {
  SamplingParams p = reference_params(321, 17, 0xDEADBEEF);
  p.explore_fraction = 0.02;
  p.base_mean = Mat::Constant(17, 2, 0.125);
  const SamplingParams q = sampling_params_from_json(sampling_params_to_json(p));
  CHECK(q.samples == p.samples);
  CHECK(q.horizon_steps == p.horizon_steps);
  CHECK(q.dt == p.dt);
  CHECK(q.sigma_diag == p.sigma_diag);
  CHECK(q.lambda == p.lambda);
  CHECK(q.gamma == p.gamma);
  CHECK(q.explore_fraction == p.explore_fraction);
  CHECK(q.seed == p.seed);
  CHECK(q.base_mean == p.base_mean);
}

TEST_CASE("documented config keys are accepted") {
  const char* text = R"({
    "lambda": 12.5, "gamma": 0.1, "sigma_diag": [0.0306, 0.0506],
    "horizon_steps": 80, "dt": 0.025, "samples": 1200,
    "explore_fraction": 0.01, "seed": 42
  })";
  const SamplingParams p = sampling_params_from_json(text);
  CHECK(p.lambda == 12.5);
  CHECK(p.samples == 1200);
  CHECK(p.seed == 42);
  CHECK(p.base_mean.size() == 0);
}
