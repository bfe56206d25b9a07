#include "mppi/weights.hpp"

#include <doctest.h>

#include <cmath>

using namespace mppi;

TEST_CASE("equal costs give exactly uniform weights") {
  const Vec costs = Vec::Constant(7, 123.25);
  const WeightResult w = it_weights(costs, 12.5);
  for (int k = 0; k < 7; ++k) CHECK(w.weights[k] == 1.0 / 7.0);
  CHECK(w.rho == 123.25);
  CHECK(w.normalizer == 7.0);
}

TEST_CASE("softmin reference values for costs [0,1,2], lambda 1") {
  const Vec costs = (Vec(3) << 0.0, 1.0, 2.0).finished();
  const WeightResult w = it_weights(costs, 1.0);
  CHECK(w.weights[0] == doctest::Approx(0.66524).epsilon(1e-4));
  CHECK(w.weights[1] == doctest::Approx(0.24473).epsilon(1e-4));
  CHECK(w.weights[2] == doctest::Approx(0.09003).epsilon(1e-4));
  CHECK(w.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("it_weights is exactly shift invariant after the rho subtraction") {
  const Vec costs = (Vec(3) << 0.0, 1.0, 2.0).finished();
  const WeightResult base = it_weights(costs, 1.0);
  const WeightResult shifted = it_weights(Vec(costs.array() + 1e9), 1.0);
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(base.weights[k] - shifted.weights[k]) <= 1e-12);
  }
  CHECK(shifted.rho == 1e9);
}

TEST_CASE("it_weights ordering is strictly monotone in cost") {
  const Vec costs = (Vec(5) << 3.0, 1.0, 4.0, 1.5, 9.0).finished();
  const WeightResult w = it_weights(costs, 2.0);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (costs[i] < costs[j]) CHECK(w.weights[i] > w.weights[j]);
    }
  }
  // the minimizer always carries at least 1/K
  CHECK(w.weights[1] >= 1.0 / 5.0);
}

TEST_CASE("temperature limits") {
  const Vec costs = (Vec(4) << 0.0, 0.5, 1.5, 7.0).finished();
  const WeightResult hot = it_weights(costs, 1e9);
  CHECK((hot.weights.array() - 0.25).abs().maxCoeff() <= 1e-8);
  const WeightResult cold = it_weights(costs, 1e-9);
  CHECK(cold.weights[0] == doctest::Approx(1.0));
  CHECK(cold.weights.tail(3).maxCoeff() <= 1e-12);
}

TEST_CASE("it_weights rejects bad input") {
  CHECK_THROWS_AS(it_weights(Vec(), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(it_weights(Vec::Zero(3), 0.0), std::invalid_argument);
  Vec costs = Vec::Zero(3);
  costs[1] = std::nan("");
  CHECK_THROWS_AS(it_weights(costs, 1.0), std::invalid_argument);
}

TEST_CASE("cem selects the single best sample at delta = 0.8, K = 5") {
  const Vec costs = (Vec(5) << 5.0, 1.0, 4.0, 2.0, 3.0).finished();
  const WeightResult w = cem_weights(costs, 0.8);
  CHECK(w.weights[1] == 1.0);
  CHECK(w.weights.sum() == 1.0);
  for (int k : {0, 2, 3, 4}) CHECK(w.weights[k] == 0.0);
  CHECK(w.rho == 1.0);
  CHECK(w.normalizer == 1.0);
}

TEST_CASE("cem ties break by ascending sample index") {
  const Vec costs = Vec::Constant(10, 3.5);
  const WeightResult w = cem_weights(costs, 0.8);
  CHECK(w.weights[0] == 0.5);
  CHECK(w.weights[1] == 0.5);
  for (int k = 2; k < 10; ++k) CHECK(w.weights[k] == 0.0);
}

TEST_CASE("delta 0.8 with K 1200 keeps exactly 240 elite samples") {
  Vec costs(1200);
  for (int k = 0; k < 1200; ++k) costs[k] = std::cos(0.37 * k) * 50.0 + k % 7;
  const WeightResult w = cem_weights(costs, 0.8);
  int nonzero = 0;
  for (int k = 0; k < 1200; ++k) {
    if (w.weights[k] != 0.0) {
      ++nonzero;
      CHECK(w.weights[k] == 1.0 / 240.0);
    }
  }
  CHECK(nonzero == 240);
  CHECK(w.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cem rejects an empty elite set") {
  CHECK_THROWS_AS(cem_weights(Vec::Zero(3), 0.999), std::invalid_argument);
  CHECK_THROWS_AS(cem_weights(Vec::Zero(3), 1.2), std::invalid_argument);
  CHECK_THROWS_AS(cem_weights(Vec::Zero(3), 0.0), std::invalid_argument);
}

TEST_CASE("both rules produce normalized non-negative weights") {
  Vec costs(64);
  std::uint64_t h = 88172645463325252ull;
  for (int k = 0; k < 64; ++k) {
    h ^= h << 13; h ^= h >> 7; h ^= h << 17;
    costs[k] = static_cast<double>(h % 100000) / 100.0;
  }
  for (const WeightResult& w : {it_weights(costs, 5.0), cem_weights(costs, 0.75)}) {
    CHECK(w.weights.minCoeff() >= 0.0);
    CHECK(std::abs(w.weights.sum() - 1.0) <= 1e-12);
    CHECK(w.rho == costs.minCoeff());
  }
}
