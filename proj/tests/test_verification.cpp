#include "mppi/verification.hpp"

#include <doctest.h>

using namespace mppi;

namespace {

LQInstance double_integrator(int T, double lambda, double sigma2) {
  LQInstance inst;
  inst.A = (Mat(2, 2) << 1.0, 0.05, 0.0, 1.0).finished();
  inst.B = (Mat(2, 1) << 0.0, 0.05).finished();
  inst.Q = (Mat(2, 2) << 1.0, 0.0, 0.0, 0.1).finished();
  inst.Q_f = (Mat(2, 2) << 20.0, 0.0, 0.0, 2.0).finished();
  inst.T = T;
  inst.x0 = (Vec(2) << 2.0, 0.0).finished();
  inst.sigma_diag = Vec::Constant(1, sigma2);
  inst.lambda = lambda;
  return inst;
}

}  // namespace

TEST_CASE("adaptive Simpson integrates smooth functions") {
  const double val = simpson_integrate([](double x) { return std::exp(-x * x); }, -8.0, 8.0);
  CHECK(val == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-10));
  const double poly = simpson_integrate([](double x) { return 3.0 * x * x; }, 0.0, 2.0);
  CHECK(poly == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("gaussian posterior closed form") {
  const GaussianPosterior p = optimal_gaussian_posterior(1.0, 2.0, 1.0);
  CHECK(p.mean == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p.variance == doctest::Approx(0.5).epsilon(1e-15));

  CHECK(optimal_gaussian_posterior(0.0, 2.0, 1.0).mean == 0.0);

  const GaussianPosterior wide = optimal_gaussian_posterior(1.0, 1e12, 0.7);
  CHECK(wide.mean == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(wide.variance == doctest::Approx(0.7).epsilon(1e-9));

  CHECK_THROWS_AS(optimal_gaussian_posterior(1.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("weighted mean converges to the closed-form posterior mean") {
  const WeightedMeanEstimate est = check_weighted_mean(1.0, 2.0, 1.0, 100000, 11);
  CHECK(std::abs(est.estimate - 0.5) <= 4.0 * est.std_error);
  CHECK(est.std_error < 0.01);

  const WeightedMeanEstimate zero = check_weighted_mean(0.0, 2.0, 1.0, 50000, 12);
  CHECK(std::abs(zero.estimate) <= 4.0 * zero.std_error);
}

TEST_CASE("weighted mean is invariant to the proposal mean") {
  for (double proposal : {-0.5, 0.3, 0.9}) {
    CAPTURE(proposal);
    const WeightedMeanEstimate est = check_weighted_mean(1.0, 2.0, 1.0, 200000, 13, proposal);
    CHECK(std::abs(est.estimate - 0.5) <= 4.0 * est.std_error);
  }
}

TEST_CASE("free energy bound: constant cost achieves equality") {
  ScalarFreeEnergyProbe probe;
  probe.cost = [](double) { return 42.0; };
  probe.lambda = 3.0;
  probe.n_samples = 5000;
  const BoundReport r = check_free_energy_bound(probe);
  CHECK(r.lhs == doctest::Approx(42.0).epsilon(1e-13));
  CHECK(std::abs(r.margin) <= 1e-12);
}

TEST_CASE("free energy bound: quadrature oracle and strict gap") {
  ScalarFreeEnergyProbe probe;
  probe.cost = [](double v) { return (v - 1.0) * (v - 1.0); };
  probe.lambda = 2.0;
  probe.cand_mean = 0.5;
  probe.sigma2 = 1.0;
  probe.n_samples = 100000;
  probe.seed = 21;
  const BoundReport mc = check_free_energy_bound(probe);
  const double lhs = free_energy_lhs_quadrature(probe);
  // E_P[exp(-(v-1)^2/2)] under N(0,1) is exp(-1/4)/sqrt(2)
  const double exact = -2.0 * std::log(std::exp(-0.25) / std::sqrt(2.0));
  CHECK(lhs == doctest::Approx(exact).epsilon(1e-9));
  CHECK(std::abs(mc.lhs - lhs) <= 4.0 * mc.se_lhs);
  CHECK(mc.margin > 0.0);
  CHECK(mc.margin >= -3.0 * mc.se_margin);
}

TEST_CASE("free energy bound requires a minimum sample count") {
  ScalarFreeEnergyProbe probe;
  probe.cost = [](double) { return 0.0; };
  probe.n_samples = 10;
  CHECK_THROWS_AS(check_free_energy_bound(probe), std::invalid_argument);
}

TEST_CASE("pi/it equivalence for square and tall couplings") {
  Mat g_square(2, 2);
  g_square << 1.0, 0.3, -0.2, 0.8;
  Vec sd(2);
  sd << 0.4, 0.9;
  Mat sqrt_sigma = Mat::Zero(2, 2);
  sqrt_sigma.diagonal() = sd.cwiseSqrt();
  const EstimatorPair sq = pi_it_equivalence(g_square, Mat(g_square * sqrt_sigma), sd, 1.0, 2000, 31);
  CHECK(sq.max_diff <= 1e-10);

  Mat g_tall(4, 2);
  g_tall << 1.0, 0.3, -0.2, 0.8, 0.5, -0.7, 0.1, 0.9;
  const EstimatorPair tall = pi_it_equivalence(g_tall, Mat(g_tall * sqrt_sigma), sd, 1.0, 2000, 32);
  CHECK(tall.max_diff <= 1e-10);
}

TEST_CASE("pi/it equivalence fails when the noise coupling is wrong") {
  Mat g(2, 2);
  g << 1.0, 0.0, 0.0, 1.0;
  Vec sd(2);
  sd << 0.5, 0.5;
  const EstimatorPair pair = pi_it_equivalence(g, Mat(3.0 * g), sd, 1.0, 2000, 33);
  CHECK(pair.max_diff > 1e-6);
}

TEST_CASE("rank-deficient couplings are rejected") {
  Mat g(3, 2);
  g.col(0) << 1.0, 2.0, 3.0;
  g.col(1) = 2.0 * g.col(0);  // rank 1
  Vec sd = Vec::Constant(2, 1.0);
  CHECK_THROWS_AS(pi_it_equivalence(g, g, sd, 1.0, 1000, 34), std::invalid_argument);
}

TEST_CASE("riccati oracle: scalar case, zero costs and scale invariance") {
  LQInstance inst;
  inst.A = Mat::Identity(1, 1);
  inst.B = Mat::Identity(1, 1);
  inst.Q = Mat::Zero(1, 1);
  inst.Q_f = Mat::Identity(1, 1);
  inst.T = 1;
  inst.x0 = Vec::Ones(1);
  inst.sigma_diag = Vec::Ones(1);
  inst.lambda = 2.0;
  CHECK(lqr_oracle(inst).values(0, 0) == doctest::Approx(-0.5).epsilon(1e-14));

  LQInstance zero = double_integrator(10, 0.5, 1.0);
  zero.Q.setZero();
  zero.Q_f.setZero();
  CHECK(lqr_oracle(zero).values.cwiseAbs().maxCoeff() == 0.0);

  const LQInstance base = double_integrator(15, 0.5, 1.0);
  LQInstance doubled = base;
  doubled.Q *= 2.0;
  doubled.Q_f *= 2.0;
  doubled.lambda *= 2.0;  // doubles R = (lambda/2) Sigma^{-1}
  const ControlPlan a = lqr_oracle(base);
  const ControlPlan b = lqr_oracle(doubled);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() <= 1e-12);

  LQInstance bad = base;
  bad.Q(0, 1) = 5.0;  // asymmetric, indefinite
  bad.Q(1, 0) = 5.0;
  bad.Q(0, 0) = 0.0;
  bad.Q(1, 1) = 0.0;
  CHECK_THROWS_AS(lqr_oracle(bad), std::invalid_argument);
}

TEST_CASE("riccati matches brute-force minimization on a short horizon") {
  const LQInstance inst = double_integrator(3, 0.8, 0.5);
  const ControlPlan plan = lqr_oracle(inst);

  // brute force: J(V) on the deterministic rollout, coordinate descent
  auto cost_of = [&](const Vec& v) {
    Vec x = inst.x0;
    double j = 0.0;
    for (int t = 0; t < 3; ++t) {
      x = inst.A * x + inst.B * v.segment(t, 1);
      j += (x.transpose() * inst.Q * x).value();
      j += (inst.lambda / 2.0) * v[t] * v[t] / inst.sigma_diag[0];
    }
    j += (x.transpose() * inst.Q_f * x).value();
    // the oracle's running cost starts at x_1, matching the rollout
    return j;
  };
  Vec v = Vec::Zero(3);
  for (int sweep = 0; sweep < 400; ++sweep) {
    for (int t = 0; t < 3; ++t) {
      // golden-section-ish refinement per coordinate
      double lo = v[t] - 2.0, hi = v[t] + 2.0;
      for (int it = 0; it < 80; ++it) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        Vec v1 = v, v2 = v;
        v1[t] = m1;
        v2[t] = m2;
        if (cost_of(v1) < cost_of(v2)) hi = m2; else lo = m1;
      }
      v[t] = 0.5 * (lo + hi);
    }
  }
  for (int t = 0; t < 3; ++t) {
    CHECK(plan.values(t, 0) == doctest::Approx(v[t]).epsilon(1e-5));
  }
}

TEST_CASE("sampling optimizer converges to the riccati plan on a small LQ instance") {
  const LQInstance inst = double_integrator(10, 0.05, 0.04);
  const ControlPlan oracle = lqr_oracle(inst);

  SamplingParams p;
  p.samples = 1024;
  p.horizon_steps = inst.T;
  p.dt = 1.0;
  p.sigma_diag = inst.sigma_diag;
  p.lambda = inst.lambda;
  p.gamma = inst.lambda;  // alpha = 0: base is the uncontrolled system
  p.explore_fraction = 0.0;
  p.seed = 314;
  ControlBounds bounds(Vec::Constant(1, -100.0), Vec::Constant(1, 100.0));
  ControllerState cs = make_controller_state(p, WeightRuleConfig{}, {}, bounds);

  const RolloutSystem sys = make_lq_system(inst);
  const ControlPlan plan = optimize_to_convergence(sys, inst.x0, cs, 60, 2);
  const double rms_err = std::sqrt((plan.values - oracle.values).squaredNorm() / inst.T);
  const double rms_oracle = std::sqrt(oracle.values.squaredNorm() / inst.T);
  CHECK(rms_err <= 0.08 * rms_oracle);
}

TEST_CASE("verification suite passes end to end") {
  const auto rows = run_verification_suite(7);
  for (const CheckRow& r : rows) {
    CAPTURE(r.name);
    CHECK(r.pass);
  }
}
