#pragma once

#include "mppi/controller.hpp"
#include "mppi/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mppi {

/// Linear-quadratic test instance. Cost convention (no implicit halves):
///   S(V)   = sum_{t=1..T} x_t^T Q x_t + x_T^T Q_f x_T
///   J(V)   = S(V) + (lambda/2) * sum_t v_t^T Sigma^{-1} v_t
/// which is the softmin objective the sampling controller targets when
/// gamma = lambda and the base mean is zero.
struct LQInstance {
  Mat A;          // n x n
  Mat B;          // n x m
  Mat Q;          // n x n, PSD
  Mat Q_f;        // n x n, PSD
  int T{1};
  Vec x0;
  Vec sigma_diag; // m sampling variances
  double lambda{1.0};

  int state_dim() const { return static_cast<int>(A.rows()); }
  int control_dim() const { return static_cast<int>(B.cols()); }
  void validate() const;
};

/// Rollout-system binding of an LQ instance (running cost on post-step
/// states, terminal Q_f), for feeding the sampling optimizer.
RolloutSystem make_lq_system(const LQInstance& inst);

/// Finite-horizon Riccati recursion and forward pass for the deterministic
/// problem min J(V); the independent oracle for optimizer convergence.
ControlPlan lqr_oracle(const LQInstance& inst);

/// Generic Riccati solve with explicit matrices, cost
/// sum_{t=0..T-1} (x^T Q x + u^T R u) + x_T^T Qf x_T.
ControlPlan riccati_plan(const Mat& A, const Mat& B, const Mat& Q, const Mat& Qf,
                         const Mat& R, int T, const Vec& x0);

/// Adaptive composite Simpson integration of f over [a, b].
double simpson_integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 30);

/// One-dimensional free-energy probe: scalar cost S(v), Gaussian base
/// N(base_mean, sigma2) and candidate N(cand_mean, sigma2).
struct ScalarFreeEnergyProbe {
  std::function<double(double)> cost;
  double base_mean{0.0};
  double cand_mean{0.0};
  double sigma2{1.0};
  double lambda{1.0};
  int n_samples{20000};
  std::uint64_t seed{0};
};

struct BoundReport {
  double lhs{0.0};      // -lambda * log E_base[exp(-S/lambda)]
  double rhs{0.0};      // E_cand[S] + lambda * KL(cand || base)
  double margin{0.0};   // rhs - lhs
  double se_lhs{0.0};
  double se_rhs{0.0};
  double se_margin{0.0};
};

/// Monte-Carlo check of the free-energy lower bound
/// -lambda*F <= E_Q[S] + lambda*KL(Q || P).
BoundReport check_free_energy_bound(const ScalarFreeEnergyProbe& probe);

/// Quadrature value of the probe's lhs, independent of the MC path.
double free_energy_lhs_quadrature(const ScalarFreeEnergyProbe& probe);

/// Mean/variance of q*(v) ∝ exp(-S(v)/lambda) N(v | 0, sigma2) for
/// S(v) = (v - a)^2: precision 1/sigma2 + 2/lambda, mean (2a/lambda)/prec.
struct GaussianPosterior {
  double mean{0.0};
  double variance{0.0};
};
GaussianPosterior optimal_gaussian_posterior(double a, double lambda, double sigma2);

struct WeightedMeanEstimate {
  double estimate{0.0};
  double std_error{0.0};
};

/// Self-normalized importance-sampling estimate of E_{Q*}[v] using the
/// softmin weights on K samples drawn from N(proposal_mean, sigma2). The
/// proposal shift is corrected by the full importance weight against a
/// zero-mean base.
WeightedMeanEstimate check_weighted_mean(double a, double lambda, double sigma2, int K,
                                         std::uint64_t seed = 0,
                                         double proposal_mean = 0.0);

struct EstimatorPair {
  Vec u_pi;
  Vec u_it;
  double max_diff{0.0};
};

/// Evaluates the trajectory-space and control-space forms of the sampled
/// optimal control on one shared sample set. With B = G*sqrt(Sigma) the two
/// agree to machine precision; with any other B they differ.
EstimatorPair pi_it_equivalence(const Mat& G, const Mat& B, const Vec& sigma_diag,
                                double lambda, int K, std::uint64_t seed = 0);

/// One row of the verification suite output.
struct CheckRow {
  std::string name;
  double statistic{0.0};
  double threshold{0.0};
  bool pass{false};
  bool expected_negative{false};  // intentionally violated assumption
};

/// Runs every check with the given seed; a row fails the suite only if
/// pass == false and it is not an expected-negative row.
std::vector<CheckRow> run_verification_suite(std::uint64_t seed);

}  // namespace mppi
