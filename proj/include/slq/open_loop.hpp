#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "slq/regression.hpp"
#include "slq/riccati.hpp"

namespace slq {

/// Open-loop control in the closed coefficient representation
///   U_n = sum_{m=1}^n prod_{i=1}^m (1 + D_i W) f[n][m]
///       + sum_{m=1}^n D_m W ftilde[n][m] + g[n],
/// all coefficients deterministic spectral vectors. Row n of f and ftilde
/// holds entries m = 1..n at index m-1; row 0 is empty.
struct CoefficientControl {
  const FemSpace* space = nullptr;
  TimeGrid grid;
  std::vector<std::vector<Eigen::VectorXd>> f;
  std::vector<std::vector<Eigen::VectorXd>> ftilde;
  std::vector<Eigen::VectorXd> g;
};

CoefficientControl zero_control(const FemSpace& space, const TimeGrid& grid);

/// a + c * b, entrywise on all coefficient arrays.
CoefficientControl add_scaled(const CoefficientControl& a, double c,
                              const CoefficientControl& b);

/// Step denominator bound 1 + alpha T e^(beta^2 T) + T^2 e^(beta^2 T).
double kappa_bound(const ProblemSpec& spec);

struct GdStepResult {
  CoefficientControl Y;       // exact conditional-expectation coefficients
  CoefficientControl U_next;  // (1 - 1/kappa) U + (1/kappa) Y
};

/// One exact gradient step for additive noise: expands the adjoint
/// accumulation into the coefficient algebra and returns both the exact Y
/// coefficients and the convex-combination update. Requires beta = 0.
GdStepResult gd_step_exact(const CoefficientControl& U, const ProblemSpec& spec,
                           double kappa);

/// Exact squared control norm tau sum_n E ||U_n||^2 via the closed moment
/// identities of the (1 + DW)-product representation.
double control_norm_exact(const CoefficientControl& U);

/// Exact discrete cost of the control: expands the controlled state into the
/// same representation and applies the moment identities. Requires beta = 0.
double evaluate_cost_exact(const CoefficientControl& U, const ProblemSpec& spec);

/// Plugs a sampled path's increments into the representation.
std::vector<FemFunction> evaluate_control_on_path(const CoefficientControl& U,
                                                  const BrownianPath& path);

struct GdConfig {
  double kappa = 0.0;
  int max_iters = 100;
  double tol = 1e-8;
};

struct GdReport {
  int iterations_run = 0;
  std::vector<double> distances;  // ||U^{l+1} - U^l||_U per iteration
  std::vector<double> costs;      // exact or ensemble cost after each iteration
  double final_cost = 0.0;
  bool converged = false;
};

/// Gradient descent on the exact coefficient representation (beta = 0).
/// Stops once the successive distance guarantees a fixed-point residual
/// ||U - Y(U)|| below twice the configured tolerance.
std::pair<CoefficientControl, GdReport> gd_run(const ProblemSpec& spec,
                                               const GdConfig& config,
                                               const CoefficientControl& U0);
std::pair<CoefficientControl, GdReport> gd_run(const ProblemSpec& spec,
                                               const GdConfig& config);

/// Backward accumulation of the adjoint sum: Theta_{N-1} = alpha A0 X_N,
/// Theta_n = tau A0 X_{n+1} + (1 + beta D_{n+2}W) A0 Theta_{n+1}; returns
/// Theta_0..Theta_{N-1}. X holds spectral states X_0..X_N.
std::vector<Eigen::VectorXd> theta_backward(const std::vector<Eigen::VectorXd>& X,
                                            const BrownianPath& path, const FemSpace& space,
                                            double alpha, double beta);

/// Same quantity by the unrolled double sum
///   Theta_n = tau sum_{j>n} A0^{j-n} prod_{k=n+2}^{j} (1 + beta D_k W) X_j
///           + alpha A0^{N-n} prod_{k=n+2}^{N} (1 + beta D_k W) X_N.
std::vector<Eigen::VectorXd> theta_direct(const std::vector<Eigen::VectorXd>& X,
                                          const BrownianPath& path, const FemSpace& space,
                                          double alpha, double beta);

/// Pathwise exact conditional expectation for additive noise: Y_n on the
/// path equals -Theta_n recomputed with all increments after t_n zeroed
/// (the accumulation is multilinear in the increments when beta = 0).
std::vector<Eigen::VectorXd> exact_y_on_path_beta0(const CoefficientControl& U,
                                                   const ProblemSpec& spec,
                                                   const BrownianPath& path);

struct McRunResult {
  std::vector<BrownianPath> paths;
  std::vector<std::vector<Eigen::VectorXd>> controls;  // [path][n], spectral
  GdReport report;
};

/// Monte-Carlo gradient descent for general beta: per iteration simulates
/// all paths forward, accumulates Theta backward, replaces the conditional
/// expectation by a partitioning regression on the state per time level and
/// component, and updates the controls pathwise. The path set is drawn once
/// and reused across iterations.
McRunResult gd_run_mc(const ProblemSpec& spec, const GdConfig& config,
                      const RegressionConfig& regression, int n_paths,
                      std::uint64_t master_seed);

}  // namespace slq
