#pragma once

#include <functional>
#include <vector>

#include "slq/fem.hpp"
#include "slq/stochastics.hpp"

namespace slq {

/// All problem data of the control problem: noise coupling beta, terminal
/// weight alpha, horizon (carried by grid), initial state x0 and noise
/// intensity sigma(t, x) as pointwise functions.
struct ProblemSpec {
  double beta = 0.0;
  double alpha = 0.0;
  const FemSpace* space = nullptr;
  TimeGrid grid;
  std::function<double(double)> x0;
  std::function<double(double, double)> sigma;
};

FemFunction project_x0(const ProblemSpec& spec);
FemFunction project_sigma(const ProblemSpec& spec, double t);

/// Operator diagonal in spectral coordinates.
struct DiagonalOp {
  Eigen::VectorXd entries;
};

enum class RiccatiScheme { V1, V2 };

/// Backward sequence P_0..P_N of the difference Riccati recursion, kept both
/// as spectral diagonals (exact fast path) and as dense matrices in spectral
/// coordinates (the general algorithm). P_N = alpha I.
struct RiccatiSolution {
  RiccatiScheme scheme = RiccatiScheme::V2;
  const FemSpace* space = nullptr;
  TimeGrid grid;
  double beta = 0.0;
  double alpha = 0.0;
  std::vector<Eigen::VectorXd> P_diag;   // N+1 diagonals
  std::vector<Eigen::MatrixXd> P_dense;  // N+1 matrices, empty if !has_dense
  bool has_dense = true;
  Eigen::VectorXd a0;         // scheme step operator diagonal
  double state_factor = 1.0;  // multiplies A0 in the scheme's deterministic dynamics
};

/// P_n = A0 P_{n+1} A0 + tau I - tau H_n K_n^{-1} H_n with
/// H_n = A0 P_{n+1} A0, K_n = I + tau A0 P_{n+1} A0 and
/// A0 = (I - tau (Delta_h + beta^2/2))^{-1}. Requires
/// 1 + tau (lambda_i - beta^2/2) > 0 for every mode.
RiccatiSolution solve_riccati_v1(const FemSpace& space, const TimeGrid& grid, double beta,
                                 double alpha, bool with_dense = true);

/// P_n = (1+beta^2 tau/2)^2 A0 P_{n+1} A0 + tau I - tau H_n K_n^{-1} H_n with
/// H_n = (1+beta^2 tau/2) A0 P_{n+1} A0, K_n = I + tau A0 P_{n+1} A0 and
/// A0 = (I - tau Delta_h)^{-1}. No restriction on beta.
RiccatiSolution solve_riccati_v2(const FemSpace& space, const TimeGrid& grid, double beta,
                                 double alpha, bool with_dense = true);

/// Per-mode scalar Riccati equation p' = p^2 + (2 lambda_i - beta^2) p - 1,
/// p(T) = alpha, solved by the constant-coefficient closed form; diagonals
/// returned at the requested times.
std::vector<DiagonalOp> solve_riccati_ode_reference(const FemSpace& space, double beta,
                                                    double alpha, double T,
                                                    const std::vector<double>& eval_times);

/// eta_n = A0 eta_{n+1} + tau A0 [ -P_{n+1} eta_{n+1} + beta P_{n+1} Pi_h sigma(t_{n+1}) ],
/// eta_N = 0, with A0 = (I - tau Delta_h)^{-1}.
struct EtaSequence {
  std::vector<Eigen::VectorXd> eta;  // N+1 spectral vectors
};

EtaSequence solve_eta(const RiccatiSolution& P, const ProblemSpec& spec);

/// Minimum of the deterministic discrete quadratic cost started from z at
/// time index l, computed by stacking all controls into one normal-equation
/// solve. Returns twice the minimal cost, which equals (P_l z, z).
double brute_force_lq_value(const FemSpace& space, const TimeGrid& grid, double beta,
                            double alpha, int start_index, const FemFunction& z,
                            RiccatiScheme scheme);

/// Diagonal of (I - tau Delta_h)^{-1}.
Eigen::VectorXd step_operator_diag(const FemSpace& space, double tau);

}  // namespace slq
