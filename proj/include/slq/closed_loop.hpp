#pragma once

#include <vector>

#include "slq/riccati.hpp"

namespace slq {

/// One simulated path of the controlled state: states X_0..X_N, controls
/// U_0..U_{N-1} and the driving Brownian path.
struct TrajectoryPair {
  std::vector<FemFunction> X;
  std::vector<FemFunction> U;
  BrownianPath path;
};

struct CostEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int n_paths = 0;
};

/// Index range of the state sum in the discrete cost. FromZero sums
/// ||X_n||^2 over n = 0..N-1, FromOne over n = 1..N. The control sum and the
/// terminal term are the same in both.
enum class CostConvention { FromZero, FromOne };

/// Feedback simulation U_n = -P_{n+1} X_n - eta_n with the semi-implicit
/// state step X_{n+1} = A0 (X_n + tau U_n + [beta X_n + Pi_h sigma(t_n)] dW).
TrajectoryPair simulate_feedback(const RiccatiSolution& P, const EtaSequence& eta,
                                 const ProblemSpec& spec, const BrownianPath& path);

/// Same state step with a prescribed control sequence U_0..U_{N-1}; returns
/// the states X_0..X_N.
std::vector<FemFunction> simulate_forward_given_control(const std::vector<FemFunction>& U,
                                                        const ProblemSpec& spec,
                                                        const BrownianPath& path);

/// Pathwise discrete cost
///   (tau/2) sum_n (||X_n||^2 + ||U_n||^2) + (alpha/2) ||X_N||^2.
double cost_of_trajectory(const TrajectoryPair& traj, double alpha,
                          CostConvention convention = CostConvention::FromZero);

/// Sample mean and standard error of the pathwise cost over an ensemble.
CostEstimate evaluate_discrete_cost(const std::vector<TrajectoryPair>& trajectories,
                                    double alpha,
                                    CostConvention convention = CostConvention::FromZero);

}  // namespace slq
