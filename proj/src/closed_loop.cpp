#include "slq/closed_loop.hpp"

#include <cmath>
#include <stdexcept>

namespace slq {

namespace {

void check_shared_setup(const ProblemSpec& spec, const BrownianPath& path) {
  if (spec.space == nullptr) throw std::invalid_argument("simulate: spec has no space");
  if (path.grid.N != spec.grid.N || path.grid.T != spec.grid.T)
    throw std::invalid_argument("simulate: path grid does not match problem grid");
}

// x_{n+1} = a0 o (x + tau u + (beta x + sighat) dW), everything spectral.
Eigen::VectorXd step_state(const Eigen::VectorXd& a0, double tau, double beta,
                           const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& sighat, double dW) {
  return (a0.array() * (x + tau * u + dW * (beta * x + sighat)).array()).matrix();
}

}  // namespace

TrajectoryPair simulate_feedback(const RiccatiSolution& P, const EtaSequence& eta,
                                 const ProblemSpec& spec, const BrownianPath& path) {
  check_shared_setup(spec, path);
  if (P.space != spec.space)
    throw std::invalid_argument("simulate_feedback: Riccati solution is for another space");
  if (P.grid.N != spec.grid.N)
    throw std::invalid_argument("simulate_feedback: Riccati solution is for another grid");
  if (static_cast<int>(eta.eta.size()) != spec.grid.N + 1)
    throw std::invalid_argument("simulate_feedback: eta sequence length mismatch");

  const int N = spec.grid.N;
  const double tau = spec.grid.tau;
  const Eigen::VectorXd a0 = step_operator_diag(*spec.space, tau);

  TrajectoryPair out;
  out.path = path;
  out.X.reserve(N + 1);
  out.U.reserve(N);
  out.X.push_back(project_x0(spec));
  for (int n = 0; n < N; ++n) {
    const Eigen::VectorXd& x = out.X.back().coeffs;
    Eigen::VectorXd u = -(P.P_diag[n + 1].array() * x.array()).matrix() - eta.eta[n];
    Eigen::VectorXd sighat = project_sigma(spec, spec.grid.tau * n).coeffs;
    Eigen::VectorXd xn = step_state(a0, tau, spec.beta, x, u, sighat, path.increments(n));
    out.U.push_back(FemFunction{spec.space, std::move(u)});
    out.X.push_back(FemFunction{spec.space, std::move(xn)});
  }
  return out;
}

std::vector<FemFunction> simulate_forward_given_control(const std::vector<FemFunction>& U,
                                                        const ProblemSpec& spec,
                                                        const BrownianPath& path) {
  check_shared_setup(spec, path);
  if (static_cast<int>(U.size()) != spec.grid.N)
    throw std::invalid_argument("simulate_forward_given_control: need one control per step");

  const int N = spec.grid.N;
  const double tau = spec.grid.tau;
  const Eigen::VectorXd a0 = step_operator_diag(*spec.space, tau);

  std::vector<FemFunction> X;
  X.reserve(N + 1);
  X.push_back(project_x0(spec));
  for (int n = 0; n < N; ++n) {
    Eigen::VectorXd sighat = project_sigma(spec, spec.grid.tau * n).coeffs;
    X.push_back(FemFunction{spec.space, step_state(a0, tau, spec.beta, X.back().coeffs,
                                                   U[n].coeffs, sighat, path.increments(n))});
  }
  return X;
}

double cost_of_trajectory(const TrajectoryPair& traj, double alpha, CostConvention convention) {
  const int N = traj.path.grid.N;
  const double tau = traj.path.grid.tau;
  const int first = convention == CostConvention::FromZero ? 0 : 1;
  double acc = 0.0;
  for (int n = first; n < first + N; ++n) acc += traj.X[n].coeffs.squaredNorm();
  for (int n = 0; n < N; ++n) acc += traj.U[n].coeffs.squaredNorm();
  return 0.5 * tau * acc + 0.5 * alpha * traj.X[N].coeffs.squaredNorm();
}

CostEstimate evaluate_discrete_cost(const std::vector<TrajectoryPair>& trajectories,
                                    double alpha, CostConvention convention) {
  if (trajectories.empty())
    throw std::invalid_argument("evaluate_discrete_cost: empty trajectory collection");

  const int M = static_cast<int>(trajectories.size());
  std::vector<double> costs(trajectories.size());
  for (std::size_t i = 0; i < trajectories.size(); ++i)
    costs[i] = cost_of_trajectory(trajectories[i], alpha, convention);

  // Kahan-compensated mean, then a second compensated pass for the variance.
  double sum = 0.0, comp = 0.0;
  for (double c : costs) {
    double y = c - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  const double mean = sum / M;

  double se = 0.0;
  if (M > 1) {
    double ss = 0.0;
    comp = 0.0;
    for (double c : costs) {
      double d = (c - mean) * (c - mean);
      double y = d - comp;
      double t = ss + y;
      comp = (t - ss) - y;
      ss = t;
    }
    se = std::sqrt(ss / (M - 1) / M);
  }
  return CostEstimate{mean, se, M};
}

}  // namespace slq
