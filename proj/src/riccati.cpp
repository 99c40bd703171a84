#include "slq/riccati.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace slq {

FemFunction project_x0(const ProblemSpec& spec) {
  if (!spec.x0) throw std::invalid_argument("project_x0: spec.x0 is empty");
  return project_l2(spec.x0, *spec.space);
}

FemFunction project_sigma(const ProblemSpec& spec, double t) {
  if (!spec.sigma) throw std::invalid_argument("project_sigma: spec.sigma is empty");
  return project_l2([&](double x) { return spec.sigma(t, x); }, *spec.space);
}

Eigen::VectorXd step_operator_diag(const FemSpace& space, double tau) {
  return (1.0 + tau * space.eigenvalues.array()).inverse().matrix();
}

namespace {

RiccatiSolution solve_riccati_impl(RiccatiScheme scheme, const FemSpace& space,
                                   const TimeGrid& grid, double beta, double alpha,
                                   bool with_dense) {
  if (alpha < 0.0) throw std::invalid_argument("solve_riccati: need alpha >= 0");
  const int d = space.dim;
  const int N = grid.N;
  const double tau = grid.tau;

  RiccatiSolution sol;
  sol.scheme = scheme;
  sol.space = &space;
  sol.grid = grid;
  sol.beta = beta;
  sol.alpha = alpha;
  sol.has_dense = with_dense;

  double c = 1.0;
  if (scheme == RiccatiScheme::V1) {
    sol.a0.resize(d);
    for (int i = 0; i < d; ++i) {
      const double denom = 1.0 + tau * (space.eigenvalues(i) - 0.5 * beta * beta);
      if (!(denom > 0.0)) {
        std::ostringstream msg;
        msg << "solve_riccati_v1: 1 + tau (lambda_" << (i + 1)
            << " - beta^2/2) = " << denom
            << " is not positive; decrease tau or use the V2 scheme";
        throw std::invalid_argument(msg.str());
      }
      sol.a0(i) = 1.0 / denom;
    }
    sol.state_factor = 1.0;
  } else {
    sol.a0 = step_operator_diag(space, tau);
    c = 1.0 + 0.5 * beta * beta * tau;
    sol.state_factor = c;
  }
  const double c2 = c * c;

  sol.P_diag.assign(N + 1, Eigen::VectorXd());
  sol.P_diag[N] = Eigen::VectorXd::Constant(d, alpha);
  for (int n = N - 1; n >= 0; --n) {
    Eigen::VectorXd p(d);
    for (int i = 0; i < d; ++i) {
      const double q = sol.a0(i) * sol.a0(i) * sol.P_diag[n + 1](i);
      p(i) = tau + c2 * q / (1.0 + tau * q);
    }
    sol.P_diag[n] = std::move(p);
  }

  if (with_dense) {
    sol.P_dense.assign(N + 1, Eigen::MatrixXd());
    sol.P_dense[N] = alpha * Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    for (int n = N - 1; n >= 0; --n) {
      // S = A0 P_{n+1} A0 with diagonal A0
      Eigen::MatrixXd S = sol.a0.asDiagonal() * sol.P_dense[n + 1] * sol.a0.asDiagonal();
      Eigen::MatrixXd K = I + tau * S;
      Eigen::MatrixXd KinvS = K.ldlt().solve(S);
      Eigen::MatrixXd P = c2 * (S - tau * S * KinvS) + tau * I;
      sol.P_dense[n] = 0.5 * (P + P.transpose());
    }
  }
  return sol;
}

}  // namespace

RiccatiSolution solve_riccati_v1(const FemSpace& space, const TimeGrid& grid, double beta,
                                 double alpha, bool with_dense) {
  return solve_riccati_impl(RiccatiScheme::V1, space, grid, beta, alpha, with_dense);
}

RiccatiSolution solve_riccati_v2(const FemSpace& space, const TimeGrid& grid, double beta,
                                 double alpha, bool with_dense) {
  return solve_riccati_impl(RiccatiScheme::V2, space, grid, beta, alpha, with_dense);
}

std::vector<DiagonalOp> solve_riccati_ode_reference(const FemSpace& space, double beta,
                                                    double alpha, double T,
                                                    const std::vector<double>& eval_times) {
  if (alpha < 0.0)
    throw std::invalid_argument("solve_riccati_ode_reference: need alpha >= 0");
  const int d = space.dim;
  std::vector<DiagonalOp> out(eval_times.size());
  for (std::size_t k = 0; k < eval_times.size(); ++k) {
    const double t = eval_times[k];
    if (t < 0.0 || t > T)
      throw std::invalid_argument("solve_riccati_ode_reference: eval time outside [0,T]");
    Eigen::VectorXd p(d);
    for (int i = 0; i < d; ++i) {
      // p' = p^2 + 2 a p - 1 with a = lambda - beta^2/2 has roots
      // r12 = -a -+ sqrt(a^2+1); the flow from p(T) = alpha is a Moebius map.
      const double a = space.eigenvalues(i) - 0.5 * beta * beta;
      const double s = std::sqrt(a * a + 1.0);
      const double r1 = -a + s;
      const double r2 = -a - s;
      const double theta = (alpha - r1) / (alpha - r2) * std::exp(-2.0 * s * (T - t));
      p(i) = (r1 - r2 * theta) / (1.0 - theta);
    }
    out[k].entries = std::move(p);
  }
  return out;
}

EtaSequence solve_eta(const RiccatiSolution& P, const ProblemSpec& spec) {
  if (P.space != spec.space)
    throw std::invalid_argument("solve_eta: Riccati solution and spec use different spaces");
  if (P.grid.N != spec.grid.N || P.grid.T != spec.grid.T)
    throw std::invalid_argument("solve_eta: Riccati solution and spec use different grids");
  const int N = spec.grid.N;
  const double tau = spec.grid.tau;
  const Eigen::VectorXd a0 = step_operator_diag(*spec.space, tau);

  EtaSequence seq;
  seq.eta.assign(N + 1, Eigen::VectorXd::Zero(spec.space->dim));
  for (int n = N - 1; n >= 0; --n) {
    const Eigen::VectorXd sig = project_sigma(spec, (n + 1) * tau).coeffs;
    const Eigen::VectorXd& next = seq.eta[n + 1];
    const Eigen::VectorXd& p = P.P_diag[n + 1];
    seq.eta[n] =
        (a0.array() *
         (next.array() + tau * (-p.array() * next.array() +
                                spec.beta * p.array() * sig.array())))
            .matrix();
  }
  return seq;
}

double brute_force_lq_value(const FemSpace& space, const TimeGrid& grid, double beta,
                            double alpha, int start_index, const FemFunction& z,
                            RiccatiScheme scheme) {
  const int d = space.dim;
  const int N = grid.N;
  const int l = start_index;
  const double tau = grid.tau;
  if (l < 0 || l > N) throw std::invalid_argument("brute_force_lq_value: bad start index");
  const int K = N - l;  // number of stacked controls
  if (K * d > 64)
    throw std::invalid_argument("brute_force_lq_value: instance too large for dense solve");

  // one-step deterministic dynamics x_{k+1} = D x_k + tau B u_k
  Eigen::VectorXd Ddiag(d), Bdiag(d);
  if (scheme == RiccatiScheme::V1) {
    for (int i = 0; i < d; ++i) {
      const double denom = 1.0 + tau * (space.eigenvalues(i) - 0.5 * beta * beta);
      if (!(denom > 0.0))
        throw std::invalid_argument(
            "brute_force_lq_value: V1 step operator undefined; decrease tau or use V2");
      Ddiag(i) = 1.0 / denom;
    }
    Bdiag = Ddiag;
  } else {
    Bdiag = step_operator_diag(space, tau);
    Ddiag = (1.0 + 0.5 * beta * beta * tau) * Bdiag;
  }

  if (K == 0) return alpha * z.coeffs.squaredNorm();

  // x_n = d_n + L_n u for n = l..N, with u the stacked controls u_l..u_{N-1}
  std::vector<Eigen::VectorXd> dvec(K + 1);
  std::vector<Eigen::MatrixXd> L(K + 1);
  dvec[0] = z.coeffs;
  L[0] = Eigen::MatrixXd::Zero(d, K * d);
  for (int k = 0; k < K; ++k) {
    dvec[k + 1] = Ddiag.asDiagonal() * dvec[k];
    L[k + 1] = Ddiag.asDiagonal() * L[k];
    L[k + 1].block(0, k * d, d, d) += tau * Eigen::MatrixXd(Bdiag.asDiagonal());
  }

  // cost = tau/2 sum_{k=0}^{K-1} (|x_{l+k}|^2 + |u_{l+k}|^2) + alpha/2 |x_N|^2
  Eigen::MatrixXd Q = tau * Eigen::MatrixXd::Identity(K * d, K * d);
  Eigen::VectorXd bvec = Eigen::VectorXd::Zero(K * d);
  double c0 = 0.0;
  for (int k = 0; k <= K; ++k) {
    double w = 0.0;
    if (k < K) w += tau;
    if (k == K) w += alpha;
    if (w == 0.0) continue;
    Q += w * L[k].transpose() * L[k];
    bvec += w * L[k].transpose() * dvec[k];
    c0 += w * dvec[k].squaredNorm();
  }
  // minimize (1/2) u^T Q u + b^T u + c0/2
  Eigen::VectorXd u = Q.ldlt().solve(-bvec);
  const double min_cost = 0.5 * u.dot(Q * u) + bvec.dot(u) + 0.5 * c0;
  return 2.0 * min_cost;
}

}  // namespace slq
