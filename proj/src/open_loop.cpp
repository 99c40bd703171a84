#include "slq/open_loop.hpp"

#include <cmath>
#include <stdexcept>

#include "slq/closed_loop.hpp"

namespace slq {

namespace {

void check_control_shape(const CoefficientControl& U) {
  const int N = U.grid.N;
  if (U.space == nullptr) throw std::invalid_argument("control has no space");
  if (static_cast<int>(U.g.size()) != N ||
      static_cast<int>(U.f.size()) != N ||
      static_cast<int>(U.ftilde.size()) != N)
    throw std::invalid_argument("control arrays do not match the grid");
  for (int n = 0; n < N; ++n)
    if (static_cast<int>(U.f[n].size()) != n ||
        static_cast<int>(U.ftilde[n].size()) != n)
      throw std::invalid_argument("control rows are not triangular");
}

// Elementwise powers a0^p, p = 0..max_pow.
std::vector<Eigen::ArrayXd> power_table(const Eigen::ArrayXd& a0, int max_pow) {
  std::vector<Eigen::ArrayXd> pow(max_pow + 1);
  pow[0] = Eigen::ArrayXd::Ones(a0.size());
  for (int p = 1; p <= max_pow; ++p) pow[p] = pow[p - 1] * a0;
  return pow;
}

// E || d + sum_m prod_{i<=m}(1+D_iW) a_m + sum_m D_mW b_m ||^2 via
// E[prod_m prod_m'] = (1+tau)^{min(m,m')}, E[prod_m D_m'W] = tau (m' <= m),
// E[D_mW D_m'W] = tau delta. Lists hold m = 1.. at index m-1.
double second_moment(const Eigen::VectorXd& d, const std::vector<Eigen::VectorXd>& a,
                     const std::vector<Eigen::VectorXd>& b, double tau,
                     const std::vector<double>& one_plus_tau_pow) {
  double val = d.squaredNorm();
  for (const auto& am : a) val += 2.0 * d.dot(am);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      val += a[i].dot(a[j]) * one_plus_tau_pow[std::min(i, j) + 1];
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j <= i && j < b.size(); ++j)
      val += 2.0 * tau * a[i].dot(b[j]);  // pairs with m' <= m survive
  for (const auto& bm : b) val += tau * bm.squaredNorm();
  return val;
}

std::vector<double> one_plus_tau_powers(double tau, int max_pow) {
  std::vector<double> pw(max_pow + 1, 1.0);
  for (int p = 1; p <= max_pow; ++p) pw[p] = pw[p - 1] * (1.0 + tau);
  return pw;
}

}  // namespace

CoefficientControl zero_control(const FemSpace& space, const TimeGrid& grid) {
  CoefficientControl U;
  U.space = &space;
  U.grid = grid;
  U.f.resize(grid.N);
  U.ftilde.resize(grid.N);
  for (int n = 0; n < grid.N; ++n) {
    U.f[n].assign(n, Eigen::VectorXd::Zero(space.dim));
    U.ftilde[n].assign(n, Eigen::VectorXd::Zero(space.dim));
  }
  U.g.assign(grid.N, Eigen::VectorXd::Zero(space.dim));
  return U;
}

CoefficientControl add_scaled(const CoefficientControl& a, double c,
                              const CoefficientControl& b) {
  check_control_shape(a);
  check_control_shape(b);
  if (a.grid.N != b.grid.N || a.space != b.space)
    throw std::invalid_argument("add_scaled: controls live on different discretizations");
  CoefficientControl out = a;
  for (int n = 0; n < a.grid.N; ++n) {
    for (int i = 0; i < n; ++i) {
      out.f[n][i] += c * b.f[n][i];
      out.ftilde[n][i] += c * b.ftilde[n][i];
    }
    out.g[n] += c * b.g[n];
  }
  return out;
}

double kappa_bound(const ProblemSpec& spec) {
  const double T = spec.grid.T;
  const double growth = std::exp(spec.beta * spec.beta * T);
  return 1.0 + spec.alpha * T * growth + T * T * growth;
}

GdStepResult gd_step_exact(const CoefficientControl& U, const ProblemSpec& spec,
                           double kappa) {
  check_control_shape(U);
  if (spec.beta != 0.0)
    throw std::invalid_argument(
        "gd_step_exact: multiplicative noise (beta != 0) has no closed coefficient "
        "update, use gd_run_mc");
  if (U.space != spec.space || U.grid.N != spec.grid.N)
    throw std::invalid_argument("gd_step_exact: control does not match the problem");
  if (kappa <= 1.0) throw std::invalid_argument("gd_step_exact: kappa must exceed 1");

  const int N = spec.grid.N;
  const int dim = spec.space->dim;
  const double tau = spec.grid.tau;
  const double alpha = spec.alpha;
  const Eigen::ArrayXd a0 = step_operator_diag(*spec.space, tau).array();
  const std::vector<Eigen::ArrayXd> pw = power_table(a0, N + 2);

  const Eigen::ArrayXd xhat = project_x0(spec).coeffs.array();
  std::vector<Eigen::ArrayXd> sighat(N);
  for (int k = 0; k < N; ++k) sighat[k] = project_sigma(spec, tau * k).coeffs.array();

  CoefficientControl Y = zero_control(*spec.space, spec.grid);

  // Row prefix sums of f for the collapsed diagonal terms:
  // prefix[l][m] = sum_{m'=1}^{m} f_{l,m'}.
  std::vector<std::vector<Eigen::ArrayXd>> prefix(N);
  for (int l = 1; l < N; ++l) {
    prefix[l].resize(l + 1);
    prefix[l][0] = Eigen::ArrayXd::Zero(dim);
    for (int m = 1; m <= l; ++m)
      prefix[l][m] = prefix[l][m - 1] + U.f[l][m - 1].array();
  }

  // Off-diagonal F and all of Ftilde, one fixed m per pass. The two double
  // sums collapse into first-order recursions in n once the inner partial
  // sums E1(n) = sum_{l=m}^{n} a0^{n+2-l} row_l are available.
  std::vector<Eigen::ArrayXd> E1f(N), E1ft(N);
  for (int m = 1; m <= N - 1; ++m) {
    const Eigen::ArrayXd& sig = sighat[m - 1];

    E1f[m] = pw[2] * U.f[m][m - 1].array();
    E1ft[m] = pw[2] * U.ftilde[m][m - 1].array();
    for (int n = m + 1; n <= N - 1; ++n) {
      E1f[n] = a0 * E1f[n - 1] + pw[2] * U.f[n][m - 1].array();
      E1ft[n] = a0 * E1ft[n - 1] + pw[2] * U.ftilde[n][m - 1].array();
    }

    Eigen::ArrayXd D2f = Eigen::ArrayXd::Zero(dim);
    Eigen::ArrayXd D2ft = Eigen::ArrayXd::Zero(dim);
    for (int l = m; l <= N - 1; ++l) {
      D2f += pw[N + 1 - l] * U.f[l][m - 1].array();
      D2ft += pw[N + 1 - l] * U.ftilde[l][m - 1].array();
    }

    Eigen::ArrayXd D1f = Eigen::ArrayXd::Zero(dim);
    Eigen::ArrayXd D1ft = Eigen::ArrayXd::Zero(dim);
    Eigen::ArrayXd sD1 = Eigen::ArrayXd::Zero(dim);
    Eigen::ArrayXd sD2 = pw[N - m + 2] * sig;
    for (int n = N - 1; n >= m; --n) {
      if (n < N - 1) {
        D1f = a0 * D1f + E1f[n];
        D1ft = a0 * D1ft + E1ft[n];
        sD1 = a0 * sD1 + pw[n + 3 - m] * sig;
        D2f *= a0;
        D2ft *= a0;
        sD2 *= a0;
      }
      if (m <= n - 1)
        Y.f[n][m - 1] = (-tau * tau * D1f - alpha * tau * D2f).matrix();
      Y.ftilde[n][m - 1] =
          (-tau * tau * D1ft - alpha * tau * D2ft - tau * sD1 - alpha * sD2).matrix();
    }
  }

  // G: x0-driven part plus the g-driven double sums, same recursion scheme.
  {
    std::vector<Eigen::ArrayXd> gE1(N);
    gE1[0] = pw[2] * U.g[0].array();
    for (int n = 1; n <= N - 1; ++n) gE1[n] = a0 * gE1[n - 1] + pw[2] * U.g[n].array();

    Eigen::ArrayXd gD2 = Eigen::ArrayXd::Zero(dim);
    for (int l = 0; l <= N - 1; ++l) gD2 += pw[N + 1 - l] * U.g[l].array();

    Eigen::ArrayXd gD1 = Eigen::ArrayXd::Zero(dim);
    Eigen::ArrayXd xD1 = Eigen::ArrayXd::Zero(dim);
    Eigen::ArrayXd xD2 = pw[N + 1] * xhat;
    for (int n = N - 1; n >= 0; --n) {
      if (n < N - 1) {
        gD1 = a0 * gD1 + gE1[n];
        xD1 = a0 * xD1 + pw[n + 2] * xhat;
        gD2 *= a0;
        xD2 *= a0;
      }
      Y.g[n] = (-tau * xD1 - alpha * xD2 - tau * tau * gD1 - alpha * tau * gD2).matrix();
    }
  }

  // Collapsed product terms. Conditioning at t_n turns every product with
  // index above n into the n-th one, so row l contributes f_{l,n} plus its
  // tail sum, which lands on the diagonal F[n][n]. At n = 0 every product
  // has mean one, so the whole row collapses to a constant and the sum has
  // no product coefficient to land on: it joins G[0] instead.
  for (int n = 0; n <= N - 1; ++n) {
    const auto phi_row = [&](int l) -> Eigen::ArrayXd {
      if (n == 0) return l == 0 ? Eigen::ArrayXd::Zero(dim).eval() : prefix[l][l].eval();
      Eigen::ArrayXd p = U.f[l][n - 1].array();
      if (l > n) p += prefix[l][l] - prefix[l][n];
      return p;
    };
    Eigen::ArrayXd S1 = Eigen::ArrayXd::Zero(dim);
    Eigen::ArrayXd R = Eigen::ArrayXd::Zero(dim);
    Eigen::ArrayXd ap = Eigen::ArrayXd::Ones(dim);
    for (int j = n + 1; j <= N - 1; ++j) {
      R = a0 * (R + phi_row(j - 1));  // row j-1 enters for this j
      ap *= a0;
      S1 += ap * R;
    }
    // R now covers l = n..N-2; add the last row and close the terminal sum.
    R = a0 * (R + phi_row(N - 1));
    const Eigen::ArrayXd S2 = pw[N - n] * R;
    if (n == 0)
      Y.g[0] += (-tau * tau * S1 - alpha * tau * S2).matrix();
    else
      Y.f[n][n - 1] = (-tau * tau * S1 - alpha * tau * S2).matrix();
  }

  GdStepResult out;
  out.U_next = Y;
  const double keep = 1.0 - 1.0 / kappa;
  const double pull = 1.0 / kappa;
  for (int n = 0; n < N; ++n) {
    for (int i = 0; i < n; ++i) {
      out.U_next.f[n][i] = keep * U.f[n][i] + pull * Y.f[n][i];
      out.U_next.ftilde[n][i] = keep * U.ftilde[n][i] + pull * Y.ftilde[n][i];
    }
    out.U_next.g[n] = keep * U.g[n] + pull * Y.g[n];
  }
  out.Y = std::move(Y);
  return out;
}

double control_norm_exact(const CoefficientControl& U) {
  check_control_shape(U);
  const int N = U.grid.N;
  const double tau = U.grid.tau;
  const std::vector<double> pw = one_plus_tau_powers(tau, N);
  double total = 0.0;
  for (int n = 0; n < N; ++n)
    total += second_moment(U.g[n], U.f[n], U.ftilde[n], tau, pw);
  return tau * total;
}

double evaluate_cost_exact(const CoefficientControl& U, const ProblemSpec& spec) {
  check_control_shape(U);
  if (spec.beta != 0.0)
    throw std::invalid_argument("evaluate_cost_exact: requires additive noise (beta = 0)");
  if (U.space != spec.space || U.grid.N != spec.grid.N)
    throw std::invalid_argument("evaluate_cost_exact: control does not match the problem");

  const int N = spec.grid.N;
  const double tau = spec.grid.tau;
  const Eigen::ArrayXd a0 = step_operator_diag(*spec.space, tau).array();
  const std::vector<double> pw = one_plus_tau_powers(tau, N + 1);

  // Stream the state's own coefficient representation forward:
  // X_{n+1} = A0 (X_n + tau U_n) + A0 sighat_n D_{n+1}W.
  Eigen::VectorXd d = project_x0(spec).coeffs;
  std::vector<Eigen::VectorXd> a, b;
  a.reserve(N);
  b.reserve(N);

  double running = 0.0;
  for (int n = 0; n < N; ++n) {
    running += second_moment(d, a, b, tau, pw);            // E ||X_n||^2
    running += second_moment(U.g[n], U.f[n], U.ftilde[n], tau, pw);  // E ||U_n||^2

    d = (a0 * (d + tau * U.g[n]).array()).matrix();
    for (int i = 0; i < n - 1; ++i)
      a[i] = (a0 * (a[i] + tau * U.f[n][i]).array()).matrix();
    if (n >= 1) a.push_back((a0 * (tau * U.f[n][n - 1]).array()).matrix());
    for (int i = 0; i < n; ++i)
      b[i] = (a0 * (b[i] + tau * U.ftilde[n][i]).array()).matrix();
    b.push_back((a0 * project_sigma(spec, tau * n).coeffs.array()).matrix());
  }
  const double terminal = second_moment(d, a, b, tau, pw);  // E ||X_N||^2
  return 0.5 * tau * running + 0.5 * spec.alpha * terminal;
}

std::vector<FemFunction> evaluate_control_on_path(const CoefficientControl& U,
                                                  const BrownianPath& path) {
  check_control_shape(U);
  if (path.grid.N != U.grid.N || path.grid.T != U.grid.T)
    throw std::invalid_argument("evaluate_control_on_path: path grid mismatch");
  const int N = U.grid.N;

  std::vector<double> prod(N + 1, 1.0);  // prod[m] = prod_{i<=m} (1 + D_iW)
  for (int m = 1; m <= N; ++m) prod[m] = prod[m - 1] * (1.0 + path.increments(m - 1));

  std::vector<FemFunction> out;
  out.reserve(N);
  for (int n = 0; n < N; ++n) {
    Eigen::VectorXd u = U.g[n];
    for (int m = 1; m <= n; ++m) {
      u += prod[m] * U.f[n][m - 1];
      u += path.increments(m - 1) * U.ftilde[n][m - 1];
    }
    out.push_back(FemFunction{U.space, std::move(u)});
  }
  return out;
}

std::pair<CoefficientControl, GdReport> gd_run(const ProblemSpec& spec,
                                               const GdConfig& config,
                                               const CoefficientControl& U0) {
  if (spec.beta != 0.0)
    throw std::invalid_argument("gd_run: requires additive noise (beta = 0), use gd_run_mc");
  if (config.kappa < kappa_bound(spec) - 1e-12)
    throw std::invalid_argument("gd_run: kappa below the admissible bound");
  if (config.tol <= 0.0 || config.max_iters < 1)
    throw std::invalid_argument("gd_run: invalid tolerance or iteration budget");

  // Stopping on the successive distance at this threshold guarantees the
  // fixed-point residual ||U - Y(U)|| = kappa * (next distance) stays below
  // 2 tol: the next distance contracts by sqrt(1 - 1/kappa).
  const double threshold = config.tol * std::min(1.0, 1.8 / config.kappa);

  CoefficientControl U = U0;
  GdReport report;
  for (int iter = 0; iter < config.max_iters; ++iter) {
    GdStepResult step = gd_step_exact(U, spec, config.kappa);
    const double dist =
        std::sqrt(control_norm_exact(add_scaled(step.U_next, -1.0, U)));
    U = std::move(step.U_next);
    report.distances.push_back(dist);
    report.costs.push_back(evaluate_cost_exact(U, spec));
    if (dist <= threshold) {
      report.converged = true;
      break;
    }
  }
  report.iterations_run = static_cast<int>(report.distances.size());
  report.final_cost = report.costs.back();
  return {std::move(U), std::move(report)};
}

std::pair<CoefficientControl, GdReport> gd_run(const ProblemSpec& spec,
                                               const GdConfig& config) {
  return gd_run(spec, config, zero_control(*spec.space, spec.grid));
}

std::vector<Eigen::VectorXd> theta_backward(const std::vector<Eigen::VectorXd>& X,
                                            const BrownianPath& path, const FemSpace& space,
                                            double alpha, double beta) {
  const int N = path.grid.N;
  if (static_cast<int>(X.size()) != N + 1)
    throw std::invalid_argument("theta_backward: need N+1 states");
  const double tau = path.grid.tau;
  const Eigen::ArrayXd a0 = step_operator_diag(space, tau).array();

  std::vector<Eigen::VectorXd> theta(N);
  theta[N - 1] = (alpha * a0 * X[N].array()).matrix();
  for (int n = N - 2; n >= 0; --n)
    theta[n] = (tau * a0 * X[n + 1].array() +
                (1.0 + beta * path.increments(n + 1)) * a0 * theta[n + 1].array())
                   .matrix();
  return theta;
}

std::vector<Eigen::VectorXd> theta_direct(const std::vector<Eigen::VectorXd>& X,
                                          const BrownianPath& path, const FemSpace& space,
                                          double alpha, double beta) {
  const int N = path.grid.N;
  if (static_cast<int>(X.size()) != N + 1)
    throw std::invalid_argument("theta_direct: need N+1 states");
  const double tau = path.grid.tau;
  const Eigen::ArrayXd a0 = step_operator_diag(space, tau).array();

  std::vector<Eigen::VectorXd> theta(N);
  for (int n = 0; n < N; ++n) {
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(a0.size());
    Eigen::ArrayXd apow = Eigen::ArrayXd::Ones(a0.size());
    double prod = 1.0;  // prod_{k=n+2}^{j} (1 + beta D_kW)
    for (int j = n + 1; j <= N - 1; ++j) {
      apow *= a0;
      if (j > n + 1) prod *= 1.0 + beta * path.increments(j - 1);
      acc += tau * apow * prod * X[j].array();
    }
    apow *= a0;
    if (N > n + 1) prod *= 1.0 + beta * path.increments(N - 1);
    acc += alpha * apow * prod * X[N].array();
    theta[n] = acc.matrix();
  }
  return theta;
}

std::vector<Eigen::VectorXd> exact_y_on_path_beta0(const CoefficientControl& U,
                                                   const ProblemSpec& spec,
                                                   const BrownianPath& path) {
  if (spec.beta != 0.0)
    throw std::invalid_argument("exact_y_on_path_beta0: requires beta = 0");
  const int N = spec.grid.N;

  std::vector<Eigen::VectorXd> Y(N);
  for (int n = 0; n < N; ++n) {
    BrownianPath zeroed = path;
    for (int k = n; k < N; ++k) zeroed.increments(k) = 0.0;
    std::vector<FemFunction> u_vals = evaluate_control_on_path(U, zeroed);
    std::vector<FemFunction> states = simulate_forward_given_control(u_vals, spec, zeroed);
    std::vector<Eigen::VectorXd> X(N + 1);
    for (int j = 0; j <= N; ++j) X[j] = states[j].coeffs;
    Y[n] = -theta_backward(X, zeroed, *spec.space, spec.alpha, 0.0)[n];
  }
  return Y;
}

McRunResult gd_run_mc(const ProblemSpec& spec, const GdConfig& config,
                      const RegressionConfig& regression, int n_paths,
                      std::uint64_t master_seed) {
  const int N = spec.grid.N;
  const int dim = spec.space->dim;
  const double tau = spec.grid.tau;
  const int R = regression.n_cells > 0 ? regression.n_cells : default_cell_count(n_paths);
  if (n_paths < 10 * R)
    throw std::invalid_argument(
        "gd_run_mc: need at least 10 samples per regression cell (n_paths >= 10 R)");
  if (config.kappa < kappa_bound(spec) - 1e-12)
    throw std::invalid_argument("gd_run_mc: kappa below the admissible bound");
  if (config.tol <= 0.0 || config.max_iters < 1)
    throw std::invalid_argument("gd_run_mc: invalid tolerance or iteration budget");

  const double threshold = config.tol * std::min(1.0, 1.8 / config.kappa);
  const Eigen::ArrayXd a0 = step_operator_diag(*spec.space, tau).array();
  const Eigen::VectorXd xhat = project_x0(spec).coeffs;
  std::vector<Eigen::VectorXd> sighat(N);
  for (int k = 0; k < N; ++k) sighat[k] = project_sigma(spec, tau * k).coeffs;

  McRunResult result;
  result.paths.reserve(n_paths);
  for (int m = 0; m < n_paths; ++m)
    result.paths.push_back(
        sample_path(spec.grid, SeedSpec{master_seed, static_cast<std::uint64_t>(m)}));
  result.controls.assign(n_paths,
                         std::vector<Eigen::VectorXd>(N, Eigen::VectorXd::Zero(dim)));

  std::vector<std::vector<Eigen::VectorXd>> X(
      n_paths, std::vector<Eigen::VectorXd>(N + 1, Eigen::VectorXd::Zero(dim)));
  GdReport& report = result.report;
  bool converged = false;
  int iter = 0;

  while (true) {
    // Step 1: simulate every path forward under the current controls and
    // collect this iterate's ensemble cost.
    double cost_sum = 0.0;
    for (int m = 0; m < n_paths; ++m) {
      const BrownianPath& path = result.paths[m];
      X[m][0] = xhat;
      double acc = 0.0;
      for (int n = 0; n < N; ++n) {
        const Eigen::VectorXd& u = result.controls[m][n];
        acc += X[m][n].squaredNorm() + u.squaredNorm();
        X[m][n + 1] = (a0 * (X[m][n] + tau * u +
                             path.increments(n) * (spec.beta * X[m][n] + sighat[n]))
                                .array())
                          .matrix();
      }
      cost_sum += 0.5 * tau * acc + 0.5 * spec.alpha * X[m][N].squaredNorm();
    }
    const double cost = cost_sum / n_paths;
    if (iter > 0) report.costs.push_back(cost);  // cost of the last update's result
    if (converged || iter == config.max_iters) break;

    // Step 2: backward accumulation, then per time level replace the
    // conditional expectation by a partitioning regression on the state.
    std::vector<std::vector<Eigen::VectorXd>> theta(n_paths);
    for (int m = 0; m < n_paths; ++m)
      theta[m] = theta_backward(X[m], result.paths[m], *spec.space, spec.alpha, spec.beta);

    double dist_sq = 0.0;
    Eigen::MatrixXd xs(n_paths, dim);
    Eigen::VectorXd ys(n_paths);
    for (int n = 0; n < N; ++n) {
      for (int m = 0; m < n_paths; ++m) xs.row(m) = X[m][n].transpose();
      const Partition partition = build_partition(xs, R);
      Eigen::MatrixXd yhat(n_paths, dim);
      for (int j = 0; j < dim; ++j) {
        for (int m = 0; m < n_paths; ++m) ys(m) = theta[m][n](j);
        const PartitionEstimator est = fit(partition, SampleSet{xs, ys});
        for (int m = 0; m < n_paths; ++m)
          yhat(m, j) = predict(est, xs.row(m).transpose());
      }
      // Step 3: pathwise update U - (1/kappa)(U - Y) with Y = -regression.
      double level_sq = 0.0;
      for (int m = 0; m < n_paths; ++m) {
        const Eigen::VectorXd Y = -yhat.row(m).transpose();
        const Eigen::VectorXd delta =
            (1.0 / config.kappa) * (result.controls[m][n] - Y);
        level_sq += delta.squaredNorm();
        result.controls[m][n] -= delta;
      }
      dist_sq += tau * level_sq / n_paths;
    }
    const double dist = std::sqrt(dist_sq);
    report.distances.push_back(dist);
    ++iter;
    if (dist <= threshold) converged = true;
  }

  report.iterations_run = iter;
  report.converged = converged;
  report.final_cost = report.costs.empty() ? 0.0 : report.costs.back();
  return result;
}

}  // namespace slq
