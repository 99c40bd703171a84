#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "slq/closed_loop.hpp"
#include "slq/open_loop.hpp"

using namespace slq;

namespace {

ProblemSpec make_spec(const FemSpace& s, const TimeGrid& g, double beta, double alpha) {
  ProblemSpec spec;
  spec.beta = beta;
  spec.alpha = alpha;
  spec.space = &s;
  spec.grid = g;
  spec.x0 = [](double) { return 0.0; };
  spec.sigma = [](double, double) { return 0.0; };
  return spec;
}

CoefficientControl random_control(const FemSpace& s, const TimeGrid& g, unsigned seed,
                                  double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  CoefficientControl U = zero_control(s, g);
  for (int n = 0; n < g.N; ++n) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < s.dim; ++k) {
        U.f[n][i](k) = normal(rng);
        U.ftilde[n][i](k) = normal(rng);
      }
    }
    for (int k = 0; k < s.dim; ++k) U.g[n](k) = normal(rng);
  }
  return U;
}

double quadratic_slope(const std::vector<double>& eps, const std::vector<double>& vals) {
  // least-squares slope of log|vals| against log(eps)
  const int n = static_cast<int>(eps.size());
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += std::log(eps[i]);
    my += std::log(std::abs(vals[i]));
  }
  mx /= n;
  my /= n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    num += (std::log(eps[i]) - mx) * (std::log(std::abs(vals[i])) - my);
    den += (std::log(eps[i]) - mx) * (std::log(eps[i]) - mx);
  }
  return num / den;
}

}  // namespace

TEST_CASE("open_loop: kappa bound arithmetic") {
  FemSpace s = assemble_space(0.0, 1.0, 2);
  TimeGrid g = make_grid(1.0, 4);
  CHECK(kappa_bound(make_spec(s, g, 0.0, 0.0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(kappa_bound(make_spec(s, g, 0.0, 1.0)) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(kappa_bound(make_spec(s, g, 1.0, 1.0)) ==
        doctest::Approx(6.4365636569180904707).epsilon(1e-15));
}

TEST_CASE("open_loop: zero problem keeps the zero control fixed") {
  FemSpace s = assemble_space(0.0, 1.0, 4);
  TimeGrid g = make_grid(1.0, 5);
  ProblemSpec spec = make_spec(s, g, 0.0, 1.0);
  CoefficientControl U = zero_control(s, g);

  GdStepResult step = gd_step_exact(U, spec, 3.0);
  for (int n = 0; n < g.N; ++n) {
    CHECK(step.Y.g[n].norm() == 0.0);
    CHECK(step.U_next.g[n].norm() == 0.0);
    for (int i = 0; i < n; ++i) {
      CHECK(step.Y.f[n][i].norm() == 0.0);
      CHECK(step.Y.ftilde[n][i].norm() == 0.0);
    }
  }

  auto [opt, report] = gd_run(spec, GdConfig{3.0, 50, 1e-10});
  CHECK(report.converged);
  CHECK(report.iterations_run == 1);
  CHECK(control_norm_exact(opt) == 0.0);
}

TEST_CASE("open_loop: single gradient step against the hand-evaluated G") {
  FemSpace s = assemble_space(0.0, 1.0, 2);
  TimeGrid g = make_grid(1.0, 2);
  ProblemSpec spec = make_spec(s, g, 0.0, 0.0);
  FemFunction mode = from_spectral(s, Eigen::VectorXd::Ones(1));
  spec.x0 = [space = mode.space, nodal = nodal_values(mode)](double x) {
    return eval_nodal(*space, nodal, x);
  };

  const double a0 = 1.0 / (1.0 + g.tau * s.eigenvalues(0));
  GdStepResult step = gd_step_exact(zero_control(s, g), spec, 2.0);
  CHECK(std::abs(step.Y.g[0](0) - -g.tau * a0 * a0) < 1e-14);
  CHECK(std::abs(step.Y.g[1](0)) == 0.0);
  CHECK(std::abs(step.U_next.g[0](0) - 0.5 * step.Y.g[0](0)) < 1e-16);
}

TEST_CASE("open_loop: the product branch never activates from a zero start") {
  FemSpace s = assemble_space(0.0, 1.0, 4);
  TimeGrid g = make_grid(1.0, 6);
  ProblemSpec spec = make_spec(s, g, 0.0, 1.0);
  spec.x0 = [](double x) { return std::sin(x); };
  spec.sigma = [](double t, double x) { return (1.0 + t) * x * (1.0 - x); };

  CoefficientControl U = zero_control(s, g);
  bool saw_ftilde = false;
  for (int l = 0; l < 3; ++l) {
    U = gd_step_exact(U, spec, 3.0).U_next;
    for (int n = 0; n < g.N; ++n)
      for (int i = 0; i < n; ++i) {
        CHECK(U.f[n][i].norm() == 0.0);
        if (U.ftilde[n][i].norm() > 0.0) saw_ftilde = true;
      }
  }
  CHECK(saw_ftilde);  // the noise-driven branch does activate
}

TEST_CASE("open_loop: exact control norm on simple representations") {
  FemSpace s = assemble_space(0.0, 1.0, 4);
  TimeGrid g = make_grid(1.0, 4);

  CoefficientControl U = zero_control(s, g);
  double g_sq = 0.0;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int n = 0; n < g.N; ++n) {
    for (int k = 0; k < s.dim; ++k) U.g[n](k) = normal(rng);
    g_sq += U.g[n].squaredNorm();
  }
  CHECK(control_norm_exact(U) == doctest::Approx(g.tau * g_sq).epsilon(1e-14));

  CoefficientControl V = zero_control(s, g);
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(s.dim, 1.0, 2.0);
  V.ftilde[1][0] = v;
  CHECK(control_norm_exact(V) ==
        doctest::Approx(g.tau * g.tau * v.squaredNorm()).epsilon(1e-14));

  CoefficientControl W = zero_control(s, g);
  W.f[1][0] = v;
  CHECK(control_norm_exact(W) ==
        doctest::Approx(g.tau * (1.0 + g.tau) * v.squaredNorm()).epsilon(1e-14));
}

TEST_CASE("open_loop: exact control norm agrees with a Monte-Carlo estimate") {
  FemSpace s = assemble_space(0.0, 1.0, 3);
  TimeGrid g = make_grid(1.0, 6);
  CoefficientControl U = random_control(s, g, 31, 0.5);
  const double exact = control_norm_exact(U);

  const int M = 20000;
  double mean = 0.0, sq = 0.0;
  for (int m = 0; m < M; ++m) {
    BrownianPath path = sample_path(g, SeedSpec{777, static_cast<uint64_t>(m)});
    double val = 0.0;
    for (const FemFunction& u : evaluate_control_on_path(U, path))
      val += u.coeffs.squaredNorm();
    val *= g.tau;
    mean += val;
    sq += val * val;
  }
  mean /= M;
  const double se = std::sqrt((sq / M - mean * mean) / (M - 1));
  CHECK(std::abs(exact - mean) <= 3.0 * se);
}

TEST_CASE("open_loop: exact cost of the uncontrolled eigenmode is geometric") {
  FemSpace s = assemble_space(0.0, 1.0, 5);
  TimeGrid g = make_grid(1.0, 8);
  const int k = 1;
  ProblemSpec spec = make_spec(s, g, 0.0, 2.0);
  FemFunction mode = from_spectral(s, Eigen::VectorXd::Unit(s.dim, k));
  spec.x0 = [space = mode.space, nodal = nodal_values(mode)](double x) {
    return eval_nodal(*space, nodal, x);
  };

  const double a0 = 1.0 / (1.0 + g.tau * s.eigenvalues(k));
  double want = 0.0;
  for (int n = 0; n < g.N; ++n) want += 0.5 * g.tau * std::pow(a0, 2 * n);
  want += 0.5 * spec.alpha * std::pow(a0, 2 * g.N);
  CHECK(evaluate_cost_exact(zero_control(s, g), spec) ==
        doctest::Approx(want).epsilon(1e-13));

  ProblemSpec trivial = make_spec(s, g, 0.0, 1.0);
  CHECK(evaluate_cost_exact(zero_control(s, g), trivial) == 0.0);
}

TEST_CASE("open_loop: exact cost agrees with a Monte-Carlo estimate") {
  FemSpace s = assemble_space(0.0, 1.0, 3);
  TimeGrid g = make_grid(1.0, 6);
  ProblemSpec spec = make_spec(s, g, 0.0, 1.5);
  spec.x0 = [](double x) { return std::sin(3.0 * x); };
  spec.sigma = [](double t, double x) { return std::cos(2.0 * t) * x; };
  CoefficientControl U = random_control(s, g, 47, 0.4);

  const double exact = evaluate_cost_exact(U, spec);

  const int M = 20000;
  std::vector<TrajectoryPair> trajs;
  trajs.reserve(M);
  for (int m = 0; m < M; ++m) {
    TrajectoryPair tp;
    tp.path = sample_path(g, SeedSpec{4242, static_cast<uint64_t>(m)});
    tp.U = evaluate_control_on_path(U, tp.path);
    tp.X = simulate_forward_given_control(tp.U, spec, tp.path);
    trajs.push_back(std::move(tp));
  }
  CostEstimate mc = evaluate_discrete_cost(trajs, spec.alpha);
  CHECK(std::abs(exact - mc.mean) <= 3.0 * mc.std_error);
}

TEST_CASE("open_loop: pathwise evaluation of the representation") {
  FemSpace s = assemble_space(0.0, 1.0, 3);
  TimeGrid g = make_grid(1.0, 4);

  CoefficientControl G = zero_control(s, g);
  for (int n = 0; n < g.N; ++n) G.g[n] = Eigen::VectorXd::Constant(s.dim, n + 1.0);
  BrownianPath path = sample_path(g, SeedSpec{8, 2});
  auto vals = evaluate_control_on_path(G, path);
  for (int n = 0; n < g.N; ++n) CHECK((vals[n].coeffs - G.g[n]).norm() == 0.0);

  CoefficientControl U = random_control(s, g, 12);
  BrownianPath flat = path;
  flat.increments.setZero();
  auto collapsed = evaluate_control_on_path(U, flat);
  for (int n = 0; n < g.N; ++n) {
    Eigen::VectorXd want = U.g[n];
    for (int i = 0; i < n; ++i) want += U.f[n][i];
    CHECK((collapsed[n].coeffs - want).norm() < 1e-14);
  }

  CoefficientControl A = random_control(s, g, 13);
  CoefficientControl B = random_control(s, g, 14);
  auto va = evaluate_control_on_path(A, path);
  auto vb = evaluate_control_on_path(B, path);
  auto vab = evaluate_control_on_path(add_scaled(A, 2.5, B), path);
  for (int n = 0; n < g.N; ++n)
    CHECK((vab[n].coeffs - va[n].coeffs - 2.5 * vb[n].coeffs).norm() < 1e-12);
}

TEST_CASE("open_loop: adjoint accumulation equals the unrolled double sum") {
  FemSpace s = assemble_space(0.0, 1.0, 3);
  TimeGrid g = make_grid(1.0, 4);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal;

  for (double beta : {0.0, 0.7}) {
    BrownianPath path = sample_path(g, SeedSpec{55, beta == 0.0 ? 0ull : 1ull});
    std::vector<Eigen::VectorXd> X(g.N + 1);
    for (auto& x : X) {
      x.resize(s.dim);
      for (int k = 0; k < s.dim; ++k) x(k) = normal(rng);
    }
    auto back = theta_backward(X, path, s, 1.3, beta);
    auto direct = theta_direct(X, path, s, 1.3, beta);
    REQUIRE(back.size() == direct.size());
    for (std::size_t n = 0; n < back.size(); ++n)
      CHECK((back[n] - direct[n]).norm() < 1e-12);
  }
}

TEST_CASE("open_loop: exact Y coefficients match the zero-future path oracle") {
  FemSpace s = assemble_space(0.0, 1.0, 3);
  TimeGrid g = make_grid(1.0, 4);
  ProblemSpec spec = make_spec(s, g, 0.0, 1.2);
  spec.x0 = [](double x) { return x * (1.0 - x) * (2.0 + x); };
  spec.sigma = [](double t, double x) { return (1.0 + 0.3 * t) * std::sin(2.0 * x); };

  CoefficientControl U = random_control(s, g, 2025, 0.6);
  CoefficientControl Y = gd_step_exact(U, spec, 3.0).Y;

  for (int p = 0; p < 10; ++p) {
    BrownianPath path = sample_path(g, SeedSpec{606, static_cast<uint64_t>(p)});
    auto coeff_vals = evaluate_control_on_path(Y, path);
    auto oracle_vals = exact_y_on_path_beta0(U, spec, path);
    for (int n = 0; n < g.N; ++n)
      CHECK((coeff_vals[n].coeffs - oracle_vals[n]).norm() < 1e-10);
  }
}

TEST_CASE("open_loop: gradient descent contracts and certifies its fixed point") {
  FemSpace s = assemble_space(0.0, 1.0, 5);
  TimeGrid g = make_grid(1.0, 16);
  ProblemSpec spec = make_spec(s, g, 0.0, 1.0);
  spec.x0 = [](double x) { return 16.0 * x * x * (1.0 - x) * (1.0 - x); };
  spec.sigma = [](double t, double x) { return (1.0 + t) * std::sin(x); };

  const double kappa = kappa_bound(spec);  // = 3 here
  GdConfig config{kappa, 200, 1e-11};
  auto [opt, report] = gd_run(spec, config);
  REQUIRE(report.converged);

  // squared successive distances contract at least like 1 - 1/kappa
  const double rate = std::sqrt(1.0 - 1.0 / kappa) + 0.01;
  for (std::size_t i = 3; i + 1 < report.distances.size(); ++i)
    CHECK(report.distances[i + 1] <= rate * report.distances[i]);

  // exact cost never increases along the iterates
  for (std::size_t i = 0; i + 1 < report.costs.size(); ++i)
    CHECK(report.costs[i + 1] <= report.costs[i] + 1e-14);

  // fixed-point residual within twice the tolerance
  CoefficientControl Ystar = gd_step_exact(opt, spec, kappa).Y;
  const double residual = std::sqrt(control_norm_exact(add_scaled(opt, -1.0, Ystar)));
  CHECK(residual <= 2.0 * config.tol);

  // the cost is locally quadratic around the optimum
  std::vector<double> eps{1e-2, 1e-3, 1e-4};
  const double base = evaluate_cost_exact(opt, spec);
  for (int dir = 0; dir < 5; ++dir) {
    CoefficientControl V = random_control(s, g, 900 + dir, 1.0);
    std::vector<double> deltas;
    for (double e : eps)
      deltas.push_back(evaluate_cost_exact(add_scaled(opt, e, V), spec) - base);
    CHECK(quadratic_slope(eps, deltas) >= 1.9);
  }
}

TEST_CASE("open_loop: descent reports non-convergence without throwing") {
  FemSpace s = assemble_space(0.0, 1.0, 4);
  TimeGrid g = make_grid(1.0, 8);
  ProblemSpec spec = make_spec(s, g, 0.0, 1.0);
  spec.x0 = [](double x) { return std::sin(2.0 * x); };

  auto [opt, report] = gd_run(spec, GdConfig{3.0, 2, 1e-30});
  CHECK_FALSE(report.converged);
  CHECK(report.iterations_run == 2);
  CHECK(report.distances.size() == 2);
  (void)opt;
}

TEST_CASE("open_loop: guards reject invalid setups") {
  FemSpace s = assemble_space(0.0, 1.0, 3);
  TimeGrid g = make_grid(1.0, 4);
  ProblemSpec multiplicative = make_spec(s, g, 0.5, 1.0);
  CoefficientControl U = zero_control(s, g);

  CHECK_THROWS(gd_step_exact(U, multiplicative, 3.0));
  CHECK_THROWS(evaluate_cost_exact(U, multiplicative));
  CHECK_THROWS(gd_run(multiplicative, GdConfig{10.0, 10, 1e-8}));

  ProblemSpec additive = make_spec(s, g, 0.0, 1.0);
  CHECK_THROWS(gd_run(additive, GdConfig{2.9, 10, 1e-8}));  // kappa below bound

  CHECK_THROWS(gd_run_mc(additive, GdConfig{3.0, 5, 1e-3}, RegressionConfig{8}, 79, 1));
}

TEST_CASE("open_loop: Monte-Carlo descent leaves the zero problem at zero") {
  FemSpace s = assemble_space(0.0, 1.0, 3);
  TimeGrid g = make_grid(1.0, 4);
  ProblemSpec spec = make_spec(s, g, 0.6, 1.0);  // multiplicative, but zero data

  McRunResult run = gd_run_mc(spec, GdConfig{kappa_bound(spec), 5, 1e-12},
                              RegressionConfig{4}, 40, 99);
  CHECK(run.report.converged);
  for (const auto& per_path : run.controls)
    for (const auto& u : per_path) CHECK(u.norm() == 0.0);
  CHECK(run.report.final_cost == 0.0);
}

TEST_CASE("open_loop: Monte-Carlo descent approaches the exact additive optimum") {
  FemSpace s = assemble_space(0.0, 1.0, 3);
  TimeGrid g = make_grid(1.0, 8);
  ProblemSpec spec = make_spec(s, g, 0.0, 1.0);
  spec.x0 = [](double x) { return 16.0 * x * x * (1.0 - x) * (1.0 - x); };
  spec.sigma = [](double t, double x) { return (1.0 + t) * std::sin(x); };

  auto [opt, exact_report] = gd_run(spec, GdConfig{3.0, 200, 1e-10});
  REQUIRE(exact_report.converged);

  McRunResult mc = gd_run_mc(spec, GdConfig{3.0, 40, 1e-4}, RegressionConfig{8}, 400, 31337);
  CHECK(mc.report.iterations_run >= 5);
  CHECK(std::abs(mc.report.final_cost - exact_report.final_cost) <
        0.15 * exact_report.final_cost);

  // report bookkeeping
  CHECK(mc.report.distances.size() == static_cast<std::size_t>(mc.report.iterations_run));
  CHECK(mc.report.costs.size() == mc.report.distances.size());
}
