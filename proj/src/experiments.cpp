#include "slq/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "slq/closed_loop.hpp"

namespace slq {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return std::isspace(c) == 0; };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != text.size())
    throw std::invalid_argument(key + ": expected a number, got '" + text + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(text, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != text.size())
    throw std::invalid_argument(key + ": expected an integer, got '" + text + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != text.size() || text.find('-') != std::string::npos)
    throw std::invalid_argument(key + ": expected an unsigned integer, got '" + text + "'");
  return static_cast<std::uint64_t>(v);
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) out.push_back(parse_int(key, trim(item)));
  if (out.empty()) throw std::invalid_argument(key + ": empty list");
  for (int v : out)
    if (v < 1) throw std::invalid_argument(key + ": entries must be positive");
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

/// "sine_mode" or "sine_mode(k)" -> k; anything else -> 0.
int sine_mode_of(const std::string& name) {
  if (name == "sine_mode") return 1;
  const std::string prefix = "sine_mode(";
  if (name.size() > prefix.size() + 1 && name.compare(0, prefix.size(), prefix) == 0 &&
      name.back() == ')') {
    const std::string inner = name.substr(prefix.size(), name.size() - prefix.size() - 1);
    const int k = parse_int("sine_mode", inner);
    if (k < 1) throw std::invalid_argument("sine_mode: mode index must be positive");
    return k;
  }
  return 0;
}

RiccatiScheme parse_scheme(const std::string& name) {
  if (name == "v1") return RiccatiScheme::V1;
  if (name == "v2") return RiccatiScheme::V2;
  throw std::invalid_argument("scheme: expected v1 or v2, got '" + name + "'");
}

RiccatiSolution solve_scheme(RiccatiScheme scheme, const FemSpace& space,
                             const TimeGrid& grid, double beta, double alpha) {
  return scheme == RiccatiScheme::V1 ? solve_riccati_v1(space, grid, beta, alpha, false)
                                     : solve_riccati_v2(space, grid, beta, alpha, false);
}

ProblemSpec make_problem(const ExperimentConfig& config, const FemSpace& space,
                         const TimeGrid& grid) {
  ProblemSpec spec;
  spec.beta = config.beta;
  spec.alpha = config.alpha;
  spec.space = &space;
  spec.grid = grid;
  spec.x0 = make_x0(config.x0, config.x_min, config.x_max);
  spec.sigma = make_sigma(config.sigma, config.x_min, config.x_max);
  return spec;
}

double resolve_kappa(const ExperimentConfig& config, const ProblemSpec& spec) {
  return config.kappa > 0.0 ? config.kappa : kappa_bound(spec);
}

void mean_and_std_error(const std::vector<double>& values, double& mean, double& se) {
  const int n = static_cast<int>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  mean = sum / n;
  if (n < 2) {
    se = 0.0;
    return;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  se = std::sqrt(ss / (n - 1) / n);
}

}  // namespace

void apply_setting(ExperimentConfig& config, const std::string& key,
                   const std::string& value) {
  if (key == "experiment") config.experiment = value;
  else if (key == "x_min") config.x_min = parse_double(key, value);
  else if (key == "x_max") config.x_max = parse_double(key, value);
  else if (key == "n_elements") config.n_elements = parse_int_list(key, value);
  else if (key == "n_steps") config.n_steps = parse_int_list(key, value);
  else if (key == "T") config.T = parse_double(key, value);
  else if (key == "beta") config.beta = parse_double(key, value);
  else if (key == "alpha") config.alpha = parse_double(key, value);
  else if (key == "x0") config.x0 = value;
  else if (key == "sigma") config.sigma = value;
  else if (key == "scheme") config.scheme = value;
  else if (key == "n_paths") config.n_paths = parse_int(key, value);
  else if (key == "seed") config.seed = parse_u64(key, value);
  else if (key == "kappa") config.kappa = parse_double(key, value);
  else if (key == "tol") config.tol = parse_double(key, value);
  else if (key == "max_iters") config.max_iters = parse_int(key, value);
  else if (key == "n_cells") config.n_cells = parse_int(key, value);
  else if (key == "n_steps_ref") config.n_steps_ref = parse_int(key, value);
  else if (key == "n_elements_ref") config.n_elements_ref = parse_int(key, value);
  else if (key == "sample_sizes") config.sample_sizes = parse_int_list(key, value);
  else if (key == "out") config.out = value;
  else throw std::invalid_argument("unknown configuration key '" + key + "'");
}

void load_config_file(ExperimentConfig& config, const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open config file '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == '[') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected key=value, got '" + line + "'");
    apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string render_config(const ExperimentConfig& config) {
  std::string out;
  out += "experiment=" + config.experiment + "\n";
  out += "x_min=" + fmt(config.x_min) + "\n";
  out += "x_max=" + fmt(config.x_max) + "\n";
  out += "n_elements=" + join_ints(config.n_elements) + "\n";
  out += "n_steps=" + join_ints(config.n_steps) + "\n";
  out += "T=" + fmt(config.T) + "\n";
  out += "beta=" + fmt(config.beta) + "\n";
  out += "alpha=" + fmt(config.alpha) + "\n";
  out += "x0=" + config.x0 + "\n";
  out += "sigma=" + config.sigma + "\n";
  out += "scheme=" + config.scheme + "\n";
  out += "n_paths=" + std::to_string(config.n_paths) + "\n";
  out += "seed=" + std::to_string(config.seed) + "\n";
  out += "kappa=" + fmt(config.kappa) + "\n";
  out += "tol=" + fmt(config.tol) + "\n";
  out += "max_iters=" + std::to_string(config.max_iters) + "\n";
  out += "n_cells=" + std::to_string(config.n_cells) + "\n";
  out += "n_steps_ref=" + std::to_string(config.n_steps_ref) + "\n";
  out += "n_elements_ref=" + std::to_string(config.n_elements_ref) + "\n";
  out += "sample_sizes=" + join_ints(config.sample_sizes) + "\n";
  out += "out=" + config.out + "\n";
  return out;
}

std::function<double(double)> make_x0(const std::string& name, double x_min,
                                      double x_max) {
  const double width = x_max - x_min;
  if (name == "zero") return [](double) { return 0.0; };
  if (name == "smooth_bump")
    return [x_min, width](double x) {
      const double s = (x - x_min) / width;
      return s * (1.0 - s) * (2.0 + s);
    };
  if (const int k = sine_mode_of(name); k > 0) {
    const double freq = k * M_PI / width;
    return [x_min, freq](double x) { return std::sin(freq * (x - x_min)); };
  }
  throw std::invalid_argument("unknown initial state '" + name + "'");
}

std::function<double(double, double)> make_sigma(const std::string& name, double x_min,
                                                 double x_max) {
  if (name == "time_modulated_sine") {
    const double freq = 2.0 * M_PI / (x_max - x_min);
    return [x_min, freq](double t, double x) {
      return (1.0 + 0.3 * t) * std::sin(freq * (x - x_min));
    };
  }
  auto profile = make_x0(name, x_min, x_max);
  return [profile = std::move(profile)](double, double x) { return profile(x); };
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (j > 0) out += ',';
    out += table.columns[j];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw std::logic_error("to_csv: row width does not match the header");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out += ',';
      out += fmt(row[j]);
    }
    out += '\n';
  }
  return out;
}

RateResult fit_rate(const std::vector<std::pair<double, double>>& pairs) {
  const int n = static_cast<int>(pairs.size());
  if (n < 3) throw std::invalid_argument("fit_rate: need at least 3 points");
  for (const auto& [r, e] : pairs)
    if (r <= 0.0 || e <= 0.0)
      throw std::invalid_argument("fit_rate: resolutions and errors must be positive");

  double mx = 0.0, my = 0.0;
  for (const auto& [r, e] : pairs) {
    mx += std::log(r);
    my += std::log(e);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [r, e] : pairs) {
    const double dx = std::log(r) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(e) - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: resolutions are all equal");

  RateResult result;
  result.points = pairs;
  result.slope = sxy / sxx;
  const double intercept = my - result.slope * mx;
  double rss = 0.0;
  for (const auto& [r, e] : pairs) {
    const double res = std::log(e) - intercept - result.slope * std::log(r);
    rss += res * res;
  }
  result.half_width = 2.0 * std::sqrt(rss / (n - 2) / sxx);
  return result;
}

ExperimentResult run_riccati_rate(const ExperimentConfig& config) {
  if (config.n_steps.size() < 3)
    throw std::invalid_argument("riccati-rate: need at least 3 time resolutions");
  const int n_max = *std::max_element(config.n_steps.begin(), config.n_steps.end());
  const int n_ref = config.n_steps_ref > 0 ? config.n_steps_ref : 16 * n_max;
  if (n_ref < 16 * n_max)
    throw std::invalid_argument(
        "riccati-rate: reference needs at least 16x the finest resolution");

  const FemSpace space =
      assemble_space(config.x_min, config.x_max, config.n_elements.front());
  const RiccatiScheme scheme = parse_scheme(config.scheme);
  const Eigen::VectorXd ref =
      solve_riccati_v2(space, make_grid(config.T, n_ref), config.beta, config.alpha, false)
          .P_diag[0];
  const Eigen::ArrayXd weight = space.eigenvalues.array().sqrt();

  ExperimentResult result;
  result.table.columns = {"tau", "err_weighted", "err_linf"};
  std::vector<std::pair<double, double>> pairs;
  for (int n_steps : config.n_steps) {
    const TimeGrid grid = make_grid(config.T, n_steps);
    const Eigen::VectorXd p0 =
        solve_scheme(scheme, space, grid, config.beta, config.alpha).P_diag[0];
    const Eigen::ArrayXd diff = (p0 - ref).array().abs();
    const double err_weighted = (diff / weight).maxCoeff();
    const double err_linf = diff.maxCoeff();
    result.table.rows.push_back({grid.tau, err_weighted, err_linf});
    pairs.emplace_back(grid.tau, err_weighted);
  }
  result.rate = fit_rate(pairs);
  return result;
}

ExperimentResult run_time_rate_closed(const ExperimentConfig& config) {
  if (config.n_steps.size() < 3)
    throw std::invalid_argument("time-rate: need at least 3 time resolutions");
  if (config.n_paths < 1) throw std::invalid_argument("time-rate: need paths");
  if (config.beta != 0.0 && config.n_paths < 1000)
    throw std::invalid_argument(
        "time-rate: multiplicative noise needs at least 1000 paths");
  const int n_max = *std::max_element(config.n_steps.begin(), config.n_steps.end());
  const int n_ref = config.n_steps_ref > 0 ? config.n_steps_ref : 8 * n_max;
  if (n_ref <= n_max)
    throw std::invalid_argument("time-rate: reference must be finer than every test");
  for (int n_steps : config.n_steps)
    if (n_ref % n_steps != 0)
      throw std::invalid_argument(
          "time-rate: reference step count must be a multiple of every tested value");

  const FemSpace space =
      assemble_space(config.x_min, config.x_max, config.n_elements.front());
  const RiccatiScheme scheme = parse_scheme(config.scheme);
  const TimeGrid grid_ref = make_grid(config.T, n_ref);
  const ProblemSpec spec_ref = make_problem(config, space, grid_ref);
  const RiccatiSolution P_ref =
      solve_scheme(scheme, space, grid_ref, config.beta, config.alpha);
  const EtaSequence eta_ref = solve_eta(P_ref, spec_ref);

  const int n_levels = static_cast<int>(config.n_steps.size());
  std::vector<TimeGrid> grids(n_levels);
  std::vector<ProblemSpec> specs(n_levels);
  std::vector<RiccatiSolution> riccatis(n_levels);
  std::vector<EtaSequence> etas(n_levels);
  std::vector<std::vector<double>> err_sq(n_levels);
  for (int i = 0; i < n_levels; ++i) {
    grids[i] = make_grid(config.T, config.n_steps[i]);
    specs[i] = make_problem(config, space, grids[i]);
    riccatis[i] = solve_scheme(scheme, space, grids[i], config.beta, config.alpha);
    etas[i] = solve_eta(riccatis[i], specs[i]);
    err_sq[i].assign(config.n_steps[i] + 1, 0.0);
  }

  for (int m = 0; m < config.n_paths; ++m) {
    const BrownianPath path_ref =
        sample_path(grid_ref, SeedSpec{config.seed, static_cast<std::uint64_t>(m)});
    const TrajectoryPair traj_ref = simulate_feedback(P_ref, eta_ref, spec_ref, path_ref);
    for (int i = 0; i < n_levels; ++i) {
      const int stride = n_ref / config.n_steps[i];
      const BrownianPath path = coarsen(path_ref, stride);
      const TrajectoryPair traj = simulate_feedback(riccatis[i], etas[i], specs[i], path);
      for (int n = 0; n <= config.n_steps[i]; ++n)
        err_sq[i][n] +=
            (traj.X[n].coeffs - traj_ref.X[n * stride].coeffs).squaredNorm();
    }
  }

  ExperimentResult result;
  result.table.columns = {"tau", "err"};
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < n_levels; ++i) {
    const double worst = *std::max_element(err_sq[i].begin(), err_sq[i].end());
    const double err = std::sqrt(worst / config.n_paths);
    result.table.rows.push_back({grids[i].tau, err});
    pairs.emplace_back(grids[i].tau, err);
  }
  result.rate = fit_rate(pairs);
  return result;
}

ExperimentResult run_space_rate(const ExperimentConfig& config) {
  if (config.n_elements.size() < 3)
    throw std::invalid_argument("space-rate: need at least 3 meshes");
  if (config.n_paths < 1) throw std::invalid_argument("space-rate: need paths");
  std::vector<int> elements = config.n_elements;
  std::sort(elements.begin(), elements.end());
  const int el_max = elements.back();
  const int el_ref = config.n_elements_ref > 0 ? config.n_elements_ref : 4 * el_max;
  if (el_ref < 4 * el_max)
    throw std::invalid_argument("space-rate: reference mesh needs at least 4x the finest");
  for (std::size_t i = 0; i + 1 < elements.size(); ++i)
    if (elements[i + 1] % elements[i] != 0)
      throw std::invalid_argument("space-rate: meshes must be nested");
  for (int el : elements)
    if (el_ref % el != 0)
      throw std::invalid_argument("space-rate: reference mesh must nest every test");

  const TimeGrid grid = make_grid(config.T, config.n_steps.front());
  const RiccatiScheme scheme = parse_scheme(config.scheme);
  const int n_levels = static_cast<int>(elements.size());

  std::vector<FemSpace> spaces;
  spaces.reserve(n_levels + 1);
  for (int el : elements) spaces.push_back(assemble_space(config.x_min, config.x_max, el));
  spaces.push_back(assemble_space(config.x_min, config.x_max, el_ref));
  const FemSpace& space_ref = spaces.back();

  std::vector<ProblemSpec> specs;
  std::vector<RiccatiSolution> riccatis;
  std::vector<EtaSequence> etas;
  for (const FemSpace& space : spaces) {
    specs.push_back(make_problem(config, space, grid));
    riccatis.push_back(solve_scheme(scheme, space, grid, config.beta, config.alpha));
    etas.push_back(solve_eta(riccatis.back(), specs.back()));
  }

  std::vector<double> err_sq(n_levels, 0.0);
  std::vector<Eigen::VectorXd> ref_nodal(grid.N);
  for (int m = 0; m < config.n_paths; ++m) {
    const BrownianPath path =
        sample_path(grid, SeedSpec{config.seed, static_cast<std::uint64_t>(m)});
    const TrajectoryPair traj_ref =
        simulate_feedback(riccatis[n_levels], etas[n_levels], specs[n_levels], path);
    for (int n = 0; n < grid.N; ++n) ref_nodal[n] = nodal_values(traj_ref.U[n]);
    for (int i = 0; i < n_levels; ++i) {
      const TrajectoryPair traj = simulate_feedback(riccatis[i], etas[i], specs[i], path);
      for (int n = 0; n < grid.N; ++n) {
        const Eigen::VectorXd diff =
            prolong_nodal(spaces[i], nodal_values(traj.U[n]), space_ref) - ref_nodal[n];
        const double norm = l2_norm_nodal(space_ref, diff);
        err_sq[i] += grid.tau * norm * norm;
      }
    }
  }

  ExperimentResult result;
  result.table.columns = {"h", "err"};
  RateResult rate;
  bool all_zero = true;
  for (int i = 0; i < n_levels; ++i) {
    const double h = (config.x_max - config.x_min) / elements[i];
    const double err = std::sqrt(err_sq[i] / config.n_paths);
    result.table.rows.push_back({h, err});
    rate.points.emplace_back(h, err);
    all_zero = all_zero && err < 1e-14;
  }
  if (all_zero) {
    rate.degenerate = true;
    result.rate = rate;
  } else {
    result.rate = fit_rate(rate.points);
  }
  return result;
}

ExperimentResult run_compare_open_closed(const ExperimentConfig& config) {
  if (config.beta != 0.0)
    throw std::invalid_argument(
        "compare: exact gradient descent needs additive noise (beta = 0)");
  if (config.n_paths < 2) throw std::invalid_argument("compare: need paths");
  const int n_fine = *std::max_element(config.n_steps.begin(), config.n_steps.end());
  for (int n_steps : config.n_steps)
    if (n_fine % n_steps != 0)
      throw std::invalid_argument("compare: step counts must nest for paired paths");

  const FemSpace space =
      assemble_space(config.x_min, config.x_max, config.n_elements.front());
  const RiccatiScheme scheme = parse_scheme(config.scheme);
  const TimeGrid grid_fine = make_grid(config.T, n_fine);

  ExperimentResult result;
  result.table.columns = {"n_steps", "tau",   "gd_cost", "gd_iterations",
                          "fb_cost", "fb_se", "gap"};
  for (int n_steps : config.n_steps) {
    const TimeGrid grid = make_grid(config.T, n_steps);
    const ProblemSpec spec = make_problem(config, space, grid);

    GdConfig gd;
    gd.kappa = resolve_kappa(config, spec);
    gd.max_iters = config.max_iters;
    gd.tol = config.tol;
    const auto [control, report] = gd_run(spec, gd);

    const RiccatiSolution P =
        solve_scheme(scheme, space, grid, config.beta, config.alpha);
    const EtaSequence eta = solve_eta(P, spec);
    std::vector<double> costs(config.n_paths);
    for (int m = 0; m < config.n_paths; ++m) {
      BrownianPath path =
          sample_path(grid_fine, SeedSpec{config.seed, static_cast<std::uint64_t>(m)});
      if (n_steps != n_fine) path = coarsen(path, n_fine / n_steps);
      costs[m] = cost_of_trajectory(simulate_feedback(P, eta, spec, path), config.alpha);
    }
    double fb_cost = 0.0, fb_se = 0.0;
    mean_and_std_error(costs, fb_cost, fb_se);

    result.table.rows.push_back({static_cast<double>(n_steps), grid.tau,
                                 report.final_cost,
                                 static_cast<double>(report.iterations_run), fb_cost,
                                 fb_se, fb_cost - report.final_cost});
  }
  return result;
}

ExperimentResult run_gd(const ExperimentConfig& config) {
  const FemSpace space =
      assemble_space(config.x_min, config.x_max, config.n_elements.front());
  const TimeGrid grid = make_grid(config.T, config.n_steps.front());
  const ProblemSpec spec = make_problem(config, space, grid);

  GdConfig gd;
  gd.kappa = resolve_kappa(config, spec);
  gd.max_iters = config.max_iters;
  gd.tol = config.tol;

  GdReport report;
  if (config.beta == 0.0) {
    report = gd_run(spec, gd).second;
  } else {
    RegressionConfig regression;
    regression.n_cells = config.n_cells;
    report = gd_run_mc(spec, gd, regression, config.n_paths, config.seed).report;
  }

  ExperimentResult result;
  result.table.columns = {"iteration", "distance", "cost"};
  for (int i = 0; i < report.iterations_run; ++i)
    result.table.rows.push_back(
        {static_cast<double>(i + 1), report.distances[i], report.costs[i]});
  return result;
}

ExperimentResult run_regress_demo(const ExperimentConfig& config) {
  const auto truth = [](double u, double v) { return std::sin(M_PI * u) + 0.5 * v * v; };
  const double noise = 0.3;

  ExperimentResult result;
  result.table.columns = {"n_samples", "n_cells", "mse_data", "mse_truth"};
  for (int n_samples : config.sample_sizes) {
    if (n_samples < 2) throw std::invalid_argument("regress-demo: sample sizes >= 2");
    SampleSet samples;
    samples.x.resize(n_samples, 2);
    samples.y.resize(n_samples);
    Eigen::VectorXd exact(n_samples);
    for (int i = 0; i < n_samples; ++i) {
      const auto path = static_cast<std::uint64_t>(i);
      samples.x(i, 0) = 2.0 * detail::uniform_counter(config.seed, path, 0) - 1.0;
      samples.x(i, 1) = 2.0 * detail::uniform_counter(config.seed, path, 1) - 1.0;
      exact(i) = truth(samples.x(i, 0), samples.x(i, 1));
      samples.y(i) =
          exact(i) +
          noise * detail::inverse_normal_cdf(detail::uniform_counter(config.seed, path, 2));
    }
    const int n_cells =
        config.n_cells > 0 ? config.n_cells : default_cell_count(n_samples);
    const PartitionEstimator estimator =
        fit(build_partition(samples.x, n_cells), samples);
    double mse_data = 0.0, mse_truth = 0.0;
    for (int i = 0; i < n_samples; ++i) {
      const double p = predict(estimator, samples.x.row(i).transpose());
      mse_data += (p - samples.y(i)) * (p - samples.y(i));
      mse_truth += (p - exact(i)) * (p - exact(i));
    }
    result.table.rows.push_back({static_cast<double>(n_samples),
                                 static_cast<double>(n_cells), mse_data / n_samples,
                                 mse_truth / n_samples});
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.experiment == "riccati-rate") return run_riccati_rate(config);
  if (config.experiment == "time-rate") return run_time_rate_closed(config);
  if (config.experiment == "space-rate") return run_space_rate(config);
  if (config.experiment == "compare") return run_compare_open_closed(config);
  if (config.experiment == "gd-run") return run_gd(config);
  if (config.experiment == "regress-demo") return run_regress_demo(config);
  throw std::invalid_argument("unknown experiment '" + config.experiment + "'");
}

std::string plot_script(const Table& table, const std::string& csv_path, bool loglog) {
  std::string out;
  out += "set datafile separator \",\"\n";
  out += "set key autotitle columnhead\n";
  out += loglog ? "set logscale xy\n" : "set logscale y\n";
  out += "set xlabel \"" + table.columns.front() + "\"\n";
  out += "plot ";
  for (std::size_t j = 1; j < table.columns.size(); ++j) {
    if (j > 1) out += ", \\\n     ";
    out += "\"" + csv_path + "\" using 1:" + std::to_string(j + 1) + " with linespoints";
  }
  out += "\n";
  return out;
}

}  // namespace slq
