#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slq/open_loop.hpp"

namespace slq {

/// Resolved settings of one benchmark run. Precedence: struct defaults,
/// then a key=value config file, then command-line flags of the same names.
struct ExperimentConfig {
  std::string experiment = "riccati-rate";
  double x_min = 0.0;
  double x_max = 1.0;
  std::vector<int> n_elements = {8, 16, 32, 64};
  std::vector<int> n_steps = {16, 32, 64, 128, 256};
  double T = 1.0;
  double beta = 0.0;
  double alpha = 1.0;
  std::string x0 = "smooth_bump";
  std::string sigma = "time_modulated_sine";
  std::string scheme = "v2";
  int n_paths = 200;
  std::uint64_t seed = 1;
  double kappa = 0.0;     // 0 picks the admissible bound of the problem
  double tol = 1e-8;
  int max_iters = 200;
  int n_cells = 0;        // 0 picks the sample-size default
  int n_steps_ref = 0;    // 0 refines the finest tested value automatically
  int n_elements_ref = 0; // likewise for the reference mesh
  std::vector<int> sample_sizes = {250, 1000, 4000, 16000};
  std::string out = "";   // empty derives <experiment>.csv
};

/// Applies one key=value pair; unknown keys and malformed values throw.
void apply_setting(ExperimentConfig& config, const std::string& key,
                   const std::string& value);

/// Flat key=value file. Blank lines, #-comments and [section] headers are
/// skipped; every other line must parse.
void load_config_file(ExperimentConfig& config, const std::string& path);

/// Echo of the full resolved configuration, one key=value per line.
std::string render_config(const ExperimentConfig& config);

/// Named initial states: "zero", "smooth_bump", "sine_mode" or
/// "sine_mode(k)", expressed on the unit-rescaled domain coordinate.
std::function<double(double)> make_x0(const std::string& name, double x_min,
                                      double x_max);

/// Named noise intensities: the x0 built-ins held constant in time, plus
/// "time_modulated_sine" = (1 + 0.3 t) sin(2 pi s).
std::function<double(double, double)> make_sigma(const std::string& name,
                                                 double x_min, double x_max);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Header row plus one line per data row, doubles at full round-trip
/// precision so repeat runs compare byte for byte.
std::string to_csv(const Table& table);

struct RateResult {
  std::vector<std::pair<double, double>> points;  // (resolution, error)
  double slope = 0.0;
  double half_width = 0.0;  // two standard errors of the fitted slope
  bool degenerate = false;  // all errors at noise level, fit skipped
};

/// Ordinary least squares on (log resolution, log error). Needs at least
/// three pairs with positive entries.
RateResult fit_rate(const std::vector<std::pair<double, double>>& pairs);

struct ExperimentResult {
  Table table;
  std::optional<RateResult> rate;
};

/// Riccati diagonal at t = 0 against a much finer reference run of the same
/// recursion family; errors in the weighted mode norm sup_i |dp_i|/sqrt(l_i)
/// and in sup_i |dp_i|. CSV: tau, err_weighted, err_linf.
ExperimentResult run_riccati_rate(const ExperimentConfig& config);

/// Strong feedback-state error against a fine-grid run driven by the same
/// Brownian paths (block-summed increments). CSV: tau, err.
ExperimentResult run_time_rate_closed(const ExperimentConfig& config);

/// Feedback-control error across nested meshes against a fine-mesh reference
/// on a common time grid and common paths. CSV: h, err.
ExperimentResult run_space_rate(const ExperimentConfig& config);

/// Exact gradient-descent cost versus closed-loop Monte-Carlo cost on the
/// same problem, paired paths across step counts. CSV: n_steps, tau,
/// gd_cost, gd_iterations, fb_cost, fb_se, gap.
ExperimentResult run_compare_open_closed(const ExperimentConfig& config);

/// Iteration trace of gradient descent, exact for beta = 0 and regression
/// based otherwise. CSV: iteration, distance, cost.
ExperimentResult run_gd(const ExperimentConfig& config);

/// Partitioning-regression accuracy on a synthetic two-dimensional
/// conditional-mean problem over growing sample sizes. CSV: n_samples,
/// n_cells, mse_data, mse_truth.
ExperimentResult run_regress_demo(const ExperimentConfig& config);

/// Dispatch on config.experiment.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Generic gnuplot commands plotting every column against the first from
/// the CSV at the given path.
std::string plot_script(const Table& table, const std::string& csv_path,
                        bool loglog);

}  // namespace slq
