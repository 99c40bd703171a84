#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace slq {

struct TimeGrid {
  double T = 1.0;
  int N = 1;
  double tau = 1.0;
};

TimeGrid make_grid(double T, int N);

/// Identifies one path of a reproducible ensemble. The pair fully determines
/// the increments, independent of generation order and worker count.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t path_index = 0;
};

struct BrownianPath {
  TimeGrid grid;
  Eigen::VectorXd increments;  // increments(n-1) = W(t_n) - W(t_{n-1}), n = 1..N
};

/// N standard-normal draws scaled by sqrt(tau), from a counter-style
/// deterministic stream keyed by (master_seed, path_index).
BrownianPath sample_path(const TimeGrid& grid, const SeedSpec& seed);

/// Block sums of fine increments; factor must divide N.
BrownianPath coarsen(const BrownianPath& path, int factor);

namespace detail {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

/// k-th uniform of the (master, path) stream, strictly inside (0,1).
double uniform_counter(std::uint64_t master, std::uint64_t path, std::uint64_t k);

/// Inverse standard-normal CDF (Acklam's rational approximation, |err| < 1.2e-9).
double inverse_normal_cdf(double u);

}  // namespace detail

}  // namespace slq
