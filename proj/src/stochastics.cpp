#include "slq/stochastics.hpp"

#include <cmath>
#include <stdexcept>

namespace slq {

TimeGrid make_grid(double T, int N) {
  if (!(T > 0.0)) throw std::invalid_argument("make_grid: need T > 0");
  if (N < 1) throw std::invalid_argument("make_grid: need N >= 1");
  return TimeGrid{T, N, T / N};
}

namespace detail {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform_counter(std::uint64_t master, std::uint64_t path, std::uint64_t k) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ mix64(path + 0xd1b54a32d192ed03ULL));
  h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  // 53 mantissa bits, offset by half a ulp so u is never 0 or 1
  return (static_cast<double>(h >> 11) + 0.5) * 0x1p-53;
}

double inverse_normal_cdf(double u) {
  // Acklam's algorithm
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  if (u < p_low) {
    const double q = std::sqrt(-2.0 * std::log(u));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (u > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - u));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = u - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

BrownianPath sample_path(const TimeGrid& grid, const SeedSpec& seed) {
  BrownianPath p;
  p.grid = grid;
  p.increments.resize(grid.N);
  const double scale = std::sqrt(grid.tau);
  for (int n = 0; n < grid.N; ++n) {
    const double u = detail::uniform_counter(seed.master_seed, seed.path_index,
                                             static_cast<std::uint64_t>(n));
    p.increments(n) = scale * detail::inverse_normal_cdf(u);
  }
  return p;
}

BrownianPath coarsen(const BrownianPath& path, int factor) {
  const int N = path.grid.N;
  if (factor < 1 || N % factor != 0)
    throw std::invalid_argument("coarsen: factor must divide N");
  BrownianPath out;
  out.grid = make_grid(path.grid.T, N / factor);
  out.increments.resize(out.grid.N);
  for (int k = 0; k < out.grid.N; ++k) {
    double s = 0.0;
    for (int j = 0; j < factor; ++j) s += path.increments(k * factor + j);
    out.increments(k) = s;
  }
  return out;
}

}  // namespace slq
