#include "slq/regression.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slq {

int default_cell_count(int n_samples) {
  int r = 8;
  while (2 * r <= static_cast<int>(std::sqrt(static_cast<double>(n_samples)))) r *= 2;
  return std::min(r, n_samples);
}

namespace {

struct Builder {
  const Eigen::MatrixXd& xs;
  std::vector<PartitionNode> nodes;
  int next_leaf = 0;

  // Splits `indices` into `target_leaves` cells below a fresh node; returns
  // the node id. Leaf indices are assigned left to right.
  int grow(std::vector<int> indices, int target_leaves) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (target_leaves == 1) {
      nodes[id].leaf_index = next_leaf++;
      return id;
    }

    // Complete subtree of 2^k leaves, extra leaves deepen the left side.
    int full = 1;
    while (2 * full <= target_leaves) full *= 2;
    const int extra = target_leaves - full;
    const int extra_left = std::min(extra, full / 2);
    const int r_left = full / 2 + extra_left;
    const int r_right = full / 2 + (extra - extra_left);

    int coord = 0;
    double threshold = 0.0;
    std::vector<int> left_idx, right_idx;
    const int count = static_cast<int>(indices.size());
    if (count > 0) {
      double best_range = -1.0;
      for (int c = 0; c < xs.cols(); ++c) {
        double lo = xs(indices[0], c), hi = lo;
        for (int i : indices) {
          lo = std::min(lo, xs(i, c));
          hi = std::max(hi, xs(i, c));
        }
        if (hi - lo > best_range) {
          best_range = hi - lo;
          coord = c;
        }
      }
      // Order statistic proportional to the leaf split; for an even split
      // this is the lower median.
      const int k_left =
          std::max(1, std::min(count - 1, (count * r_left + target_leaves - 1) / target_leaves));
      std::vector<double> vals(count);
      for (int i = 0; i < count; ++i) vals[i] = xs(indices[i], coord);
      std::nth_element(vals.begin(), vals.begin() + (k_left - 1), vals.end());
      threshold = vals[k_left - 1];
      // Ties at the threshold all go left; resulting empty cells fall back
      // to the global mean at fit time.
      for (int i : indices)
        (xs(i, coord) <= threshold ? left_idx : right_idx).push_back(i);
    }

    nodes[id].split_coord = coord;
    nodes[id].threshold = threshold;
    const int l = grow(std::move(left_idx), r_left);
    const int r = grow(std::move(right_idx), r_right);
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
  }
};

}  // namespace

Partition build_partition(const Eigen::MatrixXd& xs, int n_cells) {
  if (n_cells < 1) throw std::invalid_argument("build_partition: need at least one cell");
  if (n_cells > xs.rows())
    throw std::invalid_argument("build_partition: more cells than samples");

  Builder b{xs, {}, 0};
  std::vector<int> all(xs.rows());
  for (int i = 0; i < xs.rows(); ++i) all[i] = i;
  b.grow(std::move(all), n_cells);

  Partition p;
  p.dim = static_cast<int>(xs.cols());
  p.n_cells = n_cells;
  p.nodes = std::move(b.nodes);
  return p;
}

int locate_cell(const Partition& partition, const Eigen::VectorXd& x) {
  int id = 0;
  while (partition.nodes[id].leaf_index < 0) {
    const PartitionNode& node = partition.nodes[id];
    id = x(node.split_coord) <= node.threshold ? node.left : node.right;
  }
  return partition.nodes[id].leaf_index;
}

PartitionEstimator fit(const Partition& partition, const SampleSet& samples) {
  if (samples.x.rows() != samples.y.size())
    throw std::invalid_argument("fit: sample count mismatch between x and y");

  PartitionEstimator est;
  est.partition = partition;
  est.cell_means = Eigen::VectorXd::Zero(partition.n_cells);
  est.cell_occupied.assign(partition.n_cells, 0);

  Eigen::VectorXi counts = Eigen::VectorXi::Zero(partition.n_cells);
  double total = 0.0;
  for (int i = 0; i < samples.x.rows(); ++i) {
    const int cell = locate_cell(partition, samples.x.row(i).transpose());
    est.cell_means(cell) += samples.y(i);
    counts(cell) += 1;
    total += samples.y(i);
  }
  est.global_mean = samples.y.size() > 0 ? total / samples.y.size() : 0.0;
  for (int c = 0; c < partition.n_cells; ++c) {
    if (counts(c) > 0) {
      est.cell_means(c) /= counts(c);
      est.cell_occupied[c] = 1;
    } else {
      est.cell_means(c) = est.global_mean;
    }
  }
  return est;
}

double predict(const PartitionEstimator& estimator, const Eigen::VectorXd& x) {
  return estimator.cell_means(locate_cell(estimator.partition, x));
}

Eigen::VectorXi leaf_counts(const Partition& partition, const Eigen::MatrixXd& xs) {
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(partition.n_cells);
  for (int i = 0; i < xs.rows(); ++i)
    counts(locate_cell(partition, xs.row(i).transpose())) += 1;
  return counts;
}

}  // namespace slq
