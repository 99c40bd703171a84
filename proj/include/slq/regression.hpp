#pragma once

#include <Eigen/Dense>
#include <vector>

namespace slq {

/// M samples (x_i, y_i) with x_i a row of x.
struct SampleSet {
  Eigen::MatrixXd x;  // M x d
  Eigen::VectorXd y;  // M
};

struct PartitionNode {
  int split_coord = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf_index = -1;  // >= 0 iff leaf
};

/// Binary split tree whose R leaves tile R^d: every query point descends to
/// exactly one leaf via "x(coord) <= threshold goes left".
struct Partition {
  int dim = 0;
  int n_cells = 0;
  std::vector<PartitionNode> nodes;
};

/// Piecewise constant estimator: per-cell sample mean where the cell caught
/// samples, global sample mean elsewhere.
struct PartitionEstimator {
  Partition partition;
  Eigen::VectorXd cell_means;
  std::vector<char> cell_occupied;
  double global_mean = 0.0;
};

struct RegressionConfig {
  int n_cells = 0;  // 0 picks default_cell_count(M)
};

/// Largest power of two not above sqrt(M), floored at 8 and capped at M.
int default_cell_count(int n_samples);

/// Recursive data-dependent splitting into R statistically equivalent cells:
/// each node splits the coordinate of largest sample range at a proportional
/// order statistic, so leaf occupancies are balanced (exactly M/R when R is a
/// power of two dividing M and values are distinct). When R is not a power of
/// two the left subtree receives the extra leaves.
Partition build_partition(const Eigen::MatrixXd& xs, int n_cells);

int locate_cell(const Partition& partition, const Eigen::VectorXd& x);

PartitionEstimator fit(const Partition& partition, const SampleSet& samples);

double predict(const PartitionEstimator& estimator, const Eigen::VectorXd& x);

/// Occupancy histogram of the samples over the cells.
Eigen::VectorXi leaf_counts(const Partition& partition, const Eigen::MatrixXd& xs);

}  // namespace slq
