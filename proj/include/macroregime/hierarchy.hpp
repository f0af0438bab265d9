#pragma once

#include <vector>

#include <Eigen/Dense>

namespace macroregime {

/// D = sqrt(2 (1 - |C|)), zero diagonal, entries in [0, sqrt(2)].
Eigen::MatrixXd to_distance(const Eigen::MatrixXd& corr);

/// One agglomeration step. Cluster ids follow the usual linkage convention:
/// 0..n-1 are leaves, n + k is the cluster created by merge k.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0.0;
  std::size_t size = 0;
};

struct Dendrogram {
  std::size_t leaves = 0;
  std::vector<Merge> merges;  // n - 1 merges, non-decreasing height
};

/// Average-linkage (UPGMA) agglomerative clustering via the nearest-neighbour
/// chain algorithm, O(n^2) time.
Dendrogram average_linkage(const Eigen::MatrixXd& distance);

/// Full n x n matrix of merge heights of lowest common ancestors.
Eigen::MatrixXd cophenetic_matrix(const Dendrogram& tree);

/// Cophenetic distances in condensed (upper-triangle, row-major) order.
Eigen::VectorXd cophenetic_condensed(const Dendrogram& tree);

}  // namespace macroregime
