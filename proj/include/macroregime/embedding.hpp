#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "macroregime/common.hpp"

namespace macroregime {

/// Either a fixed number of axes or the smallest number reaching a
/// cumulative explained-variance fraction.
struct PcaRequest {
  std::size_t dims = 0;
  double variance_target = 0.0;

  static PcaRequest count(std::size_t d) { return {d, 0.0}; }
  static PcaRequest variance(double v) { return {0, v}; }
};

struct Embedding {
  Eigen::MatrixXd points;             // rows x dims, projections on the principal axes
  Eigen::MatrixXd axes;               // features x dims, unit principal axes
  Eigen::RowVectorXd mean;            // per-feature mean removed before projection
  Eigen::VectorXd explained_ratio;    // per component, every non-null component
  std::size_t dims = 0;
  double explained_variance = 0.0;    // cumulative fraction captured by `dims` axes
};

/// PCA with each row of `data` as one observation. Axis signs are fixed so the
/// largest-magnitude loading of every axis is positive.
Embedding pca_embed(const Eigen::MatrixXd& data, const PcaRequest& request, Diagnostics* diag = nullptr);

struct KMeansOptions {
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
  std::size_t max_iterations = 300;
  double tolerance = 1e-8;  // stop when no centroid moves farther than this
};

struct KMeansResult {
  std::vector<int> labels;  // canonical: numbered by first occurrence
  Eigen::MatrixXd centroids;
  double inertia = 0.0;
  std::size_t iterations = 0;
};

/// KMeans++ seeding followed by Lloyd iterations, best of `restarts` runs.
/// Restarts run in parallel; the result depends only on (points, k, seed).
KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, const KMeansOptions& options = {});

namespace serial {
KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, const KMeansOptions& options = {});
}  // namespace serial

/// Sum of squared distances to the global mean (inertia of a single cluster).
double total_inertia(const Eigen::MatrixXd& points);

/// Renumbers labels 0, 1, ... in order of first appearance.
std::vector<int> relabel_by_first_occurrence(std::span<const int> labels);

}  // namespace macroregime
