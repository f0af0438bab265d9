#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "macroregime/common.hpp"
#include "macroregime/panel.hpp"
#include "macroregime/partition.hpp"

namespace macroregime {

struct GrangerResult {
  bool significant = false;
  double strength = 0.0;  // 1 - p
  double p_value = 1.0;
  double f_statistic = 0.0;
  std::size_t df1 = 0;
  std::size_t df2 = 0;
  bool singular = false;  // design was rank deficient; never significant
};

/// F-test of whether lags 1..lag of `x` improve an OLS forecast of `y`
/// (with intercept) beyond lags 1..lag of `y` itself. Needs at least
/// 4 lag + 10 observations.
GrangerResult granger_pair(std::span<const double> x, std::span<const double> y, std::size_t lag,
                           double alpha = 0.05, Diagnostics* diag = nullptr);

/// Same test on columns of `values`, using only regression rows whose lags
/// stay inside one of the contiguous `spans`.
GrangerResult granger_pair(const Eigen::MatrixXd& values, std::size_t cause, std::size_t effect,
                           std::span<const RowSpan> spans, std::size_t lag, double alpha = 0.05,
                           Diagnostics* diag = nullptr);

/// Splits sorted row indices into maximal runs of consecutive rows.
std::vector<RowSpan> contiguous_spans(std::span<const std::size_t> rows);

struct LeadLagOptions {
  double alpha = 0.05;
  bool benjamini_hochberg = false;  // FDR control over all ordered pairs of one lag
};

/// Skew-symmetric matrix of deflated Granger strengths: entry (i, j) > 0 means i leads j.
struct LeadLagMatrix {
  std::size_t lag = 0;
  double alpha = 0.05;
  Eigen::MatrixXd strengths;
  std::size_t significant_count = 0;  // non-zero pairs after deflation
};

/// Tests every ordered pair in both directions. When both directions are
/// significant only the stronger survives, at strength strong - weak.
LeadLagMatrix leadlag_matrix(const Eigen::MatrixXd& values, std::span<const RowSpan> spans, std::size_t lag,
                             const LeadLagOptions& options = {}, Diagnostics* diag = nullptr);

namespace serial {
LeadLagMatrix leadlag_matrix(const Eigen::MatrixXd& values, std::span<const RowSpan> spans, std::size_t lag,
                             const LeadLagOptions& options = {}, Diagnostics* diag = nullptr);
}  // namespace serial

inline const std::vector<std::size_t> kDefaultLagGrid{1, 5, 10, 16, 21, 42};

struct OptimalLag {
  std::size_t lag = 0;
  std::vector<std::size_t> grid;
  std::vector<std::size_t> counts;  // significant relations per grid lag
  LeadLagMatrix matrix;             // at the chosen lag
};

/// Lag of the grid with the most significant (deflated) relations; ties go
/// to the smaller lag. Lags too long for the data are skipped with a warning.
OptimalLag optimal_lag(const Eigen::MatrixXd& values, std::span<const RowSpan> spans,
                       const std::vector<std::size_t>& grid = kDefaultLagGrid, const LeadLagOptions& options = {},
                       Diagnostics* diag = nullptr);

struct LeadLagClustering {
  Partition partition;
  std::vector<int> ordering;     // cluster ids from most leading to most lagging
  std::vector<double> net_flow;  // per cluster: sum of M from the cluster to its complement
  double v_score = kMissing;
  double beta = 1.0;
  std::size_t lag = 0;

  int leading() const { return ordering.front(); }
  int lagging() const { return ordering.back(); }
  /// Position of `cluster` in the ordering (0 = most leading).
  int rank_of(int cluster) const;
};

/// i * M is Hermitian for skew-symmetric M.
Eigen::MatrixXcd hermitian_adjacency(const Eigen::MatrixXd& m);

/// Spectral clustering of a directed flow matrix: nodes are embedded by the
/// real and imaginary parts of the ceil(k/2) eigenvectors of i M with the
/// largest absolute eigenvalues, then grouped by KMeans++.
LeadLagClustering hermitian_cluster(const Eigen::MatrixXd& m, const std::vector<int>& node_ids, std::size_t k,
                                    std::uint64_t seed = 0);

struct VMeasure {
  double homogeneity = 0.0;
  double completeness = 0.0;
  double v = 0.0;
};

/// Homogeneity, completeness and their beta-weighted harmonic mean. A zero
/// entropy maps the corresponding score to 1.
VMeasure v_measure(std::span<const int> clusters, std::span<const int> classes, double beta = 1.0);

/// hermitian_cluster for each k, keeping the best v-measure against
/// `classes` (ties go to the smaller k).
LeadLagClustering select_k_by_vmeasure(const Eigen::MatrixXd& m, const std::vector<int>& node_ids,
                                       std::span<const int> classes, const std::vector<std::size_t>& k_range,
                                       double beta = 1.0, std::uint64_t seed = 0);

/// Edge list `leader,lagger,strength,lag` (asset ids), strongest first.
void write_edges_csv(const std::filesystem::path& path, const LeadLagMatrix& m, const std::vector<int>& ids);
/// `asset,cluster,rank` where rank 0 is the most leading cluster.
void write_clustering_csv(const std::filesystem::path& path, const LeadLagClustering& c);

}  // namespace macroregime
