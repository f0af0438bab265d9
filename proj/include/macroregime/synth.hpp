#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "macroregime/common.hpp"
#include "macroregime/panel.hpp"
#include "macroregime/signed_network.hpp"

namespace macroregime {

/// Seeded generator with platform-independent uniform and normal draws
/// (the standard distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  double uniform();                     // [0, 1)
  double uniform(double lo, double hi);
  double normal();                      // Box-Muller
  std::size_t index(std::size_t n);     // [0, n)
  bool bernoulli(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Block correlation structure: assets in the same block correlate at
/// `within`, assets in different blocks at `between`.
struct BlockSpec {
  std::vector<int> block_of;  // block id per asset
  double within = 0.6;
  double between = 0.0;
};

Eigen::MatrixXd block_correlation(const BlockSpec& spec);

/// Eigenvalue-clipped correlation matrix closest (in the spectral sense) to `c`, unit diagonal.
Eigen::MatrixXd nearest_correlation(const Eigen::MatrixXd& c, double floor = 1e-6);

struct RegimeSegment {
  int regime = 0;
  Eigen::MatrixXd correlation;
  std::size_t rows = 0;
};

struct PlantedRegimeSpec {
  std::vector<RegimeSegment> segments;  // concatenated in time
  double volatility = 0.01;
  std::uint64_t seed = 0;
  Date start{2000, 1, 3};
};

struct SyntheticPanel {
  ReturnsPanel panel;
  std::vector<int> row_truth;  // planted regime of every row
};

/// Synthetic metadata: ids 1..N, names A01.., classes cycling over equity,
/// commodity, fixed income and currency.
std::vector<AssetMeta> synthetic_assets(std::size_t n);

/// Gaussian returns, each segment drawn from its own correlation matrix.
/// Throws PreconditionError for a non-positive-definite target, quoting the
/// smallest eigenvalue and the distance to nearest_correlation().
SyntheticPanel planted_regime_panel(const PlantedRegimeSpec& spec);

/// K regimes of `rows_per_regime` rows each from the given block specs.
SyntheticPanel planted_regime_panel(std::size_t rows_per_regime, const std::vector<BlockSpec>& specs,
                                    std::uint64_t seed, double volatility = 0.01);

/// K distinct random block structures on N assets (2-4 blocks each,
/// positive within-block and mixed-sign between-block levels), all positive
/// definite. Any two structures' condensed matrices correlate by at most 0.2
/// in absolute value.
std::vector<BlockSpec> random_block_specs(std::size_t k, std::size_t n, std::uint64_t seed);

/// Ground truth per window: the regime holding most of the window's rows
/// (ties go to the regime of the window's last row).
std::vector<int> window_truth(const std::vector<int>& row_truth, const std::vector<std::size_t>& end_rows,
                              std::size_t length);

struct PlantedLeadLagSpec {
  std::vector<std::size_t> cluster_sizes{5, 5};
  std::size_t lag = 1;
  double coupling = 0.8;
  double noise = 0.2;
  std::size_t rows = 500;
  bool chain = true;  // cluster c follows c-1; otherwise every cluster follows cluster 0
  double volatility = 0.01;
  std::uint64_t seed = 0;
  Date start{2000, 1, 3};
};

struct SyntheticLeadLag {
  ReturnsPanel panel;
  std::vector<int> cluster_of_asset;
  std::vector<std::pair<int, int>> cluster_edges;  // (leader cluster, follower cluster)
};

/// Cluster 0 is white noise. Each follower asset j of cluster c with parent p:
///   r_j(t) = vol (coupling s_p(t - lag) + noise z),
/// where s_p is the parent cluster's standardized sum. Asset classes follow clusters.
SyntheticLeadLag planted_leadlag_panel(const PlantedLeadLagSpec& spec);

struct PlantedGraph {
  SignedGraph graph;
  std::vector<int> truth;
};

/// Levels that reproduce `returns` under percent changes (or simple
/// differences, per asset), starting at `base` one business day earlier.
LevelsPanel levels_from_returns(const ReturnsPanel& returns, double base = 100.0);

/// Signed stochastic block model with +1 edges inside blocks (probability
/// p_in_pos) and -1 edges across blocks (probability p_out_neg).
PlantedGraph signed_sbm(std::size_t n, std::size_t k, double p_in_pos, double p_out_neg, std::uint64_t seed);

/// Skew-symmetric flow matrix: for each planted (a, b), every pair a -> b
/// carries +1 with probability p_edge; other pairs get a random-direction
/// unit edge with probability p_noise.
Eigen::MatrixXd planted_flow_matrix(const std::vector<std::size_t>& sizes,
                                    const std::vector<std::pair<int, int>>& flows, double p_edge, double p_noise,
                                    std::uint64_t seed, std::vector<int>* truth = nullptr);

}  // namespace macroregime
