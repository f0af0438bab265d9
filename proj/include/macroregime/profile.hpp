#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "macroregime/common.hpp"
#include "macroregime/correlation.hpp"
#include "macroregime/panel.hpp"
#include "macroregime/regimes.hpp"
#include "macroregime/signed_network.hpp"

namespace macroregime {

/// Entrywise mean of the member windows' matrices, diagonal reset to 1.
Eigen::MatrixXd regime_average_corr(const CorrelationStack& stack, const RegimeLabeling& labels, int regime);

double off_diagonal_mean(const Eigen::MatrixXd& m);
double off_diagonal_abs_mean(const Eigen::MatrixXd& m);

struct ClassStats {
  AssetClass asset_class = AssetClass::equity;
  std::size_t asset_count = 0;
  double mean_return = kMissing;  // mean over member assets of each asset's mean return
  double std_return = kMissing;   // mean over member assets of each asset's sample std
  double sharpe = kMissing;       // mean / std * sqrt(annualization); missing when std is 0
};

/// Statistics over the given panel rows, one entry per asset class present, in enum order.
std::vector<ClassStats> class_statistics(const ReturnsPanel& panel, std::span<const std::size_t> rows,
                                         double annualization = 252.0);

/// Per-regime class statistics using the rows each regime owns (see regime_rows).
std::vector<std::vector<ClassStats>> class_statistics(const ReturnsPanel& panel, const RegimeLabeling& labels,
                                                      double annualization = 252.0);

/// Weighted betweenness (Brandes) with edge length = distance. Zero
/// off-diagonal distances are treated as missing edges. Values count
/// shortest-path shares over unordered source/target pairs.
std::vector<double> betweenness_centrality(const Eigen::MatrixXd& distance);

struct Centrality {
  int asset_id = 0;
  double value = 0.0;
};

/// Betweenness on D = sqrt(2 (1 - |avg_corr|)), sorted descending (ties by asset id).
std::vector<Centrality> betweenness_ranking(const Eigen::MatrixXd& avg_corr, const std::vector<int>& asset_ids);

struct RegimeCommunities {
  KSelection selection;
  Eigen::MatrixXi intercluster_sign;  // k x k, entries in {-1, 0, +1}
};

/// SPONGE on the dense signed graph of the regime-average matrix with k
/// chosen by modularity; then the sign of the mean correlation between
/// members of each pair of clusters.
RegimeCommunities regime_communities(const Eigen::MatrixXd& avg_corr, const std::vector<int>& asset_ids,
                                     const std::vector<std::size_t>& k_range, const SpongeOptions& sponge = {},
                                     KSelectionRule rule = KSelectionRule::argmax, Diagnostics* diag = nullptr);

/// Sign of the mean of corr over member pairs of clusters a and b (pairs of
/// distinct nodes; 0 when there are none).
Eigen::MatrixXi intercluster_signs(const Eigen::MatrixXd& corr, const Partition& p);

struct RegimeProfile {
  int regime_id = 0;
  std::size_t window_count = 0;
  Eigen::MatrixXd avg_corr;
  double avg_corr_scalar = 0.0;
  double avg_abs_corr_scalar = 0.0;
  std::vector<ClassStats> class_stats;
  std::vector<Centrality> betweenness;
  std::optional<RegimeCommunities> communities;  // empty when clustering was not possible
};

struct ProfileOptions {
  double annualization = 252.0;
  std::vector<std::size_t> k_range{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
  SpongeOptions sponge;
  KSelectionRule rule = KSelectionRule::argmax;
};

/// Profiles every regime, in parallel across regimes.
std::vector<RegimeProfile> profile_regimes(const ReturnsPanel& panel, const CorrelationStack& stack,
                                           const RegimeLabeling& labels, const ProfileOptions& options = {},
                                           Diagnostics* diag = nullptr);

/// Writes summary.csv plus regime_<id>/ {avg_corr, class_stats, betweenness,
/// communities, composition, intercluster_sign}.csv under `dir`.
void write_profiles(const std::filesystem::path& dir, const std::vector<RegimeProfile>& profiles,
                    const std::vector<AssetMeta>& assets);

}  // namespace macroregime
