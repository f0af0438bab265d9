#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "macroregime/common.hpp"
#include "macroregime/correlation.hpp"
#include "macroregime/partition.hpp"

namespace macroregime {

/// Undirected signed graph. Networks here have at most a few hundred nodes,
/// so weights are held densely; absent edges are exact zeros.
struct SignedGraph {
  std::vector<int> nodes;     // asset ids
  Eigen::MatrixXd weights;    // symmetric, zero diagonal
  std::optional<Date> date;

  std::size_t size() const { return nodes.size(); }
};

/// Keeps edges with |C_ij| >= threshold and restricts to the largest
/// connected component (ties: the component holding the smallest node id).
/// Throws PreconditionError unless 0 < threshold < 1, and Error (naming the
/// date) when no edge survives.
SignedGraph threshold_graph(const Eigen::MatrixXd& corr, double threshold, const std::vector<int>& node_ids,
                            std::optional<Date> date = std::nullopt);

/// Complete signed graph on all off-diagonal entries of `corr`.
SignedGraph dense_graph(const Eigen::MatrixXd& corr, const std::vector<int>& node_ids);

struct SpongeOptions {
  double tau_plus = 1.0;
  double tau_minus = 1.0;
  std::uint64_t seed = 0;  // KMeans++ seed of the embedding step
  std::size_t restarts = 10;
};

/// Symmetric SPONGE: the k smallest generalized eigenvectors of
/// (L+_sym + tau_minus I, L-_sym + tau_plus I), clustered by KMeans++.
Partition sponge_sym(const SignedGraph& g, std::size_t k, const SpongeOptions& options = {});

/// Q = (W+ Q+ - W- Q-) / (W+ + W-), Q+- the Newman modularities of the
/// positive and negative parts and W+- their total weights.
double signed_modularity(const SignedGraph& g, const Partition& p);

/// Newman modularity of a non-negative weighted graph under `labels` (0 when the graph has no weight).
double newman_modularity(const Eigen::MatrixXd& weights, std::span<const int> labels);

enum class KSelectionRule {
  argmax,              // largest Q_signed
  forward_difference,  // largest Q(k) - Q(k-1), the smallest k compared against 0
};

std::string to_string(KSelectionRule r);
KSelectionRule parse_k_selection_rule(std::string_view text);

struct KSelection {
  std::size_t k = 0;
  Partition partition;
  std::vector<std::size_t> ks;
  std::vector<double> modularity;  // Q_signed per entry of ks
};

/// Runs sponge_sym for every k in range and selects one by `rule`. Ties go to
/// the smaller k; a flat curve (spread < 1e-6) is reported as a warning.
KSelection select_k_by_modularity(const SignedGraph& g, const std::vector<std::size_t>& k_range,
                                  const SpongeOptions& options = {},
                                  KSelectionRule rule = KSelectionRule::argmax, Diagnostics* diag = nullptr);

struct StabilityOptions {
  double threshold = 0.2;
  std::vector<std::size_t> k_range{2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t lookback = 4;
  SpongeOptions sponge;
  KSelectionRule rule = KSelectionRule::argmax;
};

struct StabilitySeries {
  std::vector<Date> dates;
  std::vector<double> values;                   // kMissing for the first `lookback` dates
  std::vector<std::optional<Partition>> partitions;  // empty where clustering failed
  std::vector<std::size_t> ks;                  // 0 where clustering failed
};

/// Per date: threshold, cluster and average the ARI against the previous
/// `lookback` partitions over common nodes. Failures become warnings.
StabilitySeries stability_series(const CorrelationStack& stack, const std::vector<int>& node_ids,
                                 const StabilityOptions& options, Diagnostics* diag = nullptr);

namespace serial {
StabilitySeries stability_series(const CorrelationStack& stack, const std::vector<int>& node_ids,
                                 const StabilityOptions& options, Diagnostics* diag = nullptr);
}  // namespace serial

/// One row per (date, asset): `date,asset_id,cluster`.
void write_partitions_csv(const std::filesystem::path& path, const StabilitySeries& series);
/// `date,ari,k` with NaN where undefined.
void write_stability_series_csv(const std::filesystem::path& path, const StabilitySeries& series);

}  // namespace macroregime
