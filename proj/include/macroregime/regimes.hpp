#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "macroregime/common.hpp"
#include "macroregime/correlation.hpp"
#include "macroregime/embedding.hpp"
#include "macroregime/panel.hpp"
#include "macroregime/similarity.hpp"

namespace macroregime {

struct RegimeLabeling {
  std::vector<Date> dates;            // window-end dates
  std::vector<std::size_t> end_rows;  // panel row of each window end (empty when unknown)
  std::size_t stride = 1;             // rows owned by each window: (end - stride, end]
  std::vector<int> labels;            // 0..k-1, numbered by first appearance
  std::size_t k = 0;
  std::size_t embedding_dims = 0;
  double explained_variance = 0.0;
  std::vector<std::size_t> k_candidates;  // K values of the inertia curve
  std::vector<double> inertia_curve;      // inertia per entry of k_candidates

  void validate() const;
  /// Window indices labelled `regime`, in time order.
  std::vector<std::size_t> members(int regime) const;
};

enum class ElbowRule {
  log_curvature,  // second difference of log inertia
  curvature,      // second difference of raw inertia
};

std::string to_string(ElbowRule r);
ElbowRule parse_elbow_rule(std::string_view text);

struct RegimeOptions {
  std::vector<std::size_t> k_range{2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
  std::optional<std::size_t> fixed_k;  // bypasses the elbow
  ElbowRule elbow = ElbowRule::log_curvature;
};

/// K with the largest discrete second difference of the inertia curve among
/// `k_range`. `ks` must be consecutive and include a neighbour on each side
/// of every candidate that is to be scored; candidates without both
/// neighbours are skipped. Ties go to the smaller K.
std::size_t elbow_k(std::span<const std::size_t> ks, std::span<const double> inertia,
                    std::span<const std::size_t> k_range, ElbowRule rule = ElbowRule::log_curvature);

/// Clusters embedded dates with KMeans++ for every K in range (plus one
/// neighbour on each side for the curvature), then picks K by the elbow.
RegimeLabeling kmeans_regimes(const Embedding& embedding, const std::vector<Date>& dates,
                              const RegimeOptions& options, Diagnostics* diag = nullptr);

struct RegimeConfig {
  WindowSpec window;
  SimilarityKind similarity = SimilarityKind::metacorrelation;
  PcaRequest pca = PcaRequest::variance(0.9);
  RegimeOptions kmeans;
};

struct RegimeRun {
  CorrelationStack stack;
  TimeSimilarityMatrix similarity;
  Embedding embedding;
  RegimeLabeling labeling;
};

/// Correlation stack -> similarity -> PCA -> KMeans++ with elbow.
RegimeRun detect_regimes(const ReturnsPanel& panel, const RegimeConfig& config, Diagnostics* diag = nullptr);
RegimeRun detect_regimes(CorrelationStack stack, const RegimeConfig& config, Diagnostics* diag = nullptr);

/// Rows of the panel owned by each regime: window w owns (end_w - stride, end_w].
/// Rows before the first window's slice belong to no regime. Result[r] lists rows in order.
std::vector<std::vector<std::size_t>> regime_rows(const RegimeLabeling& labeling, std::size_t panel_rows);

// Stability ------------------------------------------------------------------------

struct Perturbation {
  std::string name;
  RegimeConfig config;
};

struct StabilityRow {
  std::string name;
  double ari = kMissing;
  std::size_t common_dates = 0;
  std::size_t k = 0;
};

/// Seeds +1/+2, window length x0.8 and x1.2, PCA dims -1/+1, K -1/+1.
std::vector<Perturbation> default_perturbations(const RegimeConfig& base, const RegimeLabeling& base_labels);

/// ARI of the base labels against each perturbed run, over the window-end
/// dates the two runs share. Failed perturbations are reported with a
/// missing ARI and a warning.
std::vector<StabilityRow> stability_report(const ReturnsPanel& panel, const RegimeLabeling& base,
                                           const std::vector<Perturbation>& perturbations,
                                           Diagnostics* diag = nullptr);

/// ARI between two labelings restricted to their common dates.
double labeling_ari(const RegimeLabeling& a, const RegimeLabeling& b, std::size_t* common = nullptr);

void write_labels_csv(const std::filesystem::path& path, const RegimeLabeling& labeling);
RegimeLabeling read_labels_csv(const std::filesystem::path& path);
void write_inertia_csv(const std::filesystem::path& path, const RegimeLabeling& labeling);
void write_explained_variance_csv(const std::filesystem::path& path, const Embedding& embedding);
void write_stability_csv(const std::filesystem::path& path, const std::vector<StabilityRow>& rows);

}  // namespace macroregime
