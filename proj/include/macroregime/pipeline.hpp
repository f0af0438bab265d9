#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "macroregime/common.hpp"
#include "macroregime/correlation.hpp"
#include "macroregime/embedding.hpp"
#include "macroregime/regimes.hpp"
#include "macroregime/signed_network.hpp"
#include "macroregime/similarity.hpp"

namespace macroregime {

/// Fully resolved run configuration. Missing keys take the defaults below
/// and are listed in `defaults_applied`.
struct PipelineConfig {
  // data
  std::filesystem::path levels_path;
  std::filesystem::path meta_path;
  bool restrict_complete = false;
  bool allow_simple_difference_any_class = false;
  // window
  WindowSpec window{0, 1, CorrelationMethod::weighted_kendall};
  // similarity
  SimilarityKind similarity = SimilarityKind::metacorrelation;
  // pca
  PcaRequest pca = PcaRequest::variance(0.9);
  // kmeans
  std::vector<std::size_t> kmeans_k_range{2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::optional<std::size_t> kmeans_k;
  std::uint64_t kmeans_seed = 0;
  std::size_t kmeans_restarts = 10;
  ElbowRule elbow = ElbowRule::log_curvature;
  // stability of the regime labels under perturbations
  bool stability_enabled = true;
  // network
  double network_threshold = 0.2;
  std::vector<std::size_t> network_k_range{2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t network_lookback = 4;
  double tau_plus = 1.0;
  double tau_minus = 1.0;
  std::uint64_t network_seed = 0;
  KSelectionRule network_rule = KSelectionRule::argmax;
  // profile
  std::vector<std::size_t> profile_k_range{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
  double annualization = 252.0;
  // leadlag
  std::vector<std::size_t> lag_grid{1, 5, 10, 16, 21, 42};
  double alpha = 0.05;
  double beta = 1.0;
  std::vector<std::size_t> leadlag_k_range{2, 3, 4, 5, 6, 7, 8, 9, 10};
  bool benjamini_hochberg = false;
  std::uint64_t leadlag_seed = 0;
  // strategy
  bool strategy_enabled = true;

  std::vector<std::string> defaults_applied;

  /// Relative data paths are resolved against `base_dir`.
  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  nlohmann::json to_json() const;
  /// Applies a global seed override to every seeded stage.
  void override_seed(std::uint64_t seed);
};

PipelineConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a, written as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

enum class Stage { ingest, correlate, regimes, network, profile, leadlag, strategy };

std::string to_string(Stage s);
Stage parse_stage(std::string_view text);
inline constexpr Stage kAllStages[] = {Stage::ingest,  Stage::correlate, Stage::regimes, Stage::network,
                                       Stage::profile, Stage::leadlag,   Stage::strategy};

struct RunOptions {
  std::filesystem::path out;       // run directory; empty: runs/run-<timestamp>
  bool resume = false;             // reuse stage outputs whose hash matches
  std::optional<std::uint64_t> seed;
  int threads = 0;                 // <= 0: OpenMP default
  Stage last_stage = Stage::strategy;
};

struct RunResult {
  std::filesystem::path dir;
  std::vector<std::string> stages_run;
  std::vector<std::string> stages_cached;
  Diagnostics diagnostics;
};

/// Runs the stages up to `options.last_stage`, writing each stage's exports
/// under <dir>/<stage>/ and a manifest.json at the top. A stage failure is
/// rethrown as Error naming the stage.
RunResult run_pipeline(PipelineConfig config, const RunOptions& options);

}  // namespace macroregime
