#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "macroregime/common.hpp"
#include "macroregime/panel.hpp"

namespace macroregime {

enum class CorrelationMethod { pearson, spearman, kendall, weighted_kendall };

std::string to_string(CorrelationMethod m);
CorrelationMethod parse_correlation_method(std::string_view text);

// Pairwise kernels. All throw UndefinedCorrelation when either series is
// constant and PreconditionError on length mismatch or fewer than 3 points.

double pearson(std::span<const double> x, std::span<const double> y);

/// Average-rank Spearman. Tie-free inputs use the rank-difference formula
/// 1 - 6 sum(d^2) / (l (l^2 - 1)); with ties it is the Pearson correlation of
/// the average ranks (the rank-difference formula is biased under ties).
double spearman(std::span<const double> x, std::span<const double> y);

/// (concordant - discordant) / l(l-1)/2. Tied pairs count in the denominator only.
double kendall(std::span<const double> x, std::span<const double> y);

/// Hyperbolically weighted Kendall statistic. Observation t with recency rank
/// r_t (0 = most recent) carries weight 1/(r_t + 1); a pair of observations
/// weighs the sum of its two members' weights. The result is the weighted
/// concordance minus weighted discordance over the total pair weight.
double weighted_kendall(std::span<const double> x, std::span<const double> y,
                        std::span<const std::size_t> recency_ranks);

/// Same statistic with arbitrary positive per-observation weights.
double weighted_kendall_by_weight(std::span<const double> x, std::span<const double> y,
                                  std::span<const double> weights);

/// Recency ranks for a window of length l: rank 0 at the last observation.
std::vector<std::size_t> recency_ranks(std::size_t length);

/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

double correlate(CorrelationMethod method, std::span<const double> x, std::span<const double> y);

// Windowed stacks --------------------------------------------------------------

struct WindowSpec {
  std::size_t length = 0;  // observations per window (l)
  std::size_t stride = 1;  // observations between successive window ends
  CorrelationMethod method = CorrelationMethod::weighted_kendall;

  /// Throws PreconditionError unless length >= 3 and stride >= 1. Warns when l/N < 1.
  void validate(std::size_t asset_count, Diagnostics* diag = nullptr) const;
};

struct CorrelationStack {
  std::vector<Date> end_dates;
  std::vector<std::size_t> end_rows;  // panel row of each window's last observation
  std::vector<Eigen::MatrixXd> matrices;
  WindowSpec spec;

  std::size_t size() const { return matrices.size(); }
  std::size_t asset_count() const { return matrices.empty() ? 0 : static_cast<std::size_t>(matrices.front().rows()); }
};

/// Panel rows that close each window. Windows are anchored to the final
/// panel row and step back by `stride`; the result is in chronological order.
std::vector<std::size_t> window_end_rows(std::size_t rows, const WindowSpec& spec);

/// Correlation matrix of panel rows [end - l + 1, end]. A column that is
/// constant inside the window gets zero correlations and a warning.
Eigen::MatrixXd window_matrix(const ReturnsPanel& panel, std::size_t end_row, const WindowSpec& spec,
                              Diagnostics* diag = nullptr);

/// One matrix per window position, evaluated in parallel over windows.
CorrelationStack windowed_stack(const ReturnsPanel& panel, const WindowSpec& spec,
                                Diagnostics* diag = nullptr);

namespace serial {
CorrelationStack windowed_stack(const ReturnsPanel& panel, const WindowSpec& spec,
                                Diagnostics* diag = nullptr);
}  // namespace serial

/// Writes `manifest.csv` plus one `corr_<date>.csv` per window into `dir`.
void write_stack(const std::filesystem::path& dir, const CorrelationStack& stack,
                 const std::vector<std::string>& asset_names);
CorrelationStack read_stack(const std::filesystem::path& dir);

/// Upper triangle (diagonal excluded), row-major: N(N-1)/2 entries.
Eigen::VectorXd condensed(const Eigen::MatrixXd& m);

}  // namespace macroregime
