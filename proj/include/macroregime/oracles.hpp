#pragma once

// Slow, independent reference implementations used by the tests. Nothing
// here calls into the main library; inputs are plain vectors so the two
// code paths share no data structures either.

#include <cstddef>
#include <vector>

namespace macroregime::oracle {

using Matrix = std::vector<std::vector<double>>;

/// Enumerates all pairs: sum w sign(dx) sign(dy) / sum w with w = 1/(r_i+1) + 1/(r_j+1).
double weighted_kendall(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<std::size_t>& ranks);

/// (concordant - discordant) / (n (n - 1) / 2) by pair enumeration.
double kendall(const std::vector<double>& x, const std::vector<double>& y);

/// Textbook Pearson from raw sums of products.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// 1-based average ranks by counting smaller and equal values.
std::vector<double> ranks(const std::vector<double>& v);

/// Betweenness by enumerating every simple path between every pair (n <= 8).
/// Non-positive off-diagonal entries mean "no edge".
std::vector<double> betweenness(const Matrix& distance);

/// Q_signed straight from the double-sum definition of Newman modularity.
double signed_modularity(const Matrix& weights, const std::vector<int>& labels);

struct BestPartition {
  std::vector<int> labels;
  double q = 0.0;
};

/// Maximizes signed_modularity over every set partition (n <= 10).
BestPartition exhaustive_signed_modularity(const Matrix& weights);

/// ARI by counting agreeing and disagreeing item pairs.
double ari(const std::vector<int>& a, const std::vector<int>& b);

/// Cophenetic matrix of naive O(n^3) UPGMA (full rescans, mean of member distances).
Matrix average_linkage_cophenetic(const Matrix& distance);

}  // namespace macroregime::oracle
