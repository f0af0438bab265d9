#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "macroregime/common.hpp"
#include "macroregime/correlation.hpp"

namespace macroregime {

enum class SimilarityKind { cophenetic, metacorrelation };

std::string to_string(SimilarityKind k);
SimilarityKind parse_similarity_kind(std::string_view text);

/// Similarity between window-end dates. Symmetric, entries in [-1, 1];
/// undefined entries hold kMissing.
struct TimeSimilarityMatrix {
  std::vector<Date> dates;
  Eigen::MatrixXd values;
  SimilarityKind kind = SimilarityKind::metacorrelation;
};

/// sim(a, b) = mean of corr(coph(a), D(b)) and corr(coph(b), D(a)), where
/// coph(x) are the average-linkage cophenetic distances of date x and D(x)
/// its condensed distance vector. The diagonal is each date's own cophenetic
/// correlation. Degenerate (constant) vectors give kMissing plus a warning.
TimeSimilarityMatrix cophenetic_similarity(const CorrelationStack& stack, Diagnostics* diag = nullptr);

/// sim(a, b) = Pearson correlation of the condensed correlation matrices; diagonal 1.
TimeSimilarityMatrix metacorrelation_similarity(const CorrelationStack& stack);

TimeSimilarityMatrix similarity(const CorrelationStack& stack, SimilarityKind kind,
                                Diagnostics* diag = nullptr);

namespace serial {
TimeSimilarityMatrix cophenetic_similarity(const CorrelationStack& stack, Diagnostics* diag = nullptr);
TimeSimilarityMatrix metacorrelation_similarity(const CorrelationStack& stack);
}  // namespace serial

}  // namespace macroregime
