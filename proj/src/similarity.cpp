#include "macroregime/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "macroregime/hierarchy.hpp"

namespace macroregime {

namespace {

// Centred, unit-norm copy so that Pearson correlation becomes a dot product.
// Returns false for a constant vector.
bool standardize(const Eigen::VectorXd& v, Eigen::VectorXd& out) {
  out = v.array() - v.mean();
  const double norm = out.norm();
  if (!(norm > 0.0) || (v.array() == v(0)).all()) return false;
  out /= norm;
  return true;
}

double unit_clamp(double v) { return std::clamp(v, -1.0, 1.0); }

void check_stack(const CorrelationStack& stack) {
  if (stack.size() < 2) throw PreconditionError("similarity needs a stack of at least 2 matrices");
  if (stack.asset_count() < 3)
    throw PreconditionError("similarity needs at least 3 assets (condensed vectors of length >= 3)");
}

struct MetaInputs {
  std::vector<Eigen::VectorXd> z;
};

MetaInputs meta_inputs(const CorrelationStack& stack) {
  check_stack(stack);
  MetaInputs in;
  in.z.resize(stack.size());
  for (std::size_t a = 0; a < stack.size(); ++a)
    if (!standardize(condensed(stack.matrices[a]), in.z[a]))
      throw UndefinedCorrelation("metacorrelation undefined: correlation matrix at " +
                                 stack.end_dates[a].to_string() + " has constant off-diagonal entries");
  return in;
}

void meta_row(const MetaInputs& in, std::size_t a, Eigen::MatrixXd& s) {
  const auto ia = static_cast<Eigen::Index>(a);
  s(ia, ia) = 1.0;
  for (std::size_t b = a + 1; b < in.z.size(); ++b) {
    const auto ib = static_cast<Eigen::Index>(b);
    const double v = unit_clamp(in.z[a].dot(in.z[b]));
    s(ia, ib) = v;
    s(ib, ia) = v;
  }
}

struct CopheneticInputs {
  std::vector<Eigen::VectorXd> zdist;
  std::vector<Eigen::VectorXd> zcoph;
  std::vector<bool> ok;
};

void cophenetic_prepare(const CorrelationStack& stack, std::size_t a, CopheneticInputs& in) {
  const auto dist = to_distance(stack.matrices[a]);
  const auto coph = cophenetic_condensed(average_linkage(dist));
  in.ok[a] = standardize(condensed(dist), in.zdist[a]) && standardize(coph, in.zcoph[a]);
}

void cophenetic_row(const CopheneticInputs& in, std::size_t a, Eigen::MatrixXd& s) {
  const auto ia = static_cast<Eigen::Index>(a);
  s(ia, ia) = in.ok[a] ? unit_clamp(in.zcoph[a].dot(in.zdist[a])) : kMissing;
  for (std::size_t b = a + 1; b < in.ok.size(); ++b) {
    const auto ib = static_cast<Eigen::Index>(b);
    double v = kMissing;
    if (in.ok[a] && in.ok[b])
      v = unit_clamp(0.5 * (in.zcoph[a].dot(in.zdist[b]) + in.zcoph[b].dot(in.zdist[a])));
    s(ia, ib) = v;
    s(ib, ia) = v;
  }
}

TimeSimilarityMatrix shell(const CorrelationStack& stack, SimilarityKind kind) {
  TimeSimilarityMatrix out;
  out.dates = stack.end_dates;
  out.kind = kind;
  const auto n = static_cast<Eigen::Index>(stack.size());
  out.values = Eigen::MatrixXd::Zero(n, n);
  return out;
}

void report_degenerate(const CorrelationStack& stack, const CopheneticInputs& in, Diagnostics* diag) {
  for (std::size_t a = 0; a < in.ok.size(); ++a)
    if (!in.ok[a])
      warn(diag, "cophenetic similarity undefined at " + stack.end_dates[a].to_string() +
                     " (all condensed distances equal)");
}

}  // namespace

std::string to_string(SimilarityKind k) {
  return k == SimilarityKind::cophenetic ? "cophenetic" : "metacorrelation";
}

SimilarityKind parse_similarity_kind(std::string_view text) {
  if (text == "cophenetic") return SimilarityKind::cophenetic;
  if (text == "metacorrelation") return SimilarityKind::metacorrelation;
  throw ParseError("unknown similarity kind '" + std::string(text) + "'");
}

TimeSimilarityMatrix metacorrelation_similarity(const CorrelationStack& stack) {
  const auto in = meta_inputs(stack);
  auto out = shell(stack, SimilarityKind::metacorrelation);
  const auto n = static_cast<std::ptrdiff_t>(stack.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t a = 0; a < n; ++a) meta_row(in, static_cast<std::size_t>(a), out.values);
  return out;
}

TimeSimilarityMatrix cophenetic_similarity(const CorrelationStack& stack, Diagnostics* diag) {
  check_stack(stack);
  CopheneticInputs in{std::vector<Eigen::VectorXd>(stack.size()), std::vector<Eigen::VectorXd>(stack.size()),
                      std::vector<bool>(stack.size(), false)};
  const auto n = static_cast<std::ptrdiff_t>(stack.size());
  // vector<bool> packs bits; collect flags separately to keep writes independent
  std::vector<char> ok(stack.size(), 0);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t a = 0; a < n; ++a) {
    const auto k = static_cast<std::size_t>(a);
    const auto dist = to_distance(stack.matrices[k]);
    const auto coph = cophenetic_condensed(average_linkage(dist));
    ok[k] = standardize(condensed(dist), in.zdist[k]) && standardize(coph, in.zcoph[k]);
  }
  for (std::size_t k = 0; k < ok.size(); ++k) in.ok[k] = ok[k] != 0;
  report_degenerate(stack, in, diag);

  auto out = shell(stack, SimilarityKind::cophenetic);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t a = 0; a < n; ++a) cophenetic_row(in, static_cast<std::size_t>(a), out.values);
  return out;
}

TimeSimilarityMatrix similarity(const CorrelationStack& stack, SimilarityKind kind, Diagnostics* diag) {
  return kind == SimilarityKind::cophenetic ? cophenetic_similarity(stack, diag)
                                            : metacorrelation_similarity(stack);
}

namespace serial {

TimeSimilarityMatrix metacorrelation_similarity(const CorrelationStack& stack) {
  const auto in = meta_inputs(stack);
  auto out = shell(stack, SimilarityKind::metacorrelation);
  for (std::size_t a = 0; a < stack.size(); ++a) meta_row(in, a, out.values);
  return out;
}

TimeSimilarityMatrix cophenetic_similarity(const CorrelationStack& stack, Diagnostics* diag) {
  check_stack(stack);
  CopheneticInputs in{std::vector<Eigen::VectorXd>(stack.size()), std::vector<Eigen::VectorXd>(stack.size()),
                      std::vector<bool>(stack.size(), false)};
  for (std::size_t a = 0; a < stack.size(); ++a) cophenetic_prepare(stack, a, in);
  report_degenerate(stack, in, diag);
  auto out = shell(stack, SimilarityKind::cophenetic);
  for (std::size_t a = 0; a < stack.size(); ++a) cophenetic_row(in, a, out.values);
  return out;
}

}  // namespace serial

}  // namespace macroregime
