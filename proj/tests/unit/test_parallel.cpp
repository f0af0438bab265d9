#include <doctest.h>

#include "macroregime/correlation.hpp"
#include "macroregime/embedding.hpp"
#include "macroregime/leadlag.hpp"
#include "macroregime/signed_network.hpp"
#include "macroregime/similarity.hpp"
#include "macroregime/synth.hpp"
#include "test_support.hpp"

using namespace macroregime;

namespace {

// Runs `fn` under each thread count and checks every result equals the first.
template <class Fn, class Eq>
void same_across_threads(Fn fn, Eq eq) {
  const int before = thread_count();
  set_thread_count(1);
  const auto reference = fn();
  for (int t : {2, 4, 8}) {
    set_thread_count(t);
    CHECK(eq(reference, fn()));
  }
  set_thread_count(before);
}

std::vector<int> ids(std::size_t n) {
  std::vector<int> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<int>(i) + 1;
  return v;
}

bool same_stack(const CorrelationStack& a, const CorrelationStack& b) {
  if (a.size() != b.size() || a.end_rows != b.end_rows) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.matrices[i] != b.matrices[i]) return false;
  return true;
}

}  // namespace

TEST_SUITE("parallel") {

TEST_CASE("windowed stack matches the serial reference") {
  const auto p = testing::noise_panel(300, 8, 1);
  for (auto m : {CorrelationMethod::pearson, CorrelationMethod::spearman, CorrelationMethod::kendall,
                 CorrelationMethod::weighted_kendall}) {
    const WindowSpec s{40, 7, m};
    CHECK(same_stack(windowed_stack(p, s), serial::windowed_stack(p, s)));
    same_across_threads([&] { return windowed_stack(p, s); }, same_stack);
  }
}

TEST_CASE("similarity matches the serial reference") {
  const auto p = testing::noise_panel(300, 8, 2);
  const auto st = windowed_stack(p, {24, 6, CorrelationMethod::pearson});
  auto eq = [](const TimeSimilarityMatrix& a, const TimeSimilarityMatrix& b) {
    return a.values.cwiseEqual(b.values).all() || (a.values.array().isNaN() == b.values.array().isNaN()).all();
  };
  CHECK(metacorrelation_similarity(st).values == serial::metacorrelation_similarity(st).values);
  CHECK(cophenetic_similarity(st).values == serial::cophenetic_similarity(st).values);
  same_across_threads([&] { return cophenetic_similarity(st); }, eq);
}

TEST_CASE("kmeans matches the serial reference") {
  testing::Rng rng(3);
  const auto x = testing::normal_matrix(rng, 200, 3);
  for (std::size_t k : {2, 5, 9}) {
    const auto a = kmeans(x, k, {.seed = 4});
    const auto b = serial::kmeans(x, k, {.seed = 4});
    CHECK(a.labels == b.labels);
    CHECK(a.inertia == b.inertia);
    CHECK(a.centroids == b.centroids);
    same_across_threads([&] { return kmeans(x, k, {.seed = 4}); },
                        [](const KMeansResult& u, const KMeansResult& v) { return u.labels == v.labels; });
  }
}

TEST_CASE("stability series matches the serial reference") {
  const auto syn = planted_regime_panel(120, random_block_specs(2, 10, 5), 5);
  const auto st = windowed_stack(syn.panel, {20, 10, CorrelationMethod::pearson});
  StabilityOptions o;
  o.k_range = {2, 3, 4};
  o.lookback = 2;
  auto eq = [](const StabilitySeries& a, const StabilitySeries& b) {
    if (a.ks != b.ks || a.values.size() != b.values.size()) return false;
    for (std::size_t i = 0; i < a.values.size(); ++i)
      if (!(a.values[i] == b.values[i] || (is_missing(a.values[i]) && is_missing(b.values[i])))) return false;
    return true;
  };
  CHECK(eq(stability_series(st, ids(10), o), serial::stability_series(st, ids(10), o)));
  same_across_threads([&] { return stability_series(st, ids(10), o); }, eq);
}

TEST_CASE("lead-lag matrix matches the per-pair serial reference") {
  PlantedLeadLagSpec s;
  s.cluster_sizes = {4, 4, 4};
  s.lag = 2;
  s.rows = 400;
  s.seed = 6;
  const auto syn = planted_leadlag_panel(s);
  const std::vector<RowSpan> spans{{0, 180}, {200, 400}};
  for (std::size_t lag : {1, 2, 5}) {
    const auto a = leadlag_matrix(syn.panel.values, spans, lag);
    const auto b = serial::leadlag_matrix(syn.panel.values, spans, lag);
    CHECK(a.significant_count == b.significant_count);
    CHECK((a.strengths - b.strengths).cwiseAbs().maxCoeff() < 1e-9);
    same_across_threads([&] { return leadlag_matrix(syn.panel.values, spans, lag); },
                        [](const LeadLagMatrix& u, const LeadLagMatrix& v) { return u.strengths == v.strengths; });
  }
}

}  // TEST_SUITE
