// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
// Every tolerance and sample size is pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "macroregime/correlation.hpp"
#include "macroregime/csv.hpp"
#include "macroregime/hierarchy.hpp"
#include "macroregime/leadlag.hpp"
#include "macroregime/oracles.hpp"
#include "macroregime/partition.hpp"
#include "macroregime/pipeline.hpp"
#include "macroregime/profile.hpp"
#include "macroregime/regimes.hpp"
#include "macroregime/signed_network.hpp"
#include "macroregime/strategy.hpp"
#include "macroregime/synth.hpp"
#include "test_support.hpp"

using namespace macroregime;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed checks; the first few messages go into the report line.
class Checker {
 public:
  void check(bool ok, const std::string& what) {
    ++total_;
    if (ok) return;
    ++failed_;
    if (messages_.size() < 3) messages_.push_back(what);
  }
  Outcome outcome(const std::string& summary) const {
    Outcome o{failed_ == 0, summary};
    if (failed_ > 0) {
      o.detail += "; " + std::to_string(failed_) + "/" + std::to_string(total_) + " checks failed";
      for (const auto& m : messages_) o.detail += "; " + m;
    }
    return o;
  }

 private:
  std::size_t total_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> messages_;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<int> iota_ids(std::size_t n, int first = 1) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), first);
  return v;
}

// 1 ----------------------------------------------------------------------------------

Outcome correlation_kernels() {
  constexpr std::size_t kPairs = 200, kLength = 64;
  constexpr double kSpearmanTol = 1e-12, kWeightedTol = 1e-10, kUniformTol = 1e-12, kBudgetSeconds = 5.0;
  Checker chk;
  const auto t0 = std::chrono::steady_clock::now();
  const auto ranks = recency_ranks(kLength);
  const std::vector<double> uniform(kLength, 1.0);
  Rng rng(101);
  double worst_spearman = 0.0, worst_weighted = 0.0, worst_uniform = 0.0;
  for (std::size_t p = 0; p < kPairs; ++p) {
    const auto x = testing::normal_vector(rng, kLength);
    const auto y = testing::normal_vector(rng, kLength);
    const double rho = spearman(x, y);
    const double rho_ref = oracle::pearson(oracle::ranks(x), oracle::ranks(y));
    worst_spearman = std::max(worst_spearman, std::abs(rho - rho_ref));
    const double tau = kendall(x, y);
    chk.check(tau == oracle::kendall(x, y), "kendall differs from pair enumeration at pair " + std::to_string(p));
    const double wt = weighted_kendall(x, y, ranks);
    worst_weighted = std::max(worst_weighted, std::abs(wt - oracle::weighted_kendall(x, y, ranks)));
    worst_uniform = std::max(worst_uniform, std::abs(weighted_kendall_by_weight(x, y, uniform) - tau));
  }
  const double elapsed = seconds_since(t0);
  chk.check(worst_spearman <= kSpearmanTol, "spearman error " + fmt(worst_spearman));
  chk.check(worst_weighted <= kWeightedTol, "weighted kendall error " + fmt(worst_weighted));
  chk.check(worst_uniform <= kUniformTol, "uniform-weight error " + fmt(worst_uniform));
  chk.check(elapsed < kBudgetSeconds, "runtime " + fmt(elapsed) + " s");
  return chk.outcome("200 pairs, l=64: spearman err " + fmt(worst_spearman, 2) + ", weighted kendall err " +
                     fmt(worst_weighted, 2) + ", uniform err " + fmt(worst_uniform, 2) + ", " + fmt(elapsed, 3) +
                     " s");
}

// 2 ----------------------------------------------------------------------------------

Outcome distance_and_dendrogram() {
  constexpr int kMatrices = 100, kTrees = 50, kPoints = 8;
  constexpr double kFormulaTol = 1e-15;
  Checker chk;
  Rng rng(202);
  for (int m = 0; m < kMatrices; ++m) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.index(18));
    Eigen::MatrixXd c = testing::random_correlation(rng, n, 1 + static_cast<Eigen::Index>(rng.index(4)));
    c = (0.5 * (c + c.transpose())).eval();
    const auto d = to_distance(c);
    bool ok = d.rows() == n && d.cols() == n;
    for (Eigen::Index i = 0; ok && i < n; ++i) {
      ok = ok && d(i, i) == 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        ok = ok && d(i, j) == d(j, i) && d(i, j) >= 0.0 && d(i, j) <= std::sqrt(2.0);
        // low-rank inputs put |C| a rounding error above 1
        if (i != j)
          ok = ok && std::abs(d(i, j) - std::sqrt(2.0 * (1.0 - std::min(std::abs(c(i, j)), 1.0)))) <= kFormulaTol;
      }
    }
    chk.check(ok, "distance invariants broken on matrix " + std::to_string(m));
  }
  std::size_t triples = 0;
  for (int t = 0; t < kTrees; ++t) {
    const auto d = testing::random_distance(rng, kPoints);
    const auto coph = cophenetic_matrix(average_linkage(d));
    for (Eigen::Index i = 0; i < kPoints; ++i)
      for (Eigen::Index j = 0; j < kPoints; ++j)
        for (Eigen::Index k = 0; k < kPoints; ++k) {
          ++triples;
          chk.check(coph(i, j) <= std::max(coph(i, k), coph(k, j)),
                    "ultrametric inequality fails on instance " + std::to_string(t));
        }
  }
  return chk.outcome("100 distance matrices, " + std::to_string(triples) + " ordered triples on 50 trees");
}

// 3 ----------------------------------------------------------------------------------

Outcome regime_recovery() {
  constexpr std::size_t kAssets = 20, kWindows = 150, kLength = 2 * kAssets, kStride = 20;
  constexpr double kMinAri = 0.9, kBudgetSeconds = 120.0;
  const std::uint64_t seeds[] = {1, 2, 3};
  Checker chk;
  const auto t0 = std::chrono::steady_clock::now();
  std::string summary;
  for (std::size_t k : {3u, 6u}) {
    // enough rows for exactly kWindows windows, split evenly between regimes
    const std::size_t rows = kLength + (kWindows - 1) * kStride + (kStride - 1);
    const std::size_t per_regime = rows / k;
    double worst = 1.0;
    for (auto seed : seeds) {
      const auto syn = planted_regime_panel(per_regime, random_block_specs(k, kAssets, seed), seed);
      RegimeConfig cfg;
      cfg.window = {kLength, kStride, CorrelationMethod::weighted_kendall};
      cfg.similarity = SimilarityKind::metacorrelation;
      cfg.pca = PcaRequest::variance(0.9);
      cfg.kmeans.seed = seed;
      const auto run = detect_regimes(syn.panel, cfg);
      const auto truth = window_truth(syn.row_truth, run.stack.end_rows, kLength);
      const double a = adjusted_rand_index(run.labeling.labels, truth);
      worst = std::min(worst, a);
      const std::string tag = "K=" + std::to_string(k) + " seed " + std::to_string(seed);
      chk.check(run.stack.size() == kWindows, tag + ": " + std::to_string(run.stack.size()) + " windows");
      chk.check(run.labeling.k == k, tag + ": elbow chose " + std::to_string(run.labeling.k));
      chk.check(a >= kMinAri, tag + ": ARI " + fmt(a));
      chk.check(run.embedding.explained_variance >= 0.9, tag + ": explained variance below 0.9");
    }
    summary += "K=" + std::to_string(k) + " min ARI " + fmt(worst) + ", ";
  }
  const double elapsed = seconds_since(t0);
  chk.check(elapsed < kBudgetSeconds, "runtime " + fmt(elapsed) + " s");
  return chk.outcome(summary + "3 seeds each, " + fmt(elapsed, 3) + " s");
}

// 4 ----------------------------------------------------------------------------------

Outcome sponge() {
  constexpr std::size_t kNodes = 60, kClusters = 3, kSeeds = 20, kRequiredK = 18;
  constexpr double kP = 0.8, kMinAri = 0.95, kNewmanTol = 1e-12, kOracleTol = 1e-12;
  Checker chk;
  double worst_ari = 1.0;
  std::size_t k_hits = 0;
  const std::vector<std::size_t> k_range{2, 3, 4, 5, 6, 7, 8, 9, 10};
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const auto planted = signed_sbm(kNodes, kClusters, kP, kP, seed);
    const auto p = sponge_sym(planted.graph, kClusters, {.seed = seed});
    const double a = adjusted_rand_index(p.assignment, planted.truth);
    worst_ari = std::min(worst_ari, a);
    chk.check(a >= kMinAri, "seed " + std::to_string(seed) + ": ARI " + fmt(a));
    if (select_k_by_modularity(planted.graph, k_range, {.seed = seed}).k == kClusters) ++k_hits;
  }
  chk.check(k_hits >= kRequiredK, "k=3 chosen in " + std::to_string(k_hits) + "/20");

  // all-positive graphs: signed modularity is plain Newman modularity
  Rng rng(404);
  double worst_newman = 0.0;
  for (int g = 0; g < 50; ++g) {
    const auto n = static_cast<Eigen::Index>(4 + rng.index(20));
    SignedGraph graph;
    graph.nodes = iota_ids(static_cast<std::size_t>(n));
    graph.weights = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        if (rng.bernoulli(0.5)) graph.weights(i, j) = graph.weights(j, i) = rng.uniform(0.1, 1.0);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (auto& l : labels) l = static_cast<int>(rng.index(3));
    const auto part = Partition::from_labels(graph.nodes, labels);
    worst_newman = std::max(worst_newman, std::abs(signed_modularity(graph, part) -
                                                   newman_modularity(graph.weights, part.assignment)));
  }
  chk.check(worst_newman <= kNewmanTol, "Newman equality error " + fmt(worst_newman));

  // exhaustive search over every set partition of small planted graphs
  std::size_t oracle_cases = 0;
  double worst_oracle = 0.0;
  for (std::size_t n = 6; n <= 10; ++n)
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const std::size_t k = 2 + seed % 2;
      const auto planted = signed_sbm(n, k, 1.0, 1.0, 1000 + n * 10 + seed);
      const auto rows = testing::to_rows(planted.graph.weights);
      const auto best = oracle::exhaustive_signed_modularity(rows);
      const auto sel = select_k_by_modularity(planted.graph, {2, 3, 4}, {.seed = seed});
      const double q = signed_modularity(planted.graph, sel.partition);
      const std::string tag = "n=" + std::to_string(n) + " seed " + std::to_string(seed);
      worst_oracle = std::max(worst_oracle, std::abs(q - best.q));
      chk.check(std::abs(q - best.q) <= kOracleTol, tag + ": Q " + fmt(q, 15) + " vs optimum " + fmt(best.q, 15));
      chk.check(std::abs(q - oracle::signed_modularity(rows, sel.partition.assignment)) <= kOracleTol,
                tag + ": modularity formula disagrees with the double sum");
      chk.check(oracle::ari(sel.partition.assignment, best.labels) == 1.0, tag + ": partition differs from optimum");
      ++oracle_cases;
    }
  chk.check(worst_oracle <= kOracleTol, "oracle gap " + fmt(worst_oracle));
  return chk.outcome("min ARI " + fmt(worst_ari) + " over 20 seeds, k=3 in " + std::to_string(k_hits) +
                     "/20, Newman err " + fmt(worst_newman, 2) + ", " + std::to_string(oracle_cases) +
                     " exhaustive cases n<=10 matched");
}

// 5 ----------------------------------------------------------------------------------

Outcome stability_break() {
  constexpr std::size_t kSeeds = 20, kAssets = 24, kLength = 100, kBreakRow = 1450, kRows = 3000;
  Checker chk;
  std::vector<int> before(kAssets), after(kAssets);
  for (std::size_t i = 0; i < kAssets; ++i) {
    before[i] = static_cast<int>(i / 6);  // four contiguous blocks
    after[i] = static_cast<int>(i % 3);   // three interleaved blocks
  }
  StabilityOptions opt;  // threshold 0.2, k in 2..10, lookback 4
  std::size_t hits = 0;
  std::string offsets;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    PlantedRegimeSpec spec;
    spec.seed = seed;
    spec.segments = {{0, block_correlation({before, 0.6, -0.1}), kBreakRow},
                     {1, block_correlation({after, 0.6, 0.0}), kRows - kBreakRow}};
    const auto syn = planted_regime_panel(spec);
    const auto stack = windowed_stack(syn.panel, {kLength, kLength, CorrelationMethod::weighted_kendall});
    opt.sponge.seed = seed;
    const auto series = stability_series(stack, syn.panel.asset_ids(), opt);
    // the planted break is the first window reaching past the last row of the old regime
    std::size_t t_break = 0;
    while (t_break < stack.size() && stack.end_rows[t_break] < kBreakRow) ++t_break;
    std::size_t arg = stack.size();
    for (std::size_t t = 0; t < series.values.size(); ++t)
      if (!is_missing(series.values[t]) && (arg == stack.size() || series.values[t] < series.values[arg])) arg = t;
    const auto offset = static_cast<long>(arg) - static_cast<long>(t_break);
    offsets += (offsets.empty() ? "" : ",") + std::to_string(offset);
    const bool ok = arg < stack.size() && std::labs(offset) <= static_cast<long>(opt.lookback);
    hits += ok ? 1 : 0;
    chk.check(ok, "seed " + std::to_string(seed) + ": minimum " + std::to_string(offset) + " dates from the break");
  }
  return chk.outcome(std::to_string(hits) + "/20 minima within lookback 4 of the break (offsets " + offsets + ")");
}

// 6 ----------------------------------------------------------------------------------

Outcome betweenness() {
  constexpr int kGraphs = 50;
  constexpr double kTol = 1e-12;
  Checker chk;
  Rng rng(606);
  double worst = 0.0;
  for (int g = 0; g < kGraphs; ++g) {
    const auto n = static_cast<Eigen::Index>(3 + rng.index(6));
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        if (rng.bernoulli(0.6)) d(i, j) = d(j, i) = rng.uniform(0.1, 1.1);
    const auto got = betweenness_centrality(d);
    const auto want = oracle::betweenness(testing::to_rows(d));
    for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
    chk.check(got.size() == want.size(), "size mismatch on graph " + std::to_string(g));
  }
  chk.check(worst <= kTol, "oracle error " + fmt(worst));

  Eigen::MatrixXd star = Eigen::MatrixXd::Zero(6, 6);
  for (int leaf = 1; leaf < 6; ++leaf) star(0, leaf) = star(leaf, 0) = 1.0;
  const auto s = betweenness_centrality(star);
  chk.check(s[0] == 10.0, "star hub " + fmt(s[0]));
  for (int leaf = 1; leaf < 6; ++leaf) chk.check(s[static_cast<std::size_t>(leaf)] == 0.0, "star leaf not zero");

  Eigen::MatrixXd line = Eigen::MatrixXd::Zero(5, 5);
  for (int i = 0; i + 1 < 5; ++i) line(i, i + 1) = line(i + 1, i) = 0.5;
  chk.check(betweenness_centrality(line) == std::vector<double>{0.0, 3.0, 4.0, 3.0, 0.0}, "line values");
  return chk.outcome("50 random graphs n<=8, max oracle error " + fmt(worst, 2) + "; star and line exact");
}

// 7 ----------------------------------------------------------------------------------

Outcome granger() {
  constexpr std::size_t kPairs = 500, kRows = 250, kSeeds = 100, kRequired = 95;
  constexpr double kAlpha = 0.05, kSizeTol = 0.02;
  Checker chk;
  // size: every ordered pair of an i.i.d. panel is one test; 500 tests from 25 independent panels of 5 assets
  std::size_t significant = 0, tests = 0;
  for (std::uint64_t seed = 0; tests < kPairs; ++seed) {
    const auto p = testing::noise_panel(kRows, 5, 7000 + seed);
    const std::vector<RowSpan> spans{{0, kRows}};
    for (std::size_t i = 0; i < 5 && tests < kPairs; ++i)
      for (std::size_t j = 0; j < 5 && tests < kPairs; ++j) {
        if (i == j) continue;
        significant += granger_pair(p.values, i, j, spans, 1, kAlpha).significant ? 1 : 0;
        ++tests;
      }
  }
  const double rate = static_cast<double>(significant) / static_cast<double>(tests);
  chk.check(std::abs(rate - kAlpha) <= kSizeTol, "size " + fmt(rate));

  // power: leader cluster -> follower cluster at lag 5. Longer chains add two-hop relations at twice the lag,
  // which the count-based lag choice rewards, so the chain here is a single link.
  std::size_t lag_hits = 0, edge_hits = 0, both = 0;
  double recall_sum = 0.0;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    PlantedLeadLagSpec spec;
    spec.cluster_sizes = {10, 10};
    spec.lag = 5;
    spec.coupling = 0.8;
    spec.noise = 1.2;
    spec.rows = 500;
    spec.seed = seed;
    const auto syn = planted_leadlag_panel(spec);
    const std::vector<RowSpan> spans{{0, spec.rows}};
    const auto opt = optimal_lag(syn.panel.values, spans, kDefaultLagGrid, {.alpha = kAlpha});
    const bool lag_ok = opt.lag == 5;
    // a cluster edge a -> b counts as recovered when a strict majority of its asset pairs are significant in the
    // planted direction
    bool edges_ok = true;
    const auto& m = opt.matrix.strengths;
    for (const auto& [a, b] : syn.cluster_edges) {
      std::size_t forward = 0, pairs = 0;
      for (std::size_t i = 0; i < syn.cluster_of_asset.size(); ++i)
        for (std::size_t j = 0; j < syn.cluster_of_asset.size(); ++j) {
          if (syn.cluster_of_asset[i] != a || syn.cluster_of_asset[j] != b) continue;
          ++pairs;
          const double v = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          forward += v > 0.0 ? 1 : 0;
        }
      recall_sum += static_cast<double>(forward) / static_cast<double>(pairs);
      edges_ok = edges_ok && 2 * forward > pairs;
    }
    lag_hits += lag_ok ? 1 : 0;
    edge_hits += edges_ok ? 1 : 0;
    both += lag_ok && edges_ok ? 1 : 0;
  }
  chk.check(both >= kRequired, "lag 5 with edges recovered in " + std::to_string(both) + "/100");
  return chk.outcome("size " + fmt(rate) + " over " + std::to_string(tests) + " tests; optimal lag 5 in " +
                     std::to_string(lag_hits) + "/100, chain edges in " + std::to_string(edge_hits) +
                     "/100 (mean recall " + fmt(recall_sum / static_cast<double>(kSeeds), 3) + "), both in " +
                     std::to_string(both) + "/100");
}

// 8 ----------------------------------------------------------------------------------

Outcome hermitian() {
  constexpr std::size_t kSeeds = 20, kBlock = 10;
  constexpr double kEdge = 0.8, kNoise = 0.1, kMinCyclicAri = 0.9;
  Checker chk;
  std::size_t exact = 0;
  double worst_cyclic = 1.0;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    std::vector<int> truth;
    const auto m = planted_flow_matrix({kBlock, kBlock}, {{0, 1}}, kEdge, kNoise, seed, &truth);
    const auto c = hermitian_cluster(m, iota_ids(2 * kBlock), 2, seed);
    const bool ok = adjusted_rand_index(c.partition.assignment, truth) == 1.0 &&
                    c.leading() == c.partition.assignment[0];
    exact += ok ? 1 : 0;
    chk.check(ok, "two-block seed " + std::to_string(seed));

    const auto cyc = planted_flow_matrix({kBlock, kBlock, kBlock}, {{0, 1}, {1, 2}, {2, 0}}, kEdge, kNoise, seed, &truth);
    const double a = adjusted_rand_index(hermitian_cluster(cyc, iota_ids(3 * kBlock), 3, seed).partition.assignment, truth);
    worst_cyclic = std::min(worst_cyclic, a);
    chk.check(a >= kMinCyclicAri, "cyclic seed " + std::to_string(seed) + ": ARI " + fmt(a));
  }
  return chk.outcome("two-block exact with A leading " + std::to_string(exact) + "/20; cyclic min ARI " +
                     fmt(worst_cyclic) + " over 20 seeds");
}

// 9 ----------------------------------------------------------------------------------

// Conditional entropies from the contingency table, written out longhand.
VMeasure hand_v_measure(const std::vector<int>& clusters, const std::vector<int>& classes, double beta) {
  const double n = static_cast<double>(classes.size());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> nc, nk;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    joint[{classes[i], clusters[i]}] += 1.0;
    nc[classes[i]] += 1.0;
    nk[clusters[i]] += 1.0;
  }
  double h_c = 0.0, h_k = 0.0, h_c_given_k = 0.0, h_k_given_c = 0.0;
  for (const auto& [c, v] : nc) h_c -= v / n * std::log(v / n);
  for (const auto& [k, v] : nk) h_k -= v / n * std::log(v / n);
  for (const auto& [ck, v] : joint) {
    h_c_given_k -= v / n * std::log(v / nk[ck.second]);
    h_k_given_c -= v / n * std::log(v / nc[ck.first]);
  }
  VMeasure r;
  r.homogeneity = h_c == 0.0 ? 1.0 : 1.0 - h_c_given_k / h_c;
  r.completeness = h_k == 0.0 ? 1.0 : 1.0 - h_k_given_c / h_k;
  const double den = beta * r.homogeneity + r.completeness;
  r.v = den == 0.0 ? 0.0 : (1.0 + beta) * r.homogeneity * r.completeness / den;
  return r;
}

Outcome v_measure_cases() {
  constexpr double kTol = 1e-12;
  struct Case {
    std::vector<int> clusters, classes;
    double beta, v;  // v as produced by an independent reference implementation
  };
  const Case cases[] = {
      {{0, 0, 0, 1}, {0, 0, 1, 1}, 1.0, 0.34371101848545077},
      {{0, 0, 0, 1}, {0, 0, 1, 1}, 0.5, 0.33217431077085646},
      {{0, 1, 0, 1}, {0, 0, 1, 1}, 1.0, 0.0},
      {{0, 0, 1, 1, 2, 2}, {0, 0, 0, 1, 1, 1}, 1.0, 0.5158037429793889},
      {{0, 0, 1, 1, 2, 2}, {0, 0, 0, 1, 1, 1}, 0.5, 0.5578858913022597},
      {{0, 0, 0, 0}, {0, 1, 2, 3}, 1.0, 0.0},
      {{0, 1, 2, 3}, {0, 0, 0, 0}, 1.0, 0.0},
      {{0, 0, 1, 1, 1, 2}, {0, 1, 1, 2, 2, 2}, 1.0, 0.45688765264105763},
      {{1, 1, 0, 0, 2, 2, 2}, {0, 0, 1, 2, 2, 0, 1}, 1.0, 0.3800920111324275},
      {{0, 0, 1, 1, 0, 0, 1, 1}, {0, 0, 0, 0, 1, 1, 1, 1}, 1.0, 0.0},
  };
  Checker chk;
  double worst = 0.0;
  int idx = 0;
  for (const auto& c : cases) {
    const auto got = v_measure(c.clusters, c.classes, c.beta);
    const auto hand = hand_v_measure(c.clusters, c.classes, c.beta);
    const double err = std::max({std::abs(got.homogeneity - hand.homogeneity),
                                 std::abs(got.completeness - hand.completeness), std::abs(got.v - hand.v),
                                 std::abs(got.v - c.v)});
    worst = std::max(worst, err);
    chk.check(err <= kTol, "case " + std::to_string(idx) + " error " + fmt(err));
    ++idx;
  }
  const std::vector<int> classes{0, 0, 1, 1, 2, 2, 2};
  chk.check(v_measure(std::vector<int>{5, 5, 3, 3, 1, 1, 1}, classes).v == 1.0, "perfect clustering is not 1");
  chk.check(v_measure(std::vector<int>(7, 0), classes).v == 0.0, "single cluster is not 0");
  return chk.outcome("10 cases, max error " + fmt(worst, 2) + "; perfect = 1, single cluster = 0");
}

// 10 ---------------------------------------------------------------------------------

Outcome strategy() {
  constexpr std::size_t kSeeds = 50;
  constexpr double kMaxP = 0.01, kSignalTol = 1e-15;
  Checker chk;
  std::vector<double> excess;
  std::size_t trades = 0;
  double strat_sum = 0.0, bench_sum = 0.0;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    PlantedLeadLagSpec spec;
    spec.cluster_sizes = {5, 5};
    spec.lag = 5;
    spec.coupling = 0.8;
    spec.noise = 0.2;
    spec.rows = 500;
    spec.seed = 5000 + seed;
    const auto syn = planted_leadlag_panel(spec);
    const auto& panel = syn.panel;
    const std::vector<RowSpan> spans{{0, panel.rows()}};
    const auto opt = optimal_lag(panel.values, spans);
    std::vector<int> classes;
    for (const auto& a : panel.assets) classes.push_back(static_cast<int>(a.asset_class));
    const auto clustering = select_k_by_vmeasure(opt.matrix.strengths, panel.asset_ids(), classes, {2, 3, 4, 5},
                                                 1.0, seed);
    RegimeSignal signal{0, spans, clustering};
    signal.clustering.lag = opt.lag;
    const auto report = run_leadlag_strategy(panel, {signal});
    const auto& r = report.regimes.front();
    if (is_missing(r.strategy_mean_return) || is_missing(r.benchmark_mean_return)) {
      chk.check(false, "seed " + std::to_string(seed) + " made no trades");
      continue;
    }
    excess.push_back(r.strategy_mean_return - r.benchmark_mean_return);
    strat_sum += r.strategy_mean_return;
    bench_sum += r.benchmark_mean_return;

    // every trade: the signal uses only rows strictly before the holding period
    std::map<int, std::size_t> column;
    for (std::size_t j = 0; j < panel.cols(); ++j) column[panel.assets[j].id] = j;
    std::vector<std::size_t> leaders;
    for (std::size_t j = 0; j < panel.cols(); ++j)
      if (clustering.partition.assignment[j] == clustering.leading()) leaders.push_back(j);
    for (const auto& t : report.trades) {
      ++trades;
      bool ok = t.signal_last_row + 1 == t.entry_row && t.entry_row >= r.lag &&
                t.entry_row + r.lag <= panel.rows() && panel.dates[t.signal_last_row] == t.open_date &&
                panel.dates[t.entry_row + r.lag - 1] == t.close_date;
      double signal = 0.0;
      for (std::size_t row = t.entry_row - r.lag; row < t.entry_row; ++row)
        for (auto j : leaders) signal += panel.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j));
      signal /= static_cast<double>(leaders.size() * r.lag);
      ok = ok && std::abs(signal - t.signal_value) <= kSignalTol * std::max(1.0, std::abs(signal)) &&
           t.direction == (signal > 0.0 ? 1 : -1);
      for (int id : t.assets)
        ok = ok && clustering.partition.assignment[column.at(id)] == clustering.lagging();
      chk.check(ok, "lookahead or bookkeeping error in a trade of seed " + std::to_string(seed));
    }
  }
  const double n = static_cast<double>(excess.size());
  const double mean = std::accumulate(excess.begin(), excess.end(), 0.0) / n;
  double ss = 0.0;
  for (double e : excess) ss += (e - mean) * (e - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double t_stat = mean / (sd / std::sqrt(n));
  const boost::math::students_t dist(n - 1.0);
  const double p = boost::math::cdf(boost::math::complement(dist, t_stat));
  chk.check(strat_sum > bench_sum, "strategy mean does not exceed the benchmark");
  chk.check(p < kMaxP, "one-sided p " + fmt(p));
  return chk.outcome("mean strategy " + fmt(strat_sum / n) + " vs benchmark " + fmt(bench_sum / n) + ", t=" +
                     fmt(t_stat) + ", p=" + fmt(p, 3) + " over " + std::to_string(excess.size()) + " seeds; " +
                     std::to_string(trades) + " trades checked for lookahead");
}

// 11 ---------------------------------------------------------------------------------

std::map<std::string, std::string> csv_outputs(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().extension() == ".csv")
      out[fs::relative(e.path(), root).string()] = csv::read_file(e.path());
  return out;
}

Outcome determinism() {
  Checker chk;
  testing::TempDir dir("acceptance");
  const auto syn = planted_regime_panel(150, random_block_specs(3, 12, 11), 11);
  write_levels_csv(dir.path() / "levels.csv", levels_from_returns(syn.panel));
  write_meta_csv(dir.path() / "meta.csv", syn.panel.assets);
  const nlohmann::json cfg = {{"data", {{"levels_path", "levels.csv"}, {"meta_path", "meta.csv"}}},
                              {"window", {{"length", 24}, {"stride", 12}}},
                              {"leadlag", {{"lag_grid", {1, 2, 5}}}}};
  std::ofstream(dir.path() / "config.json") << cfg.dump(2);
  const auto config = load_config(dir.path() / "config.json");

  std::vector<std::map<std::string, std::string>> outputs;
  for (const auto& [name, threads] : std::vector<std::pair<std::string, int>>{{"a", 1}, {"b", 1}, {"c", 8}}) {
    run_pipeline(config, {.out = dir.path() / name, .seed = 17, .threads = threads});
    outputs.push_back(csv_outputs(dir.path() / name));
  }
  chk.check(outputs[0].size() > 20, "only " + std::to_string(outputs[0].size()) + " CSV files written");
  const auto compare = [&](std::size_t x, std::size_t y, const std::string& what) {
    chk.check(outputs[x].size() == outputs[y].size(), what + ": different file sets");
    for (const auto& [file, bytes] : outputs[x]) {
      const auto it = outputs[y].find(file);
      chk.check(it != outputs[y].end() && it->second == bytes, what + ": " + file + " differs");
    }
  };
  compare(0, 1, "repeat run");
  compare(0, 2, "1 vs 8 threads");
  return chk.outcome(std::to_string(outputs[0].size()) +
                     " CSV files byte-identical across two runs and across 1 vs 8 threads");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"correlation kernels", correlation_kernels},
      {"distance and dendrogram", distance_and_dendrogram},
      {"regime recovery", regime_recovery},
      {"SPONGE communities", sponge},
      {"stability break detection", stability_break},
      {"betweenness", betweenness},
      {"Granger size and power", granger},
      {"Hermitian lead-lag clustering", hermitian},
      {"v-measure", v_measure_cases},
      {"lead-lag strategy", strategy},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] %2zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
