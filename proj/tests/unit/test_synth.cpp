#include <doctest.h>

#include <cmath>

#include "macroregime/correlation.hpp"
#include "macroregime/synth.hpp"
#include "test_support.hpp"

using namespace macroregime;

TEST_SUITE("synth") {

TEST_CASE("rng is reproducible and roughly standard normal") {
  Rng a(42), b(42);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
  Rng c(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(c.index(7) < 7);
  }
}

TEST_CASE("block correlation entries") {
  const auto c = block_correlation({{0, 0, 1}, 0.6, -0.2});
  CHECK(c(0, 1) == 0.6);
  CHECK(c(0, 2) == -0.2);
  CHECK(c.diagonal().isOnes());
}

TEST_CASE("non positive definite targets are rejected with a suggestion") {
  PlantedRegimeSpec s;
  s.segments.push_back({0, block_correlation({{0, 1, 2}, 1.0, -0.9}), 50});
  CHECK_THROWS_AS(planted_regime_panel(s), PreconditionError);
  const auto fixed = nearest_correlation(block_correlation({{0, 1, 2}, 1.0, -0.9}));
  CHECK(fixed.diagonal().isOnes(1e-12));
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(fixed).eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("one regime is a stationary panel") {
  const auto specs = random_block_specs(1, 6, 3);
  const auto syn = planted_regime_panel(400, specs, 3);
  CHECK(syn.panel.rows() == 400);
  CHECK(std::all_of(syn.row_truth.begin(), syn.row_truth.end(), [](int r) { return r == 0; }));
  CHECK_NOTHROW(syn.panel.validate());
}

TEST_CASE("sample correlation follows the planted blocks") {
  const BlockSpec b{{0, 0, 0, 1, 1, 1}, 0.7, -0.2};
  const auto syn = planted_regime_panel(4000, {b}, 5);
  const WindowSpec w{4000, 1, CorrelationMethod::pearson};
  const auto c = window_matrix(syn.panel, 3999, w);
  CHECK(std::abs(c(0, 1) - 0.7) < 0.05);
  CHECK(std::abs(c(0, 4) + 0.2) < 0.05);
}

TEST_CASE("three distinct blocks give a block-diagonal metacorrelation structure") {
  const auto specs = random_block_specs(3, 10, 6);
  for (const auto& s : specs) {
    CHECK(s.within >= 0.5);
    CHECK(s.within <= 0.8);
    CHECK(s.between >= -0.3);
    CHECK(s.between <= 0.2);
    const auto c = block_correlation(s);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues().minCoeff() > 1e-3);
  }
  for (std::size_t a = 0; a < specs.size(); ++a)
    for (std::size_t b = a + 1; b < specs.size(); ++b) {
      const auto x = condensed(block_correlation(specs[a])), y = condensed(block_correlation(specs[b]));
      CHECK(std::abs(pearson(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                             std::span<const double>(y.data(), static_cast<std::size_t>(y.size()))))
            <= 0.2 + 1e-12);
    }
  CHECK_THROWS_AS(random_block_specs(40, 4, 1), PreconditionError);
  const auto syn = planted_regime_panel(200, specs, 6);
  CHECK(syn.row_truth[0] == 0);
  CHECK(syn.row_truth[200] == 1);
  CHECK(syn.row_truth[599] == 2);
}

TEST_CASE("fixed seed gives a bit-identical panel") {
  const auto a = planted_regime_panel(100, random_block_specs(2, 5, 9), 9);
  const auto b = planted_regime_panel(100, random_block_specs(2, 5, 9), 9);
  CHECK(a.panel.values == b.panel.values);
  CHECK(a.panel.dates == b.panel.dates);
  PlantedLeadLagSpec s;
  s.seed = 4;
  CHECK(planted_leadlag_panel(s).panel.values == planted_leadlag_panel(s).panel.values);
  CHECK(signed_sbm(20, 2, 0.5, 0.5, 1).graph.weights == signed_sbm(20, 2, 0.5, 0.5, 1).graph.weights);
}

TEST_CASE("window truth takes the majority regime") {
  const std::vector<int> rows{0, 0, 0, 1, 1, 1, 1, 2};
  CHECK(window_truth(rows, {3, 5, 7}, 4) == std::vector<int>{0, 1, 1});
  CHECK(window_truth({0, 0, 1, 1}, {3}, 4) == std::vector<int>{1});
}

TEST_CASE("synthetic metadata") {
  const auto m = synthetic_assets(5);
  CHECK(m[0].id == 1);
  CHECK(m[0].name == "A01");
  CHECK(m[1].asset_class == AssetClass::commodity);
  CHECK(m[4].asset_class == AssetClass::equity);
}

TEST_CASE("vanishing coupling gives independent clusters") {
  PlantedLeadLagSpec s;
  s.coupling = 0.0;
  CHECK_THROWS_AS(planted_leadlag_panel(s), PreconditionError);
  s.coupling = 1e-9;
  s.noise = 1.0;
  s.rows = 3000;
  s.lag = 1;
  const auto syn = planted_leadlag_panel(s);
  double max_cross = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 5; j < 10; ++j) {
      const auto x = syn.panel.values.col(static_cast<Eigen::Index>(i));
      Eigen::VectorXd y = syn.panel.values.col(static_cast<Eigen::Index>(j));
      const Eigen::VectorXd xl = x.head(2999), yl = y.tail(2999);
      max_cross = std::max(max_cross, std::abs(pearson(std::span<const double>(xl.data(), 2999),
                                                       std::span<const double>(yl.data(), 2999))));
    }
  CHECK(max_cross < 0.1);
}

TEST_CASE("planted lead-lag follows its parent after the lag") {
  PlantedLeadLagSpec s;
  s.cluster_sizes = {3, 3};
  s.lag = 2;
  s.coupling = 1.0;
  s.noise = 0.0;
  s.rows = 300;
  const auto syn = planted_leadlag_panel(s);
  CHECK(syn.cluster_of_asset == std::vector<int>{0, 0, 0, 1, 1, 1});
  CHECK(syn.cluster_edges == std::vector<std::pair<int, int>>{{0, 1}});
  // noiseless followers are identical to each other and proportional to the lagged parent sum
  const auto& v = syn.panel.values;
  CHECK((v.col(3) - v.col(4)).cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::VectorXd parent = v.leftCols(3).rowwise().sum();
  const Eigen::VectorXd follower = v.col(3);
  const Eigen::VectorXd p = parent.head(298), f = follower.tail(298);
  CHECK(pearson(std::span<const double>(p.data(), 298), std::span<const double>(f.data(), 298)) > 0.999);
}

TEST_CASE("signed SBM weights") {
  const auto g = signed_sbm(30, 3, 1.0, 1.0, 2);
  for (Eigen::Index i = 0; i < 30; ++i)
    for (Eigen::Index j = 0; j < 30; ++j) {
      if (i == j) continue;
      const bool same = g.truth[static_cast<std::size_t>(i)] == g.truth[static_cast<std::size_t>(j)];
      CHECK(g.graph.weights(i, j) == (same ? 1.0 : -1.0));
    }
}

TEST_CASE("planted flow matrix is skew-symmetric") {
  std::vector<int> truth;
  const auto m = planted_flow_matrix({4, 4}, {{0, 1}}, 1.0, 0.0, 1, &truth);
  CHECK((m + m.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(m(0, 5) == 1.0);
  CHECK(m(0, 1) == 0.0);
  CHECK(truth == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1});
}

}  // TEST_SUITE
