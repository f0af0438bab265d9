#include "macroregime/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "macroregime/correlation.hpp"
#include "macroregime/csv.hpp"

namespace macroregime {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  do u = uniform();
  while (u <= 0.0);
  const double v = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u));
  spare_ = radius * std::sin(2.0 * std::numbers::pi * v);
  has_spare_ = true;
  return radius * std::cos(2.0 * std::numbers::pi * v);
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw PreconditionError("Rng::index: empty range");
  return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
}

Eigen::MatrixXd block_correlation(const BlockSpec& spec) {
  const auto n = static_cast<Eigen::Index>(spec.block_of.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      c(i, j) = i == j ? 1.0
                       : (spec.block_of[static_cast<std::size_t>(i)] == spec.block_of[static_cast<std::size_t>(j)]
                              ? spec.within
                              : spec.between);
  return c;
}

Eigen::MatrixXd nearest_correlation(const Eigen::MatrixXd& c, double floor) {
  Eigen::MatrixXd x = 0.5 * (c + c.transpose());
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(floor);
    x = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    const Eigen::VectorXd d = x.diagonal().cwiseSqrt().cwiseInverse();
    x = d.asDiagonal() * x * d.asDiagonal();
    x = 0.5 * (x + x.transpose());
    if (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(x, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() > 0.0)
      break;
  }
  x.diagonal().setOnes();
  return x;
}

std::vector<AssetMeta> synthetic_assets(std::size_t n) {
  static constexpr AssetClass cycle[] = {AssetClass::equity, AssetClass::commodity, AssetClass::fixed_income,
                                         AssetClass::currency};
  std::vector<AssetMeta> out;
  for (std::size_t i = 0; i < n; ++i) {
    AssetMeta a;
    a.id = static_cast<int>(i + 1);
    a.name = (i + 1 < 10 ? "A0" : "A") + std::to_string(i + 1);
    a.asset_class = cycle[i % 4];
    out.push_back(a);
  }
  return out;
}

namespace {

Eigen::MatrixXd checked_cholesky(const Eigen::MatrixXd& c, int regime) {
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (llt.info() != Eigen::Success || !(min_eig > 0.0)) {
    const auto fixed = nearest_correlation(c);
    throw PreconditionError("planted_regime_panel: correlation of regime " + std::to_string(regime) +
                            " is not positive definite (smallest eigenvalue " + csv::format_double(min_eig) +
                            "); nearest_correlation() gives a valid matrix within max |change| " +
                            csv::format_double((fixed - c).cwiseAbs().maxCoeff()));
  }
  return llt.matrixL();
}

}  // namespace

SyntheticPanel planted_regime_panel(const PlantedRegimeSpec& spec) {
  if (spec.segments.empty()) throw PreconditionError("planted_regime_panel: no segments");
  const auto n = spec.segments.front().correlation.rows();
  std::size_t total = 0;
  for (const auto& s : spec.segments) {
    if (s.correlation.rows() != n || s.correlation.cols() != n)
      throw PreconditionError("planted_regime_panel: segments disagree on the asset count");
    total += s.rows;
  }
  if (total < 1) throw PreconditionError("planted_regime_panel: no rows requested");

  Rng rng(spec.seed);
  SyntheticPanel out;
  out.panel.dates = business_days(spec.start, total);
  out.panel.assets = synthetic_assets(static_cast<std::size_t>(n));
  out.panel.values.resize(static_cast<Eigen::Index>(total), n);
  std::size_t row = 0;
  Eigen::VectorXd z(n);
  for (const auto& s : spec.segments) {
    const Eigen::MatrixXd l = checked_cholesky(s.correlation, s.regime);
    for (std::size_t t = 0; t < s.rows; ++t, ++row) {
      for (Eigen::Index j = 0; j < n; ++j) z(j) = rng.normal();
      out.panel.values.row(static_cast<Eigen::Index>(row)) = (spec.volatility * (l * z)).transpose();
      out.row_truth.push_back(s.regime);
    }
  }
  return out;
}

SyntheticPanel planted_regime_panel(std::size_t rows_per_regime, const std::vector<BlockSpec>& specs,
                                    std::uint64_t seed, double volatility) {
  PlantedRegimeSpec spec;
  spec.seed = seed;
  spec.volatility = volatility;
  for (std::size_t r = 0; r < specs.size(); ++r)
    spec.segments.push_back({static_cast<int>(r), block_correlation(specs[r]), rows_per_regime});
  return planted_regime_panel(spec);
}

std::vector<BlockSpec> random_block_specs(std::size_t k, std::size_t n, std::uint64_t seed) {
  if (n < 4) throw PreconditionError("random_block_specs needs at least 4 assets");
  constexpr double kMaxOverlap = 0.2;
  Rng rng(seed);
  std::vector<BlockSpec> out;
  std::vector<Eigen::VectorXd> accepted;
  for (std::size_t attempt = 0; out.size() < k; ++attempt) {
    if (attempt == 100000)
      throw PreconditionError("random_block_specs: could not draw " + std::to_string(k) +
                              " mutually distinct structures on " + std::to_string(n) + " assets");
    BlockSpec s;
    const std::size_t blocks = 2 + rng.index(3);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    s.block_of.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) s.block_of[order[i]] = static_cast<int>(i * blocks / n);
    s.within = rng.uniform(0.5, 0.8);
    s.between = rng.uniform(-0.3, 0.2);
    const auto c = block_correlation(s);
    if (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() <= 1e-3)
      continue;
    // keep the structures apart: condensed matrices may correlate by at most kMaxOverlap
    Eigen::VectorXd v = condensed(c);
    v.array() -= v.mean();
    if (!(v.norm() > 1e-12)) continue;  // singleton blocks: no structure at all
    v.normalize();
    bool distinct = true;
    for (const auto& w : accepted) distinct = distinct && std::abs(v.dot(w)) <= kMaxOverlap;
    if (!distinct) continue;
    accepted.push_back(std::move(v));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<int> window_truth(const std::vector<int>& row_truth, const std::vector<std::size_t>& end_rows,
                              std::size_t length) {
  std::vector<int> out;
  for (auto end : end_rows) {
    if (end >= row_truth.size() || end + 1 < length) throw PreconditionError("window_truth: window outside the rows");
    std::vector<std::pair<int, std::size_t>> counts;
    for (std::size_t r = end + 1 - length; r <= end; ++r) {
      auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == row_truth[r]; });
      if (it == counts.end())
        counts.emplace_back(row_truth[r], 1);
      else
        ++it->second;
    }
    int best = row_truth[end];
    std::size_t best_count = 0;
    for (const auto& [regime, count] : counts)
      if (regime == row_truth[end]) best_count = count;
    for (const auto& [regime, count] : counts)
      if (count > best_count) {
        best = regime;
        best_count = count;
      }
    out.push_back(best);
  }
  return out;
}

SyntheticLeadLag planted_leadlag_panel(const PlantedLeadLagSpec& spec) {
  if (!(spec.coupling > 0.0 && spec.coupling <= 1.0))
    throw PreconditionError("planted_leadlag_panel: coupling must lie in (0, 1]");
  if (spec.lag < 1) throw PreconditionError("planted_leadlag_panel: lag must be >= 1");
  if (spec.noise < 0.0) throw PreconditionError("planted_leadlag_panel: noise must be non-negative");
  if (spec.cluster_sizes.size() < 1 || spec.rows < 1) throw PreconditionError("planted_leadlag_panel: empty spec");

  SyntheticLeadLag out;
  std::vector<std::vector<std::size_t>> members(spec.cluster_sizes.size());
  for (std::size_t c = 0; c < spec.cluster_sizes.size(); ++c)
    for (std::size_t i = 0; i < spec.cluster_sizes[c]; ++i) {
      members[c].push_back(out.cluster_of_asset.size());
      out.cluster_of_asset.push_back(static_cast<int>(c));
    }
  const std::size_t n = out.cluster_of_asset.size();
  for (std::size_t c = 1; c < members.size(); ++c)
    out.cluster_edges.emplace_back(spec.chain ? static_cast<int>(c - 1) : 0, static_cast<int>(c));

  // burn-in so that every follower's first kept row has a full history
  const std::size_t burn = spec.lag * members.size();
  const std::size_t total = spec.rows + burn;
  Eigen::MatrixXd z(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(n));  // unit-scale returns
  Rng rng(spec.seed);
  for (std::size_t t = 0; t < total; ++t)
    for (std::size_t c = 0; c < members.size(); ++c) {
      const auto parent = c == 0 ? 0 : static_cast<std::size_t>(out.cluster_edges[c - 1].first);
      double s = 0.0;
      if (c > 0 && t >= spec.lag) {
        for (auto i : members[parent]) s += z(static_cast<Eigen::Index>(t - spec.lag), static_cast<Eigen::Index>(i));
        s /= std::sqrt(static_cast<double>(members[parent].size()));
      }
      for (auto j : members[c])
        z(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) =
            c == 0 ? rng.normal() : spec.coupling * s + spec.noise * rng.normal();
    }

  static constexpr AssetClass classes[] = {AssetClass::equity,   AssetClass::commodity,   AssetClass::fixed_income,
                                           AssetClass::currency, AssetClass::volatility,  AssetClass::bond_spread,
                                           AssetClass::cash,     AssetClass::interest_rate};
  out.panel.dates = business_days(spec.start, spec.rows);
  out.panel.assets = synthetic_assets(n);
  for (std::size_t j = 0; j < n; ++j)
    out.panel.assets[j].asset_class = classes[static_cast<std::size_t>(out.cluster_of_asset[j]) % kAssetClassCount];
  out.panel.values = spec.volatility * z.bottomRows(static_cast<Eigen::Index>(spec.rows));
  return out;
}

PlantedGraph signed_sbm(std::size_t n, std::size_t k, double p_in_pos, double p_out_neg, std::uint64_t seed) {
  if (k < 1 || k > n) throw PreconditionError("signed_sbm: need 1 <= k <= n");
  Rng rng(seed);
  PlantedGraph out;
  for (std::size_t i = 0; i < n; ++i) {
    out.truth.push_back(static_cast<int>(i * k / n));
    out.graph.nodes.push_back(static_cast<int>(i));
  }
  const auto nn = static_cast<Eigen::Index>(n);
  out.graph.weights = Eigen::MatrixXd::Zero(nn, nn);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool same = out.truth[i] == out.truth[j];
      double w = 0.0;
      if (same && rng.bernoulli(p_in_pos)) w = 1.0;
      if (!same && rng.bernoulli(p_out_neg)) w = -1.0;
      out.graph.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w;
      out.graph.weights(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = w;
    }
  return out;
}

Eigen::MatrixXd planted_flow_matrix(const std::vector<std::size_t>& sizes,
                                    const std::vector<std::pair<int, int>>& flows, double p_edge, double p_noise,
                                    std::uint64_t seed, std::vector<int>* truth) {
  std::vector<int> block;
  for (std::size_t c = 0; c < sizes.size(); ++c) block.insert(block.end(), sizes[c], static_cast<int>(c));
  const auto n = static_cast<Eigen::Index>(block.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const int a = block[static_cast<std::size_t>(i)], b = block[static_cast<std::size_t>(j)];
      double v = 0.0;
      const bool forward = std::find(flows.begin(), flows.end(), std::pair{a, b}) != flows.end();
      const bool backward = std::find(flows.begin(), flows.end(), std::pair{b, a}) != flows.end();
      if (forward || backward) {
        if (rng.bernoulli(p_edge)) v = forward ? 1.0 : -1.0;
      } else if (rng.bernoulli(p_noise)) {
        v = rng.bernoulli(0.5) ? 1.0 : -1.0;
      }
      m(i, j) = v;
      m(j, i) = -v;
    }
  if (truth != nullptr) *truth = block;
  return m;
}

LevelsPanel levels_from_returns(const ReturnsPanel& returns, double base) {
  if (returns.rows() == 0) throw PreconditionError("levels_from_returns: empty panel");
  LevelsPanel l;
  Date first = returns.dates.front().plus_days(-1);
  while (first.is_weekend()) first = first.plus_days(-1);
  l.dates.push_back(first);
  l.dates.insert(l.dates.end(), returns.dates.begin(), returns.dates.end());
  for (const auto& a : returns.assets) l.columns.push_back(a.name);
  const auto T = static_cast<Eigen::Index>(returns.rows());
  l.values.resize(T + 1, static_cast<Eigen::Index>(returns.cols()));
  for (Eigen::Index j = 0; j < l.values.cols(); ++j) {
    const bool diff = returns.assets[static_cast<std::size_t>(j)].return_kind == ReturnKind::simple_difference;
    l.values(0, j) = base;
    for (Eigen::Index t = 0; t < T; ++t)
      l.values(t + 1, j) = diff ? l.values(t, j) + returns.values(t, j) : l.values(t, j) * (1.0 + returns.values(t, j));
  }
  return l;
}

}  // namespace macroregime
