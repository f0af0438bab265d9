#include "macroregime/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "macroregime/csv.hpp"
#include "macroregime/hierarchy.hpp"

namespace macroregime {

Eigen::MatrixXd regime_average_corr(const CorrelationStack& stack, const RegimeLabeling& labels, int regime) {
  if (labels.labels.size() != stack.size())
    throw PreconditionError("regime_average_corr: labeling and stack lengths differ");
  const auto members = labels.members(regime);
  if (members.empty()) throw PreconditionError("regime_average_corr: regime " + std::to_string(regime) + " is empty");
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(stack.matrices[members.front()].rows(),
                                              stack.matrices[members.front()].cols());
  for (auto w : members) sum += stack.matrices[w];
  sum /= static_cast<double>(members.size());
  sum = sum.cwiseMax(-1.0).cwiseMin(1.0);
  sum.diagonal().setOnes();
  return sum;
}

double off_diagonal_mean(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  if (n < 2) return kMissing;
  return (m.sum() - m.trace()) / static_cast<double>(n * (n - 1));
}

double off_diagonal_abs_mean(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  if (n < 2) return kMissing;
  return (m.cwiseAbs().sum() - m.diagonal().cwiseAbs().sum()) / static_cast<double>(n * (n - 1));
}

std::vector<ClassStats> class_statistics(const ReturnsPanel& panel, std::span<const std::size_t> rows,
                                         double annualization) {
  std::map<AssetClass, std::vector<std::size_t>> by_class;
  for (std::size_t j = 0; j < panel.cols(); ++j) by_class[panel.assets[j].asset_class].push_back(j);
  std::vector<ClassStats> out;
  for (const auto& [cls, cols] : by_class) {
    ClassStats s;
    s.asset_class = cls;
    s.asset_count = cols.size();
    if (!rows.empty()) {
      double mean_sum = 0.0, std_sum = 0.0;
      bool std_defined = rows.size() >= 2;
      for (auto j : cols) {
        double m = 0.0;
        for (auto r : rows) m += panel.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
        m /= static_cast<double>(rows.size());
        double ss = 0.0;
        for (auto r : rows) {
          const double d = panel.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) - m;
          ss += d * d;
        }
        mean_sum += m;
        if (std_defined) std_sum += std::sqrt(ss / static_cast<double>(rows.size() - 1));
      }
      s.mean_return = mean_sum / static_cast<double>(cols.size());
      if (std_defined) {
        s.std_return = std_sum / static_cast<double>(cols.size());
        if (s.std_return > 0.0) s.sharpe = s.mean_return / s.std_return * std::sqrt(annualization);
      }
    }
    out.push_back(s);
  }
  return out;
}

std::vector<std::vector<ClassStats>> class_statistics(const ReturnsPanel& panel, const RegimeLabeling& labels,
                                                      double annualization) {
  const auto rows = regime_rows(labels, panel.rows());
  std::vector<std::vector<ClassStats>> out;
  for (const auto& r : rows) out.push_back(class_statistics(panel, r, annualization));
  return out;
}

std::vector<double> betweenness_centrality(const Eigen::MatrixXd& distance) {
  if (distance.rows() != distance.cols()) throw PreconditionError("betweenness_centrality: matrix is not square");
  const auto n = static_cast<std::size_t>(distance.rows());
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto edge = [&](std::size_t u, std::size_t v) {
    const double d = distance(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
    return u != v && d > 0.0 && std::isfinite(d) ? d : inf;
  };
  std::vector<double> cb(n, 0.0);
  std::vector<double> dist(n), sigma(n), delta(n);
  std::vector<std::vector<std::size_t>> preds(n);
  std::vector<char> done(n);
  std::vector<std::size_t> order;
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(done.begin(), done.end(), 0);
    for (auto& p : preds) p.clear();
    order.clear();
    dist[s] = 0.0;
    sigma[s] = 1.0;
    // dense Dijkstra: O(n^2) per source
    while (true) {
      std::size_t u = n;
      for (std::size_t v = 0; v < n; ++v)
        if (!done[v] && dist[v] < inf && (u == n || dist[v] < dist[u])) u = v;
      if (u == n) break;
      done[u] = 1;
      order.push_back(u);
      for (std::size_t v = 0; v < n; ++v) {
        if (done[v]) continue;
        const double w = edge(u, v);
        if (w == inf) continue;
        const double alt = dist[u] + w;
        const double eps = 1e-12 * std::max(1.0, alt);
        if (alt < dist[v] - eps) {
          dist[v] = alt;
          sigma[v] = sigma[u];
          preds[v].assign(1, u);
        } else if (std::abs(alt - dist[v]) <= eps) {
          sigma[v] += sigma[u];
          preds[v].push_back(u);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto w = *it;
      for (auto v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) cb[w] += delta[w];
    }
  }
  for (auto& v : cb) v /= 2.0;
  return cb;
}

std::vector<Centrality> betweenness_ranking(const Eigen::MatrixXd& avg_corr, const std::vector<int>& asset_ids) {
  if (static_cast<std::size_t>(avg_corr.rows()) != asset_ids.size())
    throw PreconditionError("betweenness_ranking: one asset id per row required");
  const auto values = betweenness_centrality(to_distance(avg_corr));
  std::vector<Centrality> out;
  for (std::size_t i = 0; i < values.size(); ++i) out.push_back({asset_ids[i], values[i]});
  std::stable_sort(out.begin(), out.end(), [](const Centrality& a, const Centrality& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.asset_id < b.asset_id;
  });
  return out;
}

Eigen::MatrixXi intercluster_signs(const Eigen::MatrixXd& corr, const Partition& p) {
  const auto k = static_cast<Eigen::Index>(p.k);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd count = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (i == j) continue;
      const auto a = p.assignment[i], b = p.assignment[j];
      sum(a, b) += corr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      count(a, b) += 1.0;
    }
  Eigen::MatrixXi out = Eigen::MatrixXi::Zero(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) {
      if (count(a, b) == 0.0) continue;
      const double m = sum(a, b) / count(a, b);
      out(a, b) = m > 0.0 ? 1 : (m < 0.0 ? -1 : 0);
    }
  return out;
}

RegimeCommunities regime_communities(const Eigen::MatrixXd& avg_corr, const std::vector<int>& asset_ids,
                                     const std::vector<std::size_t>& k_range, const SpongeOptions& sponge,
                                     KSelectionRule rule, Diagnostics* diag) {
  const auto g = dense_graph(avg_corr, asset_ids);
  std::vector<std::size_t> range;
  for (auto k : k_range)
    if (k >= 2 && k <= g.size()) range.push_back(k);
  if (range.size() < k_range.size())
    warn(diag, "regime_communities: k range clipped to [2, " + std::to_string(g.size()) + "]");
  RegimeCommunities out;
  out.selection = select_k_by_modularity(g, range, sponge, rule, diag);
  out.intercluster_sign = intercluster_signs(avg_corr, out.selection.partition);
  return out;
}

std::vector<RegimeProfile> profile_regimes(const ReturnsPanel& panel, const CorrelationStack& stack,
                                           const RegimeLabeling& labels, const ProfileOptions& options,
                                           Diagnostics* diag) {
  const auto ids = panel.asset_ids();
  const auto rows = regime_rows(labels, panel.rows());
  std::vector<RegimeProfile> out(labels.k);
  std::vector<Diagnostics> local(labels.k);
  const auto k = static_cast<std::ptrdiff_t>(labels.k);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < k; ++r) {
    auto& p = out[static_cast<std::size_t>(r)];
    auto& d = local[static_cast<std::size_t>(r)];
    p.regime_id = static_cast<int>(r);
    p.window_count = labels.members(static_cast<int>(r)).size();
    p.avg_corr = regime_average_corr(stack, labels, static_cast<int>(r));
    p.avg_corr_scalar = off_diagonal_mean(p.avg_corr);
    p.avg_abs_corr_scalar = off_diagonal_abs_mean(p.avg_corr);
    p.class_stats = class_statistics(panel, rows[static_cast<std::size_t>(r)], options.annualization);
    p.betweenness = betweenness_ranking(p.avg_corr, ids);
    try {
      p.communities = regime_communities(p.avg_corr, ids, options.k_range, options.sponge, options.rule, &d);
    } catch (const Error& e) {
      d.warn("regime " + std::to_string(r) + " communities: " + e.what());
    }
  }
  if (diag != nullptr)
    for (const auto& d : local) diag->merge(d);
  return out;
}

void write_profiles(const std::filesystem::path& dir, const std::vector<RegimeProfile>& profiles,
                    const std::vector<AssetMeta>& assets) {
  {
    auto out = csv::open_output(dir / "summary.csv");
    out << "regime_id,windows,avg_corr,avg_abs_corr,k\n";
    for (const auto& p : profiles)
      out << p.regime_id << ',' << p.window_count << ',' << csv::format_double(p.avg_corr_scalar) << ','
          << csv::format_double(p.avg_abs_corr_scalar) << ',' << (p.communities ? p.communities->selection.k : 0)
          << '\n';
  }
  std::map<int, const AssetMeta*> by_id;
  for (const auto& a : assets) by_id[a.id] = &a;

  for (const auto& p : profiles) {
    const auto sub = dir / ("regime_" + std::to_string(p.regime_id));
    {
      auto out = csv::open_output(sub / "avg_corr.csv");
      out << "asset";
      for (const auto& a : assets) out << ',' << a.name;
      out << '\n';
      for (Eigen::Index i = 0; i < p.avg_corr.rows(); ++i) {
        out << assets[static_cast<std::size_t>(i)].name;
        for (Eigen::Index j = 0; j < p.avg_corr.cols(); ++j) out << ',' << csv::format_double(p.avg_corr(i, j));
        out << '\n';
      }
    }
    {
      auto out = csv::open_output(sub / "class_stats.csv");
      out << "asset_class,assets,mean_return,std_return,sharpe\n";
      for (const auto& s : p.class_stats)
        out << to_string(s.asset_class) << ',' << s.asset_count << ',' << csv::format_double(s.mean_return) << ','
            << csv::format_double(s.std_return) << ',' << csv::format_double(s.sharpe) << '\n';
    }
    {
      auto out = csv::open_output(sub / "betweenness.csv");
      out << "rank,asset_id,name,centrality\n";
      for (std::size_t i = 0; i < p.betweenness.size(); ++i) {
        const auto& c = p.betweenness[i];
        out << i + 1 << ',' << c.asset_id << ',' << by_id.at(c.asset_id)->name << ','
            << csv::format_double(c.value) << '\n';
      }
    }
    if (!p.communities) continue;
    const auto& part = p.communities->selection.partition;
    {
      auto out = csv::open_output(sub / "communities.csv");
      out << "asset_id,name,cluster\n";
      for (std::size_t i = 0; i < part.size(); ++i)
        out << part.nodes[i] << ',' << by_id.at(part.nodes[i])->name << ',' << part.assignment[i] << '\n';
    }
    {
      auto out = csv::open_output(sub / "composition.csv");
      out << "cluster";
      for (int c = 0; c < kAssetClassCount; ++c) out << ',' << to_string(static_cast<AssetClass>(c));
      out << '\n';
      for (int k = 0; k < part.k; ++k) {
        std::vector<int> hist(kAssetClassCount, 0);
        for (std::size_t i = 0; i < part.size(); ++i)
          if (part.assignment[i] == k) ++hist[static_cast<std::size_t>(by_id.at(part.nodes[i])->asset_class)];
        out << k;
        for (int h : hist) out << ',' << h;
        out << '\n';
      }
    }
    {
      auto out = csv::open_output(sub / "intercluster_sign.csv");
      const auto& s = p.communities->intercluster_sign;
      out << "cluster";
      for (Eigen::Index b = 0; b < s.cols(); ++b) out << ',' << b;
      out << '\n';
      for (Eigen::Index a = 0; a < s.rows(); ++a) {
        out << a;
        for (Eigen::Index b = 0; b < s.cols(); ++b) out << ',' << s(a, b);
        out << '\n';
      }
    }
    {
      auto out = csv::open_output(sub / "modularity.csv");
      out << "k,q_signed,selected\n";
      const auto& sel = p.communities->selection;
      for (std::size_t i = 0; i < sel.ks.size(); ++i)
        out << sel.ks[i] << ',' << csv::format_double(sel.modularity[i]) << ',' << (sel.ks[i] == sel.k ? 1 : 0)
            << '\n';
    }
  }
}

}  // namespace macroregime
