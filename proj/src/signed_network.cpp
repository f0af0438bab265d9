#include "macroregime/signed_network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "macroregime/csv.hpp"
#include "macroregime/embedding.hpp"

namespace macroregime {

namespace {

void check_square(const Eigen::MatrixXd& m, const std::vector<int>& ids, const char* who) {
  if (m.rows() != m.cols()) throw PreconditionError(std::string(who) + ": matrix is not square");
  if (static_cast<std::size_t>(m.rows()) != ids.size())
    throw PreconditionError(std::string(who) + ": one node id per row required");
}

SignedGraph induced(const Eigen::MatrixXd& w, const std::vector<int>& ids, const std::vector<std::size_t>& keep) {
  SignedGraph g;
  const auto n = static_cast<Eigen::Index>(keep.size());
  g.weights.resize(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    g.nodes.push_back(ids[keep[static_cast<std::size_t>(a)]]);
    for (Eigen::Index b = 0; b < n; ++b)
      g.weights(a, b) = w(static_cast<Eigen::Index>(keep[static_cast<std::size_t>(a)]),
                          static_cast<Eigen::Index>(keep[static_cast<std::size_t>(b)]));
  }
  return g;
}

// D^{-1/2} W D^{-1/2} subtracted from I; isolated nodes keep an identity row.
Eigen::MatrixXd sym_laplacian(const Eigen::MatrixXd& w) {
  const Eigen::VectorXd deg = w.rowwise().sum();
  Eigen::VectorXd inv_sqrt(deg.size());
  for (Eigen::Index i = 0; i < deg.size(); ++i) inv_sqrt(i) = deg(i) > 0.0 ? 1.0 / std::sqrt(deg(i)) : 0.0;
  Eigen::MatrixXd l = -(inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal());
  l.diagonal().array() += 1.0;
  return l;
}

}  // namespace

SignedGraph threshold_graph(const Eigen::MatrixXd& corr, double threshold, const std::vector<int>& node_ids,
                            std::optional<Date> date) {
  check_square(corr, node_ids, "threshold_graph");
  if (!(threshold > 0.0 && threshold < 1.0)) throw PreconditionError("threshold_graph: threshold must lie in (0, 1)");
  const auto n = static_cast<std::size_t>(corr.rows());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(corr.rows(), corr.cols());
  for (Eigen::Index i = 0; i < corr.rows(); ++i)
    for (Eigen::Index j = 0; j < corr.cols(); ++j)
      if (i != j && std::abs(corr(i, j)) >= threshold) w(i, j) = corr(i, j);

  std::vector<int> comp(n, -1);
  std::vector<std::vector<std::size_t>> comps;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    comps.emplace_back();
    std::vector<std::size_t> stack{s};
    comp[s] = static_cast<int>(comps.size() - 1);
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      comps.back().push_back(u);
      for (std::size_t v = 0; v < n; ++v)
        if (comp[v] < 0 && w(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) != 0.0) {
          comp[v] = comp[s];
          stack.push_back(v);
        }
    }
  }
  auto min_id = [&](const std::vector<std::size_t>& c) {
    int m = std::numeric_limits<int>::max();
    for (auto i : c) m = std::min(m, node_ids[i]);
    return m;
  };
  const auto best = std::min_element(comps.begin(), comps.end(), [&](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return min_id(a) < min_id(b);
  });
  if (best == comps.end() || best->size() < 2)
    throw Error("threshold_graph: no edge with |corr| >= " + csv::format_double(threshold) +
                (date ? " at " + date->to_string() : std::string()));
  auto keep = *best;
  std::sort(keep.begin(), keep.end());
  auto g = induced(w, node_ids, keep);
  g.date = date;
  return g;
}

SignedGraph dense_graph(const Eigen::MatrixXd& corr, const std::vector<int>& node_ids) {
  check_square(corr, node_ids, "dense_graph");
  SignedGraph g;
  g.nodes = node_ids;
  g.weights = corr;
  g.weights.diagonal().setZero();
  return g;
}

Partition sponge_sym(const SignedGraph& g, std::size_t k, const SpongeOptions& options) {
  const std::size_t n = g.size();
  if (k < 2 || k > n)
    throw PreconditionError("sponge_sym: k=" + std::to_string(k) + " outside [2, " + std::to_string(n) + "]");
  if (!(options.tau_plus > 0.0 && options.tau_minus > 0.0))
    throw PreconditionError("sponge_sym: tau parameters must be positive");
  const Eigen::MatrixXd pos = g.weights.cwiseMax(0.0);
  const Eigen::MatrixXd neg = (-g.weights).cwiseMax(0.0);
  const auto id = Eigen::MatrixXd::Identity(g.weights.rows(), g.weights.cols());
  const Eigen::MatrixXd a = sym_laplacian(pos) + options.tau_minus * id;
  const Eigen::MatrixXd b = sym_laplacian(neg) + options.tau_plus * id;

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, b, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success)
    throw NumericalError("sponge_sym: generalized eigensolver failed on a " + std::to_string(n) + "-node graph" +
                         (g.date ? " at " + g.date->to_string() : std::string()));
  const Eigen::MatrixXd embedding = solver.eigenvectors().leftCols(static_cast<Eigen::Index>(k));

  KMeansOptions km;
  km.seed = options.seed;
  km.restarts = options.restarts;
  const auto res = kmeans(embedding, k, km);
  return Partition::from_labels(g.nodes, res.labels);
}

double newman_modularity(const Eigen::MatrixXd& weights, std::span<const int> labels) {
  const double two_m = weights.sum();
  if (!(two_m > 0.0)) return 0.0;
  const Eigen::VectorXd deg = weights.rowwise().sum();
  const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> inside(static_cast<std::size_t>(k), 0.0), total(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    const auto ci = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
    total[ci] += deg(i);
    for (Eigen::Index j = 0; j < weights.cols(); ++j)
      if (labels[static_cast<std::size_t>(j)] == labels[static_cast<std::size_t>(i)]) inside[ci] += weights(i, j);
  }
  double q = 0.0;
  for (std::size_t c = 0; c < inside.size(); ++c) q += inside[c] / two_m - (total[c] / two_m) * (total[c] / two_m);
  return q;
}

double signed_modularity(const SignedGraph& g, const Partition& p) {
  if (p.nodes.size() != g.nodes.size())
    throw PreconditionError("signed_modularity: partition does not cover the graph's nodes");
  std::vector<int> labels(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto it = std::find(p.nodes.begin(), p.nodes.end(), g.nodes[i]);
    if (it == p.nodes.end())
      throw PreconditionError("signed_modularity: node " + std::to_string(g.nodes[i]) + " missing from partition");
    labels[i] = p.assignment[static_cast<std::size_t>(it - p.nodes.begin())];
  }
  const Eigen::MatrixXd pos = g.weights.cwiseMax(0.0);
  const Eigen::MatrixXd neg = (-g.weights).cwiseMax(0.0);
  const double wp = pos.sum(), wn = neg.sum();
  if (!(wp + wn > 0.0)) return 0.0;
  const double qp = newman_modularity(pos, labels);
  if (wn == 0.0) return qp;
  return (wp * qp - wn * newman_modularity(neg, labels)) / (wp + wn);
}

std::string to_string(KSelectionRule r) {
  return r == KSelectionRule::forward_difference ? "forward_difference" : "argmax";
}

KSelectionRule parse_k_selection_rule(std::string_view text) {
  if (text == "argmax") return KSelectionRule::argmax;
  if (text == "forward_difference") return KSelectionRule::forward_difference;
  throw ParseError("unknown k selection rule '" + std::string(text) + "'");
}

KSelection select_k_by_modularity(const SignedGraph& g, const std::vector<std::size_t>& k_range,
                                  const SpongeOptions& options, KSelectionRule rule, Diagnostics* diag) {
  auto ks = k_range;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.empty()) throw PreconditionError("select_k_by_modularity: empty k range");
  if (ks.front() < 2 || ks.back() > g.size())
    throw PreconditionError("select_k_by_modularity: k range must lie within [2, " + std::to_string(g.size()) + "]");

  KSelection out;
  out.ks = ks;
  std::vector<Partition> parts;
  for (auto k : ks) {
    parts.push_back(sponge_sym(g, k, options));
    out.modularity.push_back(signed_modularity(g, parts.back()));
  }
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    double score = out.modularity[i];
    if (rule == KSelectionRule::forward_difference) score -= i == 0 ? 0.0 : out.modularity[i - 1];
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  const auto [lo, hi] = std::minmax_element(out.modularity.begin(), out.modularity.end());
  if (ks.size() > 1 && *hi - *lo < 1e-6)
    warn(diag, "select_k_by_modularity: Q_signed is flat across k" +
                   (g.date ? " at " + g.date->to_string() : std::string()));
  out.k = ks[best];
  out.partition = parts[best];
  return out;
}

// Stability series -----------------------------------------------------------------

namespace {

struct DateResult {
  std::optional<Partition> partition;
  std::size_t k = 0;
  Diagnostics diag;
};

DateResult cluster_date(const CorrelationStack& stack, std::size_t t, const std::vector<int>& ids,
                        const StabilityOptions& opt) {
  DateResult r;
  try {
    const auto g = threshold_graph(stack.matrices[t], opt.threshold, ids, stack.end_dates[t]);
    std::vector<std::size_t> range;
    for (auto k : opt.k_range)
      if (k >= 2 && k <= g.size()) range.push_back(k);
    if (range.empty()) {
      r.diag.warn("stability_series: giant component at " + stack.end_dates[t].to_string() + " has only " +
                  std::to_string(g.size()) + " nodes; no admissible k");
      return r;
    }
    auto sel = select_k_by_modularity(g, range, opt.sponge, opt.rule, &r.diag);
    r.k = sel.k;
    r.partition = std::move(sel.partition);
  } catch (const Error& e) {
    r.diag.warn(std::string("stability_series: ") + e.what());
  }
  return r;
}

StabilitySeries assemble(const CorrelationStack& stack, std::vector<DateResult>& results,
                         const StabilityOptions& opt, Diagnostics* diag) {
  StabilitySeries s;
  s.dates = stack.end_dates;
  for (auto& r : results) {
    if (diag != nullptr) diag->merge(r.diag);
    s.partitions.push_back(std::move(r.partition));
    s.ks.push_back(r.k);
  }
  s.values.assign(s.dates.size(), kMissing);
  for (std::size_t t = opt.lookback; t < s.dates.size(); ++t) {
    if (!s.partitions[t]) continue;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t back = 1; back <= opt.lookback; ++back) {
      const auto& prev = s.partitions[t - back];
      if (!prev) continue;
      try {
        sum += ari(*s.partitions[t], *prev);
        ++count;
      } catch (const PreconditionError& e) {
        warn(diag, "stability_series at " + s.dates[t].to_string() + ": " + e.what());
      }
    }
    if (count > 0) s.values[t] = sum / static_cast<double>(count);
  }
  return s;
}

void check_options(const CorrelationStack& stack, const std::vector<int>& ids, const StabilityOptions& opt) {
  if (opt.lookback < 1) throw PreconditionError("stability_series: lookback must be >= 1");
  if (ids.size() != stack.asset_count()) throw PreconditionError("stability_series: one node id per asset required");
}

}  // namespace

StabilitySeries stability_series(const CorrelationStack& stack, const std::vector<int>& node_ids,
                                 const StabilityOptions& options, Diagnostics* diag) {
  check_options(stack, node_ids, options);
  std::vector<DateResult> results(stack.size());
  const auto n = static_cast<std::ptrdiff_t>(stack.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < n; ++t)
    results[static_cast<std::size_t>(t)] = cluster_date(stack, static_cast<std::size_t>(t), node_ids, options);
  return assemble(stack, results, options, diag);
}

namespace serial {

StabilitySeries stability_series(const CorrelationStack& stack, const std::vector<int>& node_ids,
                                 const StabilityOptions& options, Diagnostics* diag) {
  check_options(stack, node_ids, options);
  std::vector<DateResult> results;
  for (std::size_t t = 0; t < stack.size(); ++t) results.push_back(cluster_date(stack, t, node_ids, options));
  return assemble(stack, results, options, diag);
}

}  // namespace serial

void write_partitions_csv(const std::filesystem::path& path, const StabilitySeries& series) {
  auto out = csv::open_output(path);
  out << "date,asset_id,cluster\n";
  for (std::size_t t = 0; t < series.dates.size(); ++t) {
    if (!series.partitions[t]) continue;
    const auto& p = *series.partitions[t];
    for (std::size_t i = 0; i < p.nodes.size(); ++i)
      out << series.dates[t].to_string() << ',' << p.nodes[i] << ',' << p.assignment[i] << '\n';
  }
}

void write_stability_series_csv(const std::filesystem::path& path, const StabilitySeries& series) {
  auto out = csv::open_output(path);
  out << "date,ari,k\n";
  for (std::size_t t = 0; t < series.dates.size(); ++t)
    out << series.dates[t].to_string() << ',' << csv::format_double(series.values[t]) << ',' << series.ks[t] << '\n';
}

}  // namespace macroregime
