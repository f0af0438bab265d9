#include "macroregime/leadlag.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/distributions/fisher_f.hpp>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "macroregime/csv.hpp"
#include "macroregime/embedding.hpp"

namespace macroregime {

namespace {

// Regression rows t with t - lag inside the same span as t.
std::vector<std::size_t> regression_rows(std::span<const RowSpan> spans, std::size_t lag) {
  std::vector<std::size_t> rows;
  for (const auto& s : spans)
    for (std::size_t t = s.begin + lag; t < s.end; ++t) rows.push_back(t);
  return rows;
}

void check_rows(std::size_t observations, std::size_t lag) {
  if (lag < 1) throw PreconditionError("granger: lag must be >= 1");
  if (observations < 3 * lag + 10)
    throw PreconditionError("granger: " + std::to_string(observations) + " regression rows for lag " +
                            std::to_string(lag) + "; need at least " + std::to_string(3 * lag + 10) +
                            " (series length >= 4 lag + 10)");
}

// F-test from the two residual sums of squares.
GrangerResult f_test(double rss_restricted, double rss_full, std::size_t lag, std::size_t df2, double alpha) {
  GrangerResult r;
  r.df1 = lag;
  r.df2 = df2;
  if (!(rss_restricted > 0.0)) {
    r.singular = true;
    return r;
  }
  const double gain = std::max(rss_restricted - rss_full, 0.0);
  if (rss_full <= 1e-14 * rss_restricted) {
    r.f_statistic = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
  } else {
    r.f_statistic = (gain / static_cast<double>(lag)) / (rss_full / static_cast<double>(df2));
    const boost::math::fisher_f dist(static_cast<double>(lag), static_cast<double>(df2));
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.f_statistic));
  }
  r.strength = 1.0 - r.p_value;
  r.significant = r.p_value < alpha;
  return r;
}

// OLS residual sum of squares by column-pivoted QR; false when rank deficient.
bool qr_rss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double& rss) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < x.cols()) return false;
  rss = (y - x * qr.solve(y)).squaredNorm();
  return true;
}

GrangerResult granger_rows(const Eigen::MatrixXd& values, std::size_t cause, std::size_t effect,
                           const std::vector<std::size_t>& rows, std::size_t lag, double alpha, Diagnostics* diag) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(lag);
  Eigen::MatrixXd full(n, 1 + 2 * p);
  Eigen::VectorXd target(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto t = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)]);
    target(r) = values(t, static_cast<Eigen::Index>(effect));
    full(r, 0) = 1.0;
    for (Eigen::Index l = 1; l <= p; ++l) {
      full(r, l) = values(t - l, static_cast<Eigen::Index>(effect));
      full(r, p + l) = values(t - l, static_cast<Eigen::Index>(cause));
    }
  }
  double rss_r = 0.0, rss_f = 0.0;
  const std::size_t df2 = rows.size() - 2 * lag - 1;
  if (!qr_rss(full.leftCols(1 + p), target, rss_r) || !qr_rss(full, target, rss_f)) {
    warn(diag, "granger: singular regression for cause " + std::to_string(cause) + " -> effect " +
                   std::to_string(effect) + " at lag " + std::to_string(lag) + "; treated as not significant");
    GrangerResult r;
    r.df1 = lag;
    r.df2 = df2;
    r.singular = true;
    return r;
  }
  return f_test(rss_r, rss_f, lag, df2, alpha);
}

// Benjamini-Hochberg step-up threshold over the finite p-values; 0 when nothing passes.
double bh_threshold(std::vector<double> p, double alpha) {
  std::sort(p.begin(), p.end());
  const double m = static_cast<double>(p.size());
  double cut = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] <= alpha * static_cast<double>(i + 1) / m) cut = p[i];
  return cut;
}

// Builds the deflated skew-symmetric matrix from directional p-values.
LeadLagMatrix deflate(const Eigen::MatrixXd& pval, const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& valid,
                      std::size_t lag, const LeadLagOptions& opt) {
  const auto n = pval.rows();
  double cut = opt.alpha;
  bool strict = true;  // p < alpha for the raw test, p <= cutoff for BH
  if (opt.benjamini_hochberg) {
    std::vector<double> all;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j && valid(i, j)) all.push_back(pval(i, j));
    cut = bh_threshold(all, opt.alpha);
    strict = false;
  }
  auto sig = [&](Eigen::Index i, Eigen::Index j) {
    if (!valid(i, j)) return false;
    return strict ? pval(i, j) < cut : (cut > 0.0 && pval(i, j) <= cut);
  };
  LeadLagMatrix m;
  m.lag = lag;
  m.alpha = opt.alpha;
  m.strengths = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const bool ij = sig(i, j), ji = sig(j, i);
      double s = 0.0;  // positive: i leads j
      if (ij && ji)
        s = (1.0 - pval(i, j)) - (1.0 - pval(j, i));
      else if (ij)
        s = 1.0 - pval(i, j);
      else if (ji)
        s = -(1.0 - pval(j, i));
      if (s == 0.0) continue;
      m.strengths(i, j) = s;
      m.strengths(j, i) = -s;
      ++m.significant_count;
    }
  return m;
}

void check_matrix_inputs(const Eigen::MatrixXd& values, std::span<const RowSpan> spans) {
  if (values.cols() < 2) throw PreconditionError("leadlag_matrix needs at least 2 series");
  for (const auto& s : spans)
    if (s.end > static_cast<std::size_t>(values.rows()) || s.begin > s.end)
      throw PreconditionError("leadlag_matrix: row span outside the panel");
}

}  // namespace

std::vector<RowSpan> contiguous_spans(std::span<const std::size_t> rows) {
  std::vector<RowSpan> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i] <= rows[i - 1]) throw PreconditionError("contiguous_spans: rows must be increasing");
    if (!out.empty() && out.back().end == rows[i])
      ++out.back().end;
    else
      out.push_back({rows[i], rows[i] + 1});
  }
  return out;
}

GrangerResult granger_pair(const Eigen::MatrixXd& values, std::size_t cause, std::size_t effect,
                           std::span<const RowSpan> spans, std::size_t lag, double alpha, Diagnostics* diag) {
  if (cause >= static_cast<std::size_t>(values.cols()) || effect >= static_cast<std::size_t>(values.cols()))
    throw PreconditionError("granger_pair: column out of range");
  const auto rows = regression_rows(spans, lag);
  check_rows(rows.size(), lag);
  return granger_rows(values, cause, effect, rows, lag, alpha, diag);
}

GrangerResult granger_pair(std::span<const double> x, std::span<const double> y, std::size_t lag, double alpha,
                           Diagnostics* diag) {
  if (x.size() != y.size()) throw PreconditionError("granger_pair: series lengths differ");
  if (lag < 1) throw PreconditionError("granger: lag must be >= 1");
  if (x.size() < 4 * lag + 10)
    throw PreconditionError("granger_pair: series of length " + std::to_string(x.size()) + " too short for lag " +
                            std::to_string(lag));
  Eigen::MatrixXd values(static_cast<Eigen::Index>(x.size()), 2);
  for (std::size_t t = 0; t < x.size(); ++t) {
    values(static_cast<Eigen::Index>(t), 0) = x[t];
    values(static_cast<Eigen::Index>(t), 1) = y[t];
  }
  const RowSpan all{0, x.size()};
  return granger_pair(values, 0, 1, std::span<const RowSpan>(&all, 1), lag, alpha, diag);
}

LeadLagMatrix leadlag_matrix(const Eigen::MatrixXd& values, std::span<const RowSpan> spans, std::size_t lag,
                             const LeadLagOptions& options, Diagnostics* diag) {
  check_matrix_inputs(values, spans);
  const auto rows = regression_rows(spans, lag);
  check_rows(rows.size(), lag);
  const auto n_obs = static_cast<Eigen::Index>(rows.size());
  const auto n = values.cols();
  const auto p = static_cast<Eigen::Index>(lag);
  const std::size_t df2 = rows.size() - 2 * lag - 1;

  // All lagged columns side by side: every pair's design is a column subset,
  // so one Gram matrix serves all N(N-1) regressions.
  Eigen::MatrixXd z(n_obs, 1 + n * p);
  Eigen::MatrixXd y(n_obs, n);
  for (Eigen::Index r = 0; r < n_obs; ++r) {
    const auto t = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)]);
    z(r, 0) = 1.0;
    y.row(r) = values.row(t);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index l = 1; l <= p; ++l) z(r, 1 + a * p + l - 1) = values(t - l, a);
  }
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(z.cols(), z.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  const Eigen::MatrixXd zy = z.transpose() * y;
  const Eigen::VectorXd yy = y.colwise().squaredNorm();

  Eigen::MatrixXd pval = Eigen::MatrixXd::Ones(n, n);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> valid =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
  std::vector<Diagnostics> local(static_cast<std::size_t>(n));

  // RSS of the regression of column `target` on the Gram columns `idx`; false when singular.
  auto rss = [&](const std::vector<Eigen::Index>& idx, Eigen::Index target, double& out) {
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd g(m, m);
    Eigen::VectorXd b(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      b(a) = zy(idx[static_cast<std::size_t>(a)], target);
      for (Eigen::Index c = 0; c < m; ++c) g(a, c) = gram(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(c)]);
    }
    const Eigen::VectorXd scale = g.diagonal().cwiseSqrt().cwiseInverse();
    if (!scale.allFinite()) return false;
    const Eigen::MatrixXd gs = scale.asDiagonal() * g * scale.asDiagonal();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gs);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-10)) return false;
    const Eigen::VectorXd coef = ldlt.solve(scale.asDiagonal() * b);
    out = yy(target) - coef.dot(scale.asDiagonal() * b);
    return true;
  };

#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index effect = 0; effect < n; ++effect) {
    auto& d = local[static_cast<std::size_t>(effect)];
    std::vector<Eigen::Index> idx{0};
    for (Eigen::Index l = 0; l < p; ++l) idx.push_back(1 + effect * p + l);
    double rss_r = 0.0;
    const bool restricted_ok = rss(idx, effect, rss_r);
    for (Eigen::Index cause = 0; cause < n; ++cause) {
      if (cause == effect) continue;
      auto full = idx;
      for (Eigen::Index l = 0; l < p; ++l) full.push_back(1 + cause * p + l);
      double rss_f = 0.0;
      if (!restricted_ok || !rss(full, effect, rss_f)) {
        d.warn("granger: singular regression for cause " + std::to_string(cause) + " -> effect " +
               std::to_string(effect) + " at lag " + std::to_string(lag) + "; treated as not significant");
        continue;
      }
      const auto r = f_test(rss_r, rss_f, lag, df2, options.alpha);
      if (r.singular) continue;
      pval(cause, effect) = r.p_value;
      valid(cause, effect) = true;
    }
  }
  if (diag != nullptr)
    for (const auto& d : local) diag->merge(d);
  return deflate(pval, valid, lag, options);
}

namespace serial {

LeadLagMatrix leadlag_matrix(const Eigen::MatrixXd& values, std::span<const RowSpan> spans, std::size_t lag,
                             const LeadLagOptions& options, Diagnostics* diag) {
  check_matrix_inputs(values, spans);
  const auto rows = regression_rows(spans, lag);
  check_rows(rows.size(), lag);
  const auto n = values.cols();
  Eigen::MatrixXd pval = Eigen::MatrixXd::Ones(n, n);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> valid =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
  for (Eigen::Index effect = 0; effect < n; ++effect)
    for (Eigen::Index cause = 0; cause < n; ++cause) {
      if (cause == effect) continue;
      const auto r = granger_rows(values, static_cast<std::size_t>(cause), static_cast<std::size_t>(effect), rows,
                                  lag, options.alpha, diag);
      if (r.singular) continue;
      pval(cause, effect) = r.p_value;
      valid(cause, effect) = true;
    }
  return deflate(pval, valid, lag, options);
}

}  // namespace serial

OptimalLag optimal_lag(const Eigen::MatrixXd& values, std::span<const RowSpan> spans,
                       const std::vector<std::size_t>& grid, const LeadLagOptions& options, Diagnostics* diag) {
  if (grid.empty()) throw PreconditionError("optimal_lag: empty lag grid");
  OptimalLag out;
  bool found = false;
  for (auto lag : grid) {
    if (lag < 1) throw PreconditionError("optimal_lag: lags must be >= 1");
    if (regression_rows(spans, lag).size() < 3 * lag + 10) {
      warn(diag, "optimal_lag: too few observations for lag " + std::to_string(lag) + "; skipped");
      continue;
    }
    auto m = leadlag_matrix(values, spans, lag, options, diag);
    out.grid.push_back(lag);
    out.counts.push_back(m.significant_count);
    const bool better = !found || m.significant_count > out.matrix.significant_count ||
                        (m.significant_count == out.matrix.significant_count && lag < out.lag);
    if (better) {
      out.lag = lag;
      out.matrix = std::move(m);
      found = true;
    }
  }
  if (!found) throw PreconditionError("optimal_lag: no lag of the grid fits the available observations");
  return out;
}

// Hermitian clustering ------------------------------------------------------------

int LeadLagClustering::rank_of(int cluster) const {
  const auto it = std::find(ordering.begin(), ordering.end(), cluster);
  if (it == ordering.end()) throw PreconditionError("rank_of: unknown cluster id");
  return static_cast<int>(it - ordering.begin());
}

Eigen::MatrixXcd hermitian_adjacency(const Eigen::MatrixXd& m) {
  return m.cast<std::complex<double>>() * std::complex<double>(0.0, 1.0);
}

LeadLagClustering hermitian_cluster(const Eigen::MatrixXd& m, const std::vector<int>& node_ids, std::size_t k,
                                    std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(m.rows());
  if (m.rows() != m.cols() || node_ids.size() != n)
    throw PreconditionError("hermitian_cluster: square matrix with one id per node required");
  if (k < 2 || k > n)
    throw PreconditionError("hermitian_cluster: k=" + std::to_string(k) + " outside [2, " + std::to_string(n) + "]");
  const double scale = m.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw PreconditionError("hermitian_cluster: no significant lead-lag structure (all-zero matrix)");

  // Eigenvalues of i M come in +- pairs with conjugate eigenvectors; a pair
  // holds the same information, so the embedding is rotation invariant per pair.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hermitian_adjacency(m / scale));
  if (solver.info() != Eigen::Success) throw NumericalError("hermitian_cluster: eigensolver failed");
  const std::size_t wanted = (k + 1) / 2;
  const Eigen::VectorXd& values = solver.eigenvalues();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(values(a)) > std::abs(values(b)) ||
           (std::abs(values(a)) == std::abs(values(b)) && values(a) > values(b));
  });
  const std::vector<Eigen::Index> picked(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(wanted));

  Eigen::MatrixXd embed(m.rows(), static_cast<Eigen::Index>(2 * picked.size()));
  for (std::size_t c = 0; c < picked.size(); ++c) {
    const auto v = solver.eigenvectors().col(picked[c]);
    embed.col(static_cast<Eigen::Index>(2 * c)) = v.real();
    embed.col(static_cast<Eigen::Index>(2 * c + 1)) = v.imag();
  }
  KMeansOptions km;
  km.seed = seed;
  const auto res = kmeans(embed, k, km);

  LeadLagClustering out;
  out.partition = Partition::from_labels(node_ids, res.labels);
  const auto kk = static_cast<std::size_t>(out.partition.k);
  out.net_flow.assign(kk, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (out.partition.assignment[i] != out.partition.assignment[j])
        out.net_flow[static_cast<std::size_t>(out.partition.assignment[i])] +=
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  out.ordering.resize(kk);
  std::iota(out.ordering.begin(), out.ordering.end(), 0);
  std::stable_sort(out.ordering.begin(), out.ordering.end(),
                   [&](int a, int b) { return out.net_flow[static_cast<std::size_t>(a)] > out.net_flow[static_cast<std::size_t>(b)]; });
  return out;
}

VMeasure v_measure(std::span<const int> clusters, std::span<const int> classes, double beta) {
  if (clusters.size() != classes.size()) throw PreconditionError("v_measure: label vectors differ in length");
  if (clusters.empty()) throw PreconditionError("v_measure: no labels");
  if (!(beta > 0.0)) throw PreconditionError("v_measure: beta must be positive");
  const double n = static_cast<double>(clusters.size());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ck, cc;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    joint[{clusters[i], classes[i]}] += 1.0;
    ck[clusters[i]] += 1.0;
    cc[classes[i]] += 1.0;
  }
  auto entropy = [&](const std::map<int, double>& counts) {
    double h = 0.0;
    for (const auto& [key, c] : counts) h -= c / n * std::log(c / n);
    return h;
  };
  const double h_class = entropy(cc), h_cluster = entropy(ck);
  double h_class_given_cluster = 0.0, h_cluster_given_class = 0.0;
  for (const auto& [key, c] : joint) {
    h_class_given_cluster -= c / n * std::log(c / ck[key.first]);
    h_cluster_given_class -= c / n * std::log(c / cc[key.second]);
  }
  VMeasure out;
  out.homogeneity = h_class == 0.0 ? 1.0 : 1.0 - h_class_given_cluster / h_class;
  out.completeness = h_cluster == 0.0 ? 1.0 : 1.0 - h_cluster_given_class / h_cluster;
  const double denom = beta * out.homogeneity + out.completeness;
  out.v = denom == 0.0 ? 0.0 : (1.0 + beta) * out.homogeneity * out.completeness / denom;
  return out;
}

LeadLagClustering select_k_by_vmeasure(const Eigen::MatrixXd& m, const std::vector<int>& node_ids,
                                       std::span<const int> classes, const std::vector<std::size_t>& k_range,
                                       double beta, std::uint64_t seed) {
  if (k_range.empty()) throw PreconditionError("select_k_by_vmeasure: empty k range");
  if (classes.size() != node_ids.size()) throw PreconditionError("select_k_by_vmeasure: one class per node required");
  auto ks = k_range;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  std::optional<LeadLagClustering> best;
  for (auto k : ks) {
    auto c = hermitian_cluster(m, node_ids, k, seed);
    c.beta = beta;
    c.v_score = v_measure(c.partition.assignment, classes, beta).v;
    if (!best || c.v_score > best->v_score) best = std::move(c);
  }
  return *best;
}

void write_edges_csv(const std::filesystem::path& path, const LeadLagMatrix& m, const std::vector<int>& ids) {
  struct Edge {
    int leader, lagger;
    double strength;
  };
  std::vector<Edge> edges;
  for (Eigen::Index i = 0; i < m.strengths.rows(); ++i)
    for (Eigen::Index j = 0; j < m.strengths.cols(); ++j)
      if (m.strengths(i, j) > 0.0)
        edges.push_back({ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)], m.strengths(i, j)});
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.strength > b.strength; });
  auto out = csv::open_output(path);
  out << "leader,lagger,strength,lag\n";
  for (const auto& e : edges)
    out << e.leader << ',' << e.lagger << ',' << csv::format_double(e.strength) << ',' << m.lag << '\n';
}

void write_clustering_csv(const std::filesystem::path& path, const LeadLagClustering& c) {
  auto out = csv::open_output(path);
  out << "asset,cluster,rank\n";
  for (std::size_t i = 0; i < c.partition.size(); ++i)
    out << c.partition.nodes[i] << ',' << c.partition.assignment[i] << ',' << c.rank_of(c.partition.assignment[i])
        << '\n';
}

}  // namespace macroregime
