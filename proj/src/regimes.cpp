#include "macroregime/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "macroregime/csv.hpp"
#include "macroregime/partition.hpp"

namespace macroregime {

void RegimeLabeling::validate() const {
  if (labels.size() != dates.size()) throw PreconditionError("regime labeling: label and date counts differ");
  if (!end_rows.empty() && end_rows.size() != dates.size())
    throw PreconditionError("regime labeling: end-row and date counts differ");
  std::vector<int> used(k, 0);
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= k) throw PreconditionError("regime labeling: label outside [0, K)");
    used[static_cast<std::size_t>(l)] = 1;
  }
  if (std::find(used.begin(), used.end(), 0) != used.end())
    throw PreconditionError("regime labeling: a regime id has no member date");
}

std::vector<std::size_t> RegimeLabeling::members(int regime) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == regime) out.push_back(i);
  return out;
}

std::string to_string(ElbowRule r) { return r == ElbowRule::curvature ? "curvature" : "log_curvature"; }

ElbowRule parse_elbow_rule(std::string_view text) {
  if (text == "curvature") return ElbowRule::curvature;
  if (text == "log_curvature") return ElbowRule::log_curvature;
  throw ParseError("unknown elbow rule '" + std::string(text) + "'");
}

std::size_t elbow_k(std::span<const std::size_t> ks, std::span<const double> inertia,
                    std::span<const std::size_t> k_range, ElbowRule rule) {
  if (ks.size() != inertia.size()) throw PreconditionError("elbow_k: curve lengths differ");
  if (k_range.empty()) throw PreconditionError("elbow_k: empty K range");
  if (k_range.size() == 1) return k_range.front();

  const double top = *std::max_element(inertia.begin(), inertia.end());
  const double floor = std::max(top, 1.0) * 1e-12;
  auto value = [&](std::size_t i) {
    return rule == ElbowRule::log_curvature ? std::log(std::max(inertia[i], floor)) : inertia[i];
  };
  auto index_of = [&](std::size_t k) -> std::ptrdiff_t {
    const auto it = std::find(ks.begin(), ks.end(), k);
    return it == ks.end() ? -1 : it - ks.begin();
  };

  std::size_t best = k_range.front();
  double best_score = -std::numeric_limits<double>::infinity();
  bool scored = false;
  for (std::size_t k : k_range) {
    const auto i = index_of(k), lo = index_of(k - 1), hi = index_of(k + 1);
    if (i < 0 || lo < 0 || hi < 0) continue;
    const double score = value(static_cast<std::size_t>(lo)) - 2.0 * value(static_cast<std::size_t>(i)) +
                         value(static_cast<std::size_t>(hi));
    if (score > best_score) {
      best_score = score;
      best = k;
      scored = true;
    }
  }
  if (!scored) throw PreconditionError("elbow_k: no candidate K has neighbours on both sides of the curve");
  return best;
}

RegimeLabeling kmeans_regimes(const Embedding& embedding, const std::vector<Date>& dates,
                              const RegimeOptions& options, Diagnostics* diag) {
  const auto n = static_cast<std::size_t>(embedding.points.rows());
  if (dates.size() != n) throw PreconditionError("kmeans_regimes: one date per embedded point required");
  std::vector<std::size_t> range = options.fixed_k ? std::vector<std::size_t>{*options.fixed_k} : options.k_range;
  std::sort(range.begin(), range.end());
  range.erase(std::unique(range.begin(), range.end()), range.end());
  if (range.empty()) throw PreconditionError("kmeans_regimes: empty K range");
  if (range.front() < 2 || range.back() >= n)
    throw PreconditionError("kmeans_regimes: K range must lie within [2, " + std::to_string(n) + ")");

  RegimeLabeling out;
  out.dates = dates;
  out.embedding_dims = embedding.dims;
  out.explained_variance = embedding.explained_variance;
  const std::size_t lo = range.front() - 1, hi = std::min(range.back() + 1, n);
  KMeansOptions km;
  km.seed = options.seed;
  km.restarts = options.restarts;
  std::map<std::size_t, std::vector<int>> labels_by_k;
  for (std::size_t k = lo; k <= hi; ++k) {
    auto res = kmeans(embedding.points, k, km);
    out.k_candidates.push_back(k);
    out.inertia_curve.push_back(res.inertia);
    labels_by_k[k] = std::move(res.labels);
  }
  out.k = elbow_k(out.k_candidates, out.inertia_curve, range, options.elbow);
  out.labels = labels_by_k.at(out.k);
  const auto used = static_cast<std::size_t>(*std::max_element(out.labels.begin(), out.labels.end()) + 1);
  if (used != out.k) {
    warn(diag, "kmeans_regimes: only " + std::to_string(used) + " of " + std::to_string(out.k) +
                   " clusters non-empty; K reduced");
    out.k = used;
  }
  return out;
}

RegimeRun detect_regimes(CorrelationStack stack, const RegimeConfig& config, Diagnostics* diag) {
  RegimeRun run;
  run.stack = std::move(stack);
  run.similarity = similarity(run.stack, config.similarity, diag);
  Eigen::MatrixXd s = run.similarity.values;
  std::size_t filled = 0;
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      if (is_missing(s(i, j))) {
        s(i, j) = 0.0;
        ++filled;
      }
  if (filled > 0) warn(diag, "detect_regimes: " + std::to_string(filled) + " undefined similarities set to 0");
  run.embedding = pca_embed(s, config.pca, diag);
  run.labeling = kmeans_regimes(run.embedding, run.stack.end_dates, config.kmeans, diag);
  run.labeling.end_rows = run.stack.end_rows;
  run.labeling.stride = run.stack.spec.stride;
  return run;
}

RegimeRun detect_regimes(const ReturnsPanel& panel, const RegimeConfig& config, Diagnostics* diag) {
  return detect_regimes(windowed_stack(panel, config.window, diag), config, diag);
}

std::vector<std::vector<std::size_t>> regime_rows(const RegimeLabeling& labeling, std::size_t panel_rows) {
  if (labeling.end_rows.size() != labeling.labels.size())
    throw PreconditionError("regime_rows: labeling carries no window end rows");
  std::vector<std::vector<std::size_t>> out(labeling.k);
  for (std::size_t w = 0; w < labeling.labels.size(); ++w) {
    const std::size_t end = labeling.end_rows[w];
    if (end >= panel_rows) throw PreconditionError("regime_rows: window end beyond the panel");
    const std::size_t first = end + 1 >= labeling.stride ? end + 1 - labeling.stride : 0;
    for (std::size_t r = first; r <= end; ++r) out[static_cast<std::size_t>(labeling.labels[w])].push_back(r);
  }
  return out;
}

// Stability ------------------------------------------------------------------------

double labeling_ari(const RegimeLabeling& a, const RegimeLabeling& b, std::size_t* common) {
  std::map<Date, int> by_date;
  for (std::size_t i = 0; i < b.dates.size(); ++i) by_date.emplace(b.dates[i], b.labels[i]);
  std::vector<int> la, lb;
  for (std::size_t i = 0; i < a.dates.size(); ++i) {
    const auto it = by_date.find(a.dates[i]);
    if (it == by_date.end()) continue;
    la.push_back(a.labels[i]);
    lb.push_back(it->second);
  }
  if (common != nullptr) *common = la.size();
  return adjusted_rand_index(la, lb);
}

std::vector<Perturbation> default_perturbations(const RegimeConfig& base, const RegimeLabeling& base_labels) {
  std::vector<Perturbation> out;
  out.push_back({"identity", base});
  for (std::uint64_t d : {1ULL, 2ULL}) {
    auto c = base;
    c.kmeans.seed = base.kmeans.seed + d;
    out.push_back({"seed+" + std::to_string(d), c});
  }
  for (const auto& [name, factor] : {std::pair{"window*0.8", 0.8}, std::pair{"window*1.2", 1.2}}) {
    auto c = base;
    c.window.length = std::max<std::size_t>(
        3, static_cast<std::size_t>(std::lround(static_cast<double>(base.window.length) * factor)));
    out.push_back({name, c});
  }
  const std::size_t dims = base_labels.embedding_dims;
  if (dims > 1) {
    auto c = base;
    c.pca = PcaRequest::count(dims - 1);
    out.push_back({"dims-1", c});
  }
  {
    auto c = base;
    c.pca = PcaRequest::count(dims + 1);
    out.push_back({"dims+1", c});
  }
  if (base_labels.k > 2) {
    auto c = base;
    c.kmeans.fixed_k = base_labels.k - 1;
    out.push_back({"k-1", c});
  }
  {
    auto c = base;
    c.kmeans.fixed_k = base_labels.k + 1;
    out.push_back({"k+1", c});
  }
  return out;
}

std::vector<StabilityRow> stability_report(const ReturnsPanel& panel, const RegimeLabeling& base,
                                           const std::vector<Perturbation>& perturbations, Diagnostics* diag) {
  std::vector<StabilityRow> rows;
  for (const auto& p : perturbations) {
    StabilityRow row;
    row.name = p.name;
    try {
      Diagnostics local;
      const auto run = detect_regimes(panel, p.config, &local);
      row.k = run.labeling.k;
      row.ari = labeling_ari(base, run.labeling, &row.common_dates);
    } catch (const Error& e) {
      warn(diag, "stability perturbation '" + p.name + "' failed: " + e.what());
    }
    rows.push_back(row);
  }
  return rows;
}

// Export -------------------------------------------------------------------------

void write_labels_csv(const std::filesystem::path& path, const RegimeLabeling& labeling) {
  auto out = csv::open_output(path);
  out << "date,regime_id\n";
  for (std::size_t i = 0; i < labeling.dates.size(); ++i)
    out << labeling.dates[i].to_string() << ',' << labeling.labels[i] << '\n';
}

RegimeLabeling read_labels_csv(const std::filesystem::path& path) {
  const auto text = csv::read_file(path);
  RegimeLabeling out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  int max_label = -1;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const auto line = csv::trim(std::string_view(text).substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    if (line_no == 1) {
      if (fields.size() != 2 || fields[0] != "date" || fields[1] != "regime_id")
        throw ParseError(path.string() + ": expected header 'date,regime_id'");
      continue;
    }
    if (fields.size() != 2) throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 2 fields");
    out.dates.push_back(Date::parse(fields[0]));
    double v = 0;
    if (!csv::parse_double(fields[1], v) || v < 0 || v != std::floor(v))
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad regime id '" + fields[1] + "'");
    out.labels.push_back(static_cast<int>(v));
    max_label = std::max(max_label, static_cast<int>(v));
  }
  out.k = static_cast<std::size_t>(max_label + 1);
  return out;
}

void write_inertia_csv(const std::filesystem::path& path, const RegimeLabeling& labeling) {
  auto out = csv::open_output(path);
  out << "k,inertia,selected\n";
  for (std::size_t i = 0; i < labeling.k_candidates.size(); ++i)
    out << labeling.k_candidates[i] << ',' << csv::format_double(labeling.inertia_curve[i]) << ','
        << (labeling.k_candidates[i] == labeling.k ? 1 : 0) << '\n';
}

void write_explained_variance_csv(const std::filesystem::path& path, const Embedding& embedding) {
  auto out = csv::open_output(path);
  out << "component,ratio,cumulative,retained\n";
  double cum = 0.0;
  for (Eigen::Index i = 0; i < embedding.explained_ratio.size(); ++i) {
    cum += embedding.explained_ratio(i);
    out << i + 1 << ',' << csv::format_double(embedding.explained_ratio(i)) << ','
        << csv::format_double(std::min(cum, 1.0)) << ',' << (static_cast<std::size_t>(i) < embedding.dims ? 1 : 0)
        << '\n';
  }
}

void write_stability_csv(const std::filesystem::path& path, const std::vector<StabilityRow>& rows) {
  auto out = csv::open_output(path);
  out << "perturbation,ari,common_dates,k\n";
  for (const auto& r : rows)
    out << r.name << ',' << csv::format_double(r.ari) << ',' << r.common_dates << ',' << r.k << '\n';
}

}  // namespace macroregime
