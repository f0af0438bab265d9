#include "macroregime/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "macroregime/csv.hpp"

namespace macroregime {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw PreconditionError("correlation inputs differ in length");
  if (x.size() < 3) throw PreconditionError("correlation needs at least 3 joint observations");
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
}

void check_not_constant(std::span<const double> x, std::span<const double> y) {
  if (is_constant(x) || is_constant(y))
    throw UndefinedCorrelation("correlation undefined for a constant series");
}

double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

bool has_ties(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) != s.end();
}

// Binary indexed tree over compressed y-ranks.
class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
  void add(std::size_t i) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  // number of inserted ranks < i
  long long prefix(std::size_t i) const {
    long long s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<long long> tree_;
};

struct ElementCounts {
  std::vector<long long> concordant;  // per observation: partners ordered the same way
  std::vector<long long> discordant;  // per observation: partners ordered oppositely
};

// Counts, for every observation, how many others are concordant/discordant
// with it. Equivalent to tallying the adjacent exchanges each element takes
// part in while sorting y into x-order, done with a Fenwick tree in O(l log l).
ElementCounts element_counts(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  std::vector<double> ys(y.begin(), y.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  std::vector<std::size_t> yrank(n);
  for (std::size_t i = 0; i < n; ++i)
    yrank[i] = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), y[i]) - ys.begin());

  ElementCounts out{std::vector<long long>(n, 0), std::vector<long long>(n, 0)};

  // Smaller x first: partner with smaller y is concordant, larger y discordant.
  {
    Fenwick fw(ys.size());
    long long inserted = 0;
    std::size_t g = 0;
    while (g < n) {
      std::size_t h = g;
      while (h < n && x[order[h]] == x[order[g]]) ++h;
      for (std::size_t k = g; k < h; ++k) {
        const auto e = order[k];
        const long long below = fw.prefix(yrank[e]);
        const long long above = inserted - fw.prefix(yrank[e] + 1);
        out.concordant[e] += below;
        out.discordant[e] += above;
      }
      for (std::size_t k = g; k < h; ++k) fw.add(yrank[order[k]]);
      inserted += static_cast<long long>(h - g);
      g = h;
    }
  }
  // Larger x: partner with larger y is concordant, smaller y discordant.
  {
    Fenwick fw(ys.size());
    long long inserted = 0;
    std::size_t h = n;
    while (h > 0) {
      std::size_t g = h;
      while (g > 0 && x[order[g - 1]] == x[order[h - 1]]) --g;
      for (std::size_t k = g; k < h; ++k) {
        const auto e = order[k];
        const long long below = fw.prefix(yrank[e]);
        const long long above = inserted - fw.prefix(yrank[e] + 1);
        out.concordant[e] += above;
        out.discordant[e] += below;
      }
      for (std::size_t k = g; k < h; ++k) fw.add(yrank[order[k]]);
      inserted += static_cast<long long>(h - g);
      h = g;
    }
  }
  return out;
}

}  // namespace

std::string to_string(CorrelationMethod m) {
  switch (m) {
    case CorrelationMethod::pearson: return "pearson";
    case CorrelationMethod::spearman: return "spearman";
    case CorrelationMethod::kendall: return "kendall";
    case CorrelationMethod::weighted_kendall: return "weighted_kendall";
  }
  return "?";
}

CorrelationMethod parse_correlation_method(std::string_view text) {
  for (auto m : {CorrelationMethod::pearson, CorrelationMethod::spearman, CorrelationMethod::kendall,
                 CorrelationMethod::weighted_kendall})
    if (to_string(m) == text) return m;
  throw ParseError("unknown correlation method '" + std::string(text) + "'");
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0 || is_constant(x) || is_constant(y))
    throw UndefinedCorrelation("pearson undefined for a constant series");
  return clamp_unit(sxy / std::sqrt(sxx * syy));
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  check_not_constant(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  if (has_ties(x) || has_ties(y)) return pearson(rx, ry);
  const auto l = static_cast<double>(x.size());
  double sum_d2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = rx[i] - ry[i];
    sum_d2 += d * d;
  }
  return clamp_unit(1.0 - 6.0 * sum_d2 / (l * (l * l - 1.0)));
}

double kendall(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  check_not_constant(x, y);
  const auto counts = element_counts(x, y);
  const long long c2 = std::accumulate(counts.concordant.begin(), counts.concordant.end(), 0LL);
  const long long d2 = std::accumulate(counts.discordant.begin(), counts.discordant.end(), 0LL);
  const auto n = static_cast<long long>(x.size());
  // c2, d2 count every pair twice
  return static_cast<double>((c2 - d2) / 2) / static_cast<double>(n * (n - 1) / 2);
}

double weighted_kendall_by_weight(std::span<const double> x, std::span<const double> y,
                                  std::span<const double> weights) {
  check_pair(x, y);
  if (weights.size() != x.size()) throw PreconditionError("weighted_kendall: weight count mismatch");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw PreconditionError("weighted_kendall: weights must be positive");
  check_not_constant(x, y);
  const auto counts = element_counts(x, y);
  double num = 0, mass = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += weights[i] * static_cast<double>(counts.concordant[i] - counts.discordant[i]);
    mass += weights[i];
  }
  const double den = static_cast<double>(x.size() - 1) * mass;
  return clamp_unit(num / den);
}

double weighted_kendall(std::span<const double> x, std::span<const double> y,
                        std::span<const std::size_t> recency_ranks) {
  const std::size_t n = x.size();
  if (recency_ranks.size() != n) throw PreconditionError("weighted_kendall: rank count mismatch");
  std::vector<bool> seen(n, false);
  for (auto r : recency_ranks) {
    if (r >= n || seen[r]) throw PreconditionError("weighted_kendall: recency ranks are not a permutation of 0..l-1");
    seen[r] = true;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / (static_cast<double>(recency_ranks[i]) + 1.0);
  return weighted_kendall_by_weight(x, y, w);
}

std::vector<std::size_t> recency_ranks(std::size_t length) {
  std::vector<std::size_t> r(length);
  for (std::size_t t = 0; t < length; ++t) r[t] = length - 1 - t;
  return r;
}

double correlate(CorrelationMethod method, std::span<const double> x, std::span<const double> y) {
  switch (method) {
    case CorrelationMethod::pearson: return pearson(x, y);
    case CorrelationMethod::spearman: return spearman(x, y);
    case CorrelationMethod::kendall: return kendall(x, y);
    case CorrelationMethod::weighted_kendall: {
      const auto ranks = recency_ranks(x.size());
      return weighted_kendall(x, y, ranks);
    }
  }
  throw PreconditionError("unknown correlation method");
}

// Windows ----------------------------------------------------------------------

void WindowSpec::validate(std::size_t asset_count, Diagnostics* diag) const {
  if (length < 3) throw PreconditionError("window length must be >= 3");
  if (stride < 1) throw PreconditionError("window stride must be >= 1");
  if (asset_count > 0 && length < asset_count)
    warn(diag, "window length " + std::to_string(length) + " is shorter than the asset count " +
                   std::to_string(asset_count) + " (l/N < 1); correlations will be noisy");
}

std::vector<std::size_t> window_end_rows(std::size_t rows, const WindowSpec& spec) {
  if (spec.length < 3 || spec.stride < 1) throw PreconditionError("invalid window spec");
  if (rows < spec.length)
    throw PreconditionError("panel has " + std::to_string(rows) + " rows, fewer than the window length " +
                            std::to_string(spec.length));
  std::vector<std::size_t> ends;
  for (std::size_t e = rows - 1;; e -= spec.stride) {
    ends.push_back(e);
    if (e < spec.length - 1 + spec.stride) break;
  }
  std::reverse(ends.begin(), ends.end());
  return ends;
}

Eigen::MatrixXd window_matrix(const ReturnsPanel& panel, std::size_t end_row, const WindowSpec& spec,
                              Diagnostics* diag) {
  const auto N = static_cast<Eigen::Index>(panel.cols());
  const auto l = spec.length;
  const std::size_t start = end_row + 1 - l;
  std::vector<std::span<const double>> cols;
  std::vector<bool> constant(static_cast<std::size_t>(N));
  cols.reserve(static_cast<std::size_t>(N));
  for (Eigen::Index j = 0; j < N; ++j) {
    cols.emplace_back(panel.values.col(j).data() + start, l);
    constant[static_cast<std::size_t>(j)] = is_constant(cols.back());
    if (constant[static_cast<std::size_t>(j)])
      warn(diag, "asset '" + panel.assets[static_cast<std::size_t>(j)].name +
                     "' is constant in the window ending " + panel.dates[end_row].to_string() +
                     "; its correlations are set to 0");
  }

  std::vector<std::size_t> ranks;
  std::vector<double> weights;
  if (spec.method == CorrelationMethod::weighted_kendall) {
    ranks = recency_ranks(l);
    weights.resize(l);
    for (std::size_t t = 0; t < l; ++t) weights[t] = 1.0 / (static_cast<double>(ranks[t]) + 1.0);
  }

  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = i + 1; j < N; ++j) {
      double r = 0.0;
      if (!constant[static_cast<std::size_t>(i)] && !constant[static_cast<std::size_t>(j)]) {
        const auto& x = cols[static_cast<std::size_t>(i)];
        const auto& y = cols[static_cast<std::size_t>(j)];
        r = spec.method == CorrelationMethod::weighted_kendall ? weighted_kendall_by_weight(x, y, weights)
                                                               : correlate(spec.method, x, y);
      }
      m(i, j) = r;
      m(j, i) = r;
    }
  }
  return m;
}

namespace {

CorrelationStack make_stack_shell(const ReturnsPanel& panel, const WindowSpec& spec, Diagnostics* diag) {
  spec.validate(panel.cols(), diag);
  CorrelationStack stack;
  stack.spec = spec;
  stack.end_rows = window_end_rows(panel.rows(), spec);
  for (auto e : stack.end_rows) stack.end_dates.push_back(panel.dates[e]);
  stack.matrices.resize(stack.end_rows.size());
  return stack;
}

}  // namespace

CorrelationStack windowed_stack(const ReturnsPanel& panel, const WindowSpec& spec, Diagnostics* diag) {
  auto stack = make_stack_shell(panel, spec, diag);
  const auto count = static_cast<std::ptrdiff_t>(stack.size());
  std::vector<Diagnostics> local(stack.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t w = 0; w < count; ++w) {
    const auto k = static_cast<std::size_t>(w);
    stack.matrices[k] = window_matrix(panel, stack.end_rows[k], spec, &local[k]);
  }
  if (diag != nullptr)
    for (const auto& d : local) diag->merge(d);
  return stack;
}

namespace serial {

CorrelationStack windowed_stack(const ReturnsPanel& panel, const WindowSpec& spec, Diagnostics* diag) {
  auto stack = make_stack_shell(panel, spec, diag);
  for (std::size_t k = 0; k < stack.size(); ++k)
    stack.matrices[k] = window_matrix(panel, stack.end_rows[k], spec, diag);
  return stack;
}

}  // namespace serial

Eigen::VectorXd condensed(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  Eigen::VectorXd v(n * (n - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) v(k++) = m(i, j);
  return v;
}

// Serialization ------------------------------------------------------------------

namespace {
constexpr int kStackFormatVersion = 1;
}

void write_stack(const std::filesystem::path& dir, const CorrelationStack& stack,
                 const std::vector<std::string>& asset_names) {
  std::filesystem::create_directories(dir);
  {
    auto out = csv::open_output(dir / "window.csv");
    out << "key,value\n"
        << "format_version," << kStackFormatVersion << '\n'
        << "length," << stack.spec.length << '\n'
        << "stride," << stack.spec.stride << '\n'
        << "method," << to_string(stack.spec.method) << '\n';
  }
  auto manifest = csv::open_output(dir / "manifest.csv");
  manifest << "index,end_date,end_row,file\n";
  for (std::size_t k = 0; k < stack.size(); ++k) {
    const std::string file = "corr_" + stack.end_dates[k].to_string() + ".csv";
    manifest << k << ',' << stack.end_dates[k].to_string() << ',' << stack.end_rows[k] << ',' << file << '\n';
    auto out = csv::open_output(dir / file);
    const auto& m = stack.matrices[k];
    out << "asset";
    for (const auto& name : asset_names) out << ',' << name;
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      out << asset_names[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << csv::format_double(m(i, j));
      out << '\n';
    }
  }
}

CorrelationStack read_stack(const std::filesystem::path& dir) {
  CorrelationStack stack;
  std::map<std::string, std::string> kv;
  {
    const auto text = csv::read_file(dir / "window.csv");
    std::size_t start = text.find('\n') + 1;
    while (start < text.size()) {
      auto nl = text.find('\n', start);
      if (nl == std::string::npos) nl = text.size();
      const auto f = csv::split_line(std::string_view(text).substr(start, nl - start));
      if (f.size() == 2) kv[f[0]] = f[1];
      start = nl + 1;
    }
  }
  if (kv["format_version"] != std::to_string(kStackFormatVersion))
    throw ParseError(dir.string() + ": unsupported stack format version '" + kv["format_version"] + "'");
  stack.spec.length = std::stoul(kv["length"]);
  stack.spec.stride = std::stoul(kv["stride"]);
  stack.spec.method = parse_correlation_method(kv["method"]);

  const auto manifest = csv::read_file(dir / "manifest.csv");
  std::size_t start = manifest.find('\n') + 1;
  while (start < manifest.size()) {
    auto nl = manifest.find('\n', start);
    if (nl == std::string::npos) nl = manifest.size();
    const auto f = csv::split_line(std::string_view(manifest).substr(start, nl - start));
    start = nl + 1;
    if (f.size() != 4) continue;
    stack.end_dates.push_back(Date::parse(f[1]));
    stack.end_rows.push_back(std::stoul(f[2]));
    const auto body = csv::read_file(dir / f[3]);
    std::vector<std::vector<double>> rows;
    std::size_t s = body.find('\n') + 1;
    while (s < body.size()) {
      auto e = body.find('\n', s);
      if (e == std::string::npos) e = body.size();
      const auto cells = csv::split_line(std::string_view(body).substr(s, e - s));
      s = e + 1;
      if (cells.size() < 2) continue;
      std::vector<double> row;
      for (std::size_t c = 1; c < cells.size(); ++c) {
        double v = 0;
        if (!csv::parse_double(cells[c], v)) throw ParseError(dir.string() + "/" + f[3] + ": bad value");
        row.push_back(v);
      }
      rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n)
        throw ParseError(dir.string() + "/" + f[3] + ": matrix is not square");
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    stack.matrices.push_back(std::move(m));
  }
  return stack;
}

}  // namespace macroregime
