#include "macroregime/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace macroregime::oracle {

namespace {

int sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

double weighted_kendall(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<std::size_t>& ranks) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double w = 1.0 / static_cast<double>(ranks[i] + 1) + 1.0 / static_cast<double>(ranks[j] + 1);
      num += w * sign(x[i] - x[j]) * sign(y[i] - y[j]);
      den += w;
    }
  return num / den;
}

double kendall(const std::vector<double>& x, const std::vector<double>& y) {
  long long score = 0;
  const auto n = static_cast<long long>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) score += sign(x[i] - x[j]) * sign(y[i] - y[j]);
  return static_cast<double>(score) / (static_cast<double>(n * (n - 1)) / 2.0);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> out;
  for (double a : v) {
    double less = 0, equal = 0;
    for (double b : v) {
      less += b < a;
      equal += b == a;
    }
    out.push_back(less + (equal + 1.0) / 2.0);
  }
  return out;
}

std::vector<double> betweenness(const Matrix& d) {
  const std::size_t n = d.size();
  if (n > 8) throw std::invalid_argument("oracle::betweenness is limited to 8 nodes");
  std::vector<double> bc(n, 0.0);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t t = s + 1; t < n; ++t) {
      std::vector<std::pair<double, std::vector<std::size_t>>> paths;
      std::vector<std::size_t> path{s};
      std::vector<bool> on(n, false);
      on[s] = true;
      std::function<void(std::size_t, double)> walk = [&](std::size_t u, double len) {
        if (u == t) {
          paths.emplace_back(len, path);
          return;
        }
        for (std::size_t v = 0; v < n; ++v)
          if (!on[v] && v != u && d[u][v] > 0.0) {
            on[v] = true;
            path.push_back(v);
            walk(v, len + d[u][v]);
            path.pop_back();
            on[v] = false;
          }
      };
      walk(s, 0.0);
      if (paths.empty()) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : paths) best = std::min(best, p.first);
      const double tol = 1e-9 * std::max(1.0, best);
      double total = 0.0;
      std::vector<double> through(n, 0.0);
      for (const auto& p : paths)
        if (p.first <= best + tol) {
          total += 1.0;
          for (std::size_t i = 1; i + 1 < p.second.size(); ++i) through[p.second[i]] += 1.0;
        }
      for (std::size_t v = 0; v < n; ++v) bc[v] += through[v] / total;
    }
  return bc;
}

namespace {

double modularity(const Matrix& a, const std::vector<int>& labels) {
  const std::size_t n = a.size();
  double two_m = 0.0;
  std::vector<double> k(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      two_m += a[i][j];
      k[i] += a[i][j];
    }
  if (two_m <= 0.0) return 0.0;
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (labels[i] == labels[j]) q += a[i][j] - k[i] * k[j] / two_m;
  return q / two_m;
}

}  // namespace

double signed_modularity(const Matrix& w, const std::vector<int>& labels) {
  const std::size_t n = w.size();
  Matrix pos(n, std::vector<double>(n, 0.0)), neg = pos;
  double wp = 0.0, wn = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (w[i][j] > 0) {
        pos[i][j] = w[i][j];
        wp += w[i][j];
      } else if (w[i][j] < 0) {
        neg[i][j] = -w[i][j];
        wn += -w[i][j];
      }
    }
  if (wp + wn == 0.0) return 0.0;
  return wp / (wp + wn) * modularity(pos, labels) - wn / (wp + wn) * modularity(neg, labels);
}

BestPartition exhaustive_signed_modularity(const Matrix& w) {
  const std::size_t n = w.size();
  if (n > 10 || n == 0) throw std::invalid_argument("oracle::exhaustive_signed_modularity needs 1..10 nodes");
  BestPartition best;
  best.q = -std::numeric_limits<double>::infinity();
  // restricted growth strings enumerate each set partition once
  std::vector<int> labels(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int used) {
    if (i == n) {
      const double q = signed_modularity(w, labels);
      if (q > best.q + 1e-12) {
        best.q = q;
        best.labels = labels;
      }
      return;
    }
    for (int c = 0; c <= used; ++c) {
      labels[i] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  labels[0] = 0;
  rec(1, 1);
  return best;
}

double ari(const std::vector<int>& a, const std::vector<int>& b) {
  double same_both = 0, same_a = 0, same_b = 0, diff_both = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      if (sa && sb) same_both += 1;
      else if (sa) same_a += 1;
      else if (sb) same_b += 1;
      else diff_both += 1;
    }
  // Hubert-Arabie in pair-count form
  const double num = 2.0 * (same_both * diff_both - same_a * same_b);
  const double den = (same_both + same_a) * (same_a + diff_both) + (same_both + same_b) * (same_b + diff_both);
  return den == 0.0 ? 1.0 : num / den;
}

Matrix average_linkage_cophenetic(const Matrix& d) {
  const std::size_t n = d.size();
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters.push_back({i});
  Matrix coph(n, std::vector<double>(n, 0.0));
  while (clusters.size() > 1) {
    std::size_t ba = 0, bb = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < clusters.size(); ++a)
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        double sum = 0.0;
        for (auto i : clusters[a])
          for (auto j : clusters[b]) sum += d[i][j];
        const double mean = sum / static_cast<double>(clusters[a].size() * clusters[b].size());
        if (mean < best) {
          best = mean;
          ba = a;
          bb = b;
        }
      }
    for (auto i : clusters[ba])
      for (auto j : clusters[bb]) coph[i][j] = coph[j][i] = best;
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
  }
  return coph;
}

}  // namespace macroregime::oracle
