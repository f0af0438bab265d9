#include "macroregime/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "macroregime/common.hpp"

namespace macroregime {

Eigen::MatrixXd to_distance(const Eigen::MatrixXd& corr) {
  if (corr.rows() != corr.cols()) throw PreconditionError("to_distance: matrix is not square");
  const auto n = corr.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double a = std::min(std::abs(corr(i, j)), 1.0);
      const double v = std::sqrt(2.0 * (1.0 - a));
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

Dendrogram average_linkage(const Eigen::MatrixXd& distance) {
  const auto n = static_cast<std::size_t>(distance.rows());
  if (distance.rows() != distance.cols()) throw PreconditionError("average_linkage: matrix is not square");
  if (n == 0) throw PreconditionError("average_linkage: empty distance matrix");

  Dendrogram tree;
  tree.leaves = n;
  if (n == 1) return tree;

  Eigen::MatrixXd d = distance;
  std::vector<bool> active(n, true);
  std::vector<std::size_t> size(n, 1);
  std::vector<std::size_t> label(n);  // provisional cluster id held by each slot
  std::iota(label.begin(), label.end(), 0);

  struct Raw {
    std::size_t a, b;
    double h;
    std::size_t size;
  };
  std::vector<Raw> raw;
  raw.reserve(n - 1);

  constexpr auto npos = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> chain;
  std::size_t remaining = n;
  while (remaining > 1) {
    if (chain.empty())
      chain.push_back(static_cast<std::size_t>(std::find(active.begin(), active.end(), true) - active.begin()));
    std::size_t a = 0, b = 0;
    while (true) {
      a = chain.back();
      const std::size_t prev = chain.size() >= 2 ? chain[chain.size() - 2] : npos;
      std::size_t best = prev;
      double best_d = prev != npos ? d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(prev))
                                   : std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < n; ++c) {
        if (!active[c] || c == a) continue;
        const double dc = d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      if (best == prev) {
        b = prev;
        break;
      }
      chain.push_back(best);
    }
    chain.pop_back();
    chain.pop_back();

    const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
    const double h = d(ia, ib);
    const double sa = static_cast<double>(size[a]), sb = static_cast<double>(size[b]);
    raw.push_back({label[a], label[b], h, size[a] + size[b]});

    // Lance-Williams update for group average; slot b holds the union.
    for (std::size_t c = 0; c < n; ++c) {
      if (!active[c] || c == a || c == b) continue;
      const auto ic = static_cast<Eigen::Index>(c);
      const double v = (sa * d(ia, ic) + sb * d(ib, ic)) / (sa + sb);
      d(ib, ic) = v;
      d(ic, ib) = v;
    }
    active[a] = false;
    size[b] += size[a];
    label[b] = n + raw.size() - 1;
    --remaining;
  }

  // Stable sort by height keeps children ahead of parents (heights are monotone).
  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return raw[x].h < raw[y].h; });
  std::vector<std::size_t> remap(n + raw.size());
  std::iota(remap.begin(), remap.begin() + static_cast<std::ptrdiff_t>(n), 0);
  for (std::size_t k = 0; k < order.size(); ++k) remap[n + order[k]] = n + k;

  tree.merges.reserve(raw.size());
  for (auto r : order) {
    auto l = remap[raw[r].a], rr = remap[raw[r].b];
    if (l > rr) std::swap(l, rr);
    tree.merges.push_back({l, rr, raw[r].h, raw[r].size});
  }
  return tree;
}

Eigen::MatrixXd cophenetic_matrix(const Dendrogram& tree) {
  const auto n = tree.leaves;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<std::vector<std::size_t>> members(n + tree.merges.size());
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  for (std::size_t k = 0; k < tree.merges.size(); ++k) {
    const auto& m = tree.merges[k];
    for (auto i : members[m.left])
      for (auto j : members[m.right]) {
        c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.height;
        c(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = m.height;
      }
    auto& dst = members[n + k];
    dst = std::move(members[m.left]);
    dst.insert(dst.end(), members[m.right].begin(), members[m.right].end());
    members[m.right].clear();
  }
  return c;
}

Eigen::VectorXd cophenetic_condensed(const Dendrogram& tree) {
  const auto c = cophenetic_matrix(tree);
  const auto n = c.rows();
  Eigen::VectorXd v(n * (n - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) v(k++) = c(i, j);
  return v;
}

}  // namespace macroregime
