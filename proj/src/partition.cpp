#include "macroregime/partition.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "macroregime/embedding.hpp"

namespace macroregime {

Partition Partition::from_labels(std::vector<int> nodes, std::span<const int> labels) {
  if (nodes.size() != labels.size()) throw PreconditionError("partition: node and label counts differ");
  Partition p;
  p.nodes = std::move(nodes);
  p.assignment = relabel_by_first_occurrence(labels);
  p.k = p.assignment.empty() ? 0 : *std::max_element(p.assignment.begin(), p.assignment.end()) + 1;
  return p;
}

void Partition::validate() const {
  if (nodes.size() != assignment.size()) throw PreconditionError("partition: node and label counts differ");
  std::vector<int> sorted = nodes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw PreconditionError("partition: duplicate node id");
  std::vector<int> seen(static_cast<std::size_t>(std::max(k, 0)), 0);
  for (int a : assignment) {
    if (a < 0 || a >= k) throw PreconditionError("partition: label outside [0, k)");
    seen[static_cast<std::size_t>(a)] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw PreconditionError("partition: empty cluster");
}

namespace {

double choose2(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw PreconditionError("adjusted_rand_index: label vectors differ in length");
  if (a.size() < 2) throw PreconditionError("adjusted_rand_index needs at least 2 items");
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, n] : cells) index += choose2(n);
  for (const auto& [key, n] : rows) sum_rows += choose2(n);
  for (const auto& [key, n] : cols) sum_cols += choose2(n);
  const double total = choose2(static_cast<double>(a.size()));
  const double expected = sum_rows * sum_cols / total;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;  // both labelings all-singletons or both one cluster
  return (index - expected) / (max_index - expected);
}

double ari(const Partition& p1, const Partition& p2, Diagnostics* diag) {
  std::unordered_map<int, int> second;
  for (std::size_t i = 0; i < p2.nodes.size(); ++i) second.emplace(p2.nodes[i], p2.assignment[i]);
  std::vector<int> a, b;
  for (std::size_t i = 0; i < p1.nodes.size(); ++i) {
    const auto it = second.find(p1.nodes[i]);
    if (it == second.end()) continue;
    a.push_back(p1.assignment[i]);
    b.push_back(it->second);
  }
  if (a.size() < 2) throw PreconditionError("ari: fewer than 2 common nodes");
  if (a.size() != p1.nodes.size() || a.size() != p2.nodes.size())
    warn(diag, "ari: node sets differ; compared on " + std::to_string(a.size()) + " common nodes");
  return adjusted_rand_index(a, b);
}

}  // namespace macroregime
