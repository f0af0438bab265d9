#pragma once

#include <span>
#include <vector>

#include "macroregime/common.hpp"

namespace macroregime {

/// Cluster assignment over a set of node ids. Cluster ids are 0..k-1 and
/// every cluster is non-empty.
struct Partition {
  std::vector<int> nodes;
  std::vector<int> assignment;
  int k = 0;

  /// Builds a partition, renumbering labels by first occurrence.
  static Partition from_labels(std::vector<int> nodes, std::span<const int> labels);

  std::size_t size() const { return nodes.size(); }
  void validate() const;
};

/// Adjusted Rand index of two label vectors over the same items, from the
/// contingency table. Returns 1 when both labelings are trivial in the same way.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// ARI over the nodes the two partitions share. Warns when the node sets
/// differ; throws PreconditionError with fewer than 2 common nodes.
double ari(const Partition& p1, const Partition& p2, Diagnostics* diag = nullptr);

}  // namespace macroregime
