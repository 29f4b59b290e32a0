#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "catenc/metrics.hpp"

namespace catenc {

/// Number of ordered pairs (i, j), i != j, on which the two relations disagree.
std::size_t symdiff_distance(const Relation& a, const Relation& b);

/// Ranking with ties: tier[i] in 1..T, every tier non-empty; lower tier wins.
struct WeakOrder {
  std::vector<int> tier;

  std::size_t size() const { return tier.size(); }
  int n_tiers() const;
  bool beats(std::size_t i, std::size_t j) const { return tier[i] < tier[j]; }
  Relation to_relation(std::vector<std::string> labels) const;
  /// Renumbers tiers to 1..T preserving order.
  static WeakOrder normalized(std::vector<int> tier);
  /// Throws unless tiers are contiguous from 1.
  void validate() const;
};

struct Consensus {
  WeakOrder order;
  std::size_t total_distance = 0;
  bool exact = false;
};

/// Sum of symdiff distances from each relation to the weak order.
std::size_t total_distance(const std::vector<Relation>& relations, const WeakOrder& order);

/// Exhaustive search for up to kMaxExhaustive conditions; ties go to the
/// lexicographically smallest tier vector.
inline constexpr std::size_t kMaxExhaustive = 6;
Consensus consensus_exhaustive(const std::vector<Relation>& relations);

/// Steepest-descent search over single-item tier moves from several starts.
Consensus consensus_local_search(const std::vector<Relation>& relations, int restarts = 50, std::uint64_t seed = 0);

/// Exhaustive when the condition count allows, local search otherwise.
Consensus consensus_weak_order(const std::vector<Relation>& relations, std::uint64_t seed = 0);

struct Merge {
  std::size_t a = 0;  // cluster ids: leaves are 0..n-1, merge k creates n+k
  std::size_t b = 0;
  double height = 0.0;
  std::size_t size = 0;
};

struct Dendrogram {
  std::size_t n_leaves = 0;
  std::vector<Merge> merges;
};

/// Complete-linkage agglomeration over a symmetric distance matrix. Ties in
/// merge height go to the pair with the smallest leaf indices.
Dendrogram complete_linkage(const std::vector<std::vector<double>>& distance);
Dendrogram complete_linkage(const std::vector<Relation>& relations);

}  // namespace catenc
