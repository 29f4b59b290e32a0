#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "catenc/table.hpp"

namespace catenc {

struct CartOptions {
  std::size_t min_node_size = 7;   // minimum rows in a terminal node
  std::size_t min_split_size = 20;  // minimum rows in a node considered for splitting
  int max_depth = 10;
  int cv_folds = 10;
  /// Number of standard errors allowed above the minimum CV error.
  double se_rule = 1.0;
};

/// Orders the levels of `column` along a single axis: target mean for
/// regression, positive-class rate for binary, first principal component of
/// the level-by-class proportions for multiclass. Ties keep first-appearance
/// order. Returns level indices into `column.levels`; levels with no
/// training rows are appended last.
std::vector<std::size_t> order_levels(const Column& column, const Column& target, const Task& task);

/// Single-feature tree over ordered levels: splits are thresholds on the
/// ordered axis, so every node holds a contiguous run of levels.
struct LevelTree {
  struct Node {
    std::size_t lo = 0;  // range [lo, hi) on the ordered axis
    std::size_t hi = 0;
    int left = -1;
    int right = -1;
    double count = 0.0;
    double risk = 0.0;  // node impurity: SSE or n * Gini
    int depth = 0;
    double prune_alpha = 0.0;  // complexity at which this node becomes terminal
    double mean = 0.0;                // regression prediction
    std::vector<double> class_counts;  // classification
  };

  std::vector<std::string> ordered_levels;
  std::vector<Node> nodes;             // unpruned tree, root at 0
  std::vector<double> alpha_sequence;  // pruning path thresholds, ascending, starts at 0
  double alpha = 0.0;                  // selected complexity
  std::vector<int> leaf_of_level;      // terminal id (1..K) per ordered level
  std::vector<double> leaf_counts;     // training rows per terminal id (index id-1)
  int n_leaves = 1;

  /// Terminal id of a label; unseen labels go to the terminal node with the
  /// most training rows (smallest id on ties).
  int assign_leaf(std::string_view label) const;
  int largest_leaf() const;
  /// Terminal ranges [lo, hi) of the subtree pruned at complexity `a`.
  std::vector<std::pair<std::size_t, std::size_t>> leaves_at(double a) const;

 private:
  friend LevelTree grow_and_prune(const Column&, const Column&, const Task&, std::uint64_t, const CartOptions&);
  std::unordered_map<std::string, int> leaf_index_;
};

LevelTree grow_and_prune(const Column& column, const Column& target, const Task& task, std::uint64_t seed,
                         const CartOptions& options = {});

}  // namespace catenc
