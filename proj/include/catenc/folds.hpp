#pragma once

#include <cstdint>
#include <vector>

#include "catenc/table.hpp"

namespace catenc {

struct FoldAssignment {
  std::vector<int> fold_of_row;
  int n_folds = 0;
  std::uint64_t seed = 0;

  std::vector<std::size_t> train_rows(int fold) const;
  std::vector<std::size_t> test_rows(int fold) const;
};

/// K-fold split, stratified by class for classification targets. Pure
/// function of (seed, target, n_folds).
FoldAssignment stratified_kfold(const DataTable& table, int n_folds, std::uint64_t seed);

/// Same rule on a bare class-id vector (`n_classes` > 0) or, with
/// n_classes == 0, on `n_rows` unstratified rows.
FoldAssignment stratified_kfold(const std::vector<int>& class_ids, int n_classes, std::size_t n_rows, int n_folds,
                                std::uint64_t seed);

}  // namespace catenc
