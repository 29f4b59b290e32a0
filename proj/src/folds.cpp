#include "catenc/folds.hpp"

#include <numeric>
#include <random>

#include "catenc/error.hpp"
#include "catenc/random.hpp"

namespace catenc {

std::vector<std::size_t> FoldAssignment::train_rows(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of_row.size(); ++i)
    if (fold_of_row[i] != fold) rows.push_back(i);
  return rows;
}

std::vector<std::size_t> FoldAssignment::test_rows(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of_row.size(); ++i)
    if (fold_of_row[i] == fold) rows.push_back(i);
  return rows;
}

FoldAssignment stratified_kfold(const std::vector<int>& class_ids, int n_classes, std::size_t n_rows, int n_folds,
                                std::uint64_t seed) {
  if (n_folds < 2) throw InvalidArgument("fold count must be at least 2");
  if (static_cast<std::size_t>(n_folds) > n_rows)
    throw InvalidArgument("fold count " + std::to_string(n_folds) + " exceeds row count " + std::to_string(n_rows));
  std::mt19937_64 rng(seed);

  // Rows are laid out class by class (each class shuffled), then dealt
  // round-robin. Per-class counts and total fold sizes both differ by <= 1.
  std::vector<std::size_t> order;
  order.reserve(n_rows);
  if (n_classes > 0) {
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
    for (std::size_t i = 0; i < n_rows; ++i) by_class.at(static_cast<std::size_t>(class_ids[i])).push_back(i);
    for (int c = 0; c < n_classes; ++c) {
      auto& rows = by_class[static_cast<std::size_t>(c)];
      if (rows.empty()) throw DataError("class " + std::to_string(c) + " has no members; cannot stratify");
      shuffle_in_place(rows, rng);
      order.insert(order.end(), rows.begin(), rows.end());
    }
  } else {
    order.resize(n_rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_in_place(order, rng);
  }

  FoldAssignment out;
  out.n_folds = n_folds;
  out.seed = seed;
  out.fold_of_row.assign(n_rows, 0);
  for (std::size_t p = 0; p < order.size(); ++p) out.fold_of_row[order[p]] = static_cast<int>(p % static_cast<std::size_t>(n_folds));
  return out;
}

FoldAssignment stratified_kfold(const DataTable& table, int n_folds, std::uint64_t seed) {
  if (table.task().is_classification())
    return stratified_kfold(table.class_ids(), table.task().n_classes, table.n_rows(), n_folds, seed);
  return stratified_kfold({}, 0, table.n_rows(), n_folds, seed);
}

}  // namespace catenc
