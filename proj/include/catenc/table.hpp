#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace catenc {

enum class ColumnKind { categorical, numeric };

enum class TaskKind { regression, binary, multiclass };

std::string_view to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view s);

struct Task {
  TaskKind kind = TaskKind::regression;
  int n_classes = 0;  // 0 for regression

  bool is_classification() const { return kind != TaskKind::regression; }
  friend bool operator==(const Task&, const Task&) = default;
};

inline constexpr std::int32_t kMissingCode = -1;

/// One column of a DataTable. Numeric columns use `values`; categorical
/// columns use `codes` indexing into `levels`. `missing` is authoritative for
/// both kinds (a missing categorical cell also carries kMissingCode).
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<double> values;
  std::vector<std::int32_t> codes;
  std::vector<std::string> levels;
  std::vector<std::uint8_t> missing;

  static Column numeric(std::string name, std::vector<double> values,
                        std::vector<std::uint8_t> missing = {});
  /// Builds a categorical column from labels; levels in first-appearance
  /// order. Cells whose `missing` flag is set are ignored.
  static Column categorical(std::string name, const std::vector<std::string>& labels,
                            std::vector<std::uint8_t> missing = {});
  /// Builds a categorical column from an explicit dictionary and codes.
  static Column from_codes(std::string name, std::vector<std::string> levels,
                           std::vector<std::int32_t> codes);

  std::size_t size() const { return kind == ColumnKind::numeric ? values.size() : codes.size(); }
  bool is_categorical() const { return kind == ColumnKind::categorical; }
  bool is_missing(std::size_t row) const { return missing[row] != 0; }
  std::size_t missing_count() const;

  /// Label of a categorical cell; throws on missing cells.
  const std::string& label(std::size_t row) const;
  /// Training counts per level (missing excluded).
  std::vector<std::size_t> level_counts() const;
  /// Number of levels with at least one non-missing occurrence.
  std::size_t observed_level_count() const;
  /// Index of `label` in `levels`, or -1.
  std::int32_t find_level(std::string_view label) const;

  /// Rows subset; categorical dictionaries are compacted to the levels that
  /// occur in the subset, preserving first-appearance order.
  Column take_rows(std::span<const std::size_t> rows, bool compact_levels = true) const;

  void validate() const;
};

/// Columnar dataset with a designated target column.
class DataTable {
 public:
  DataTable() = default;
  DataTable(std::vector<Column> columns, std::size_t target_index, Task task);

  /// Builds a table inferring the task from the target column: numeric is
  /// regression; categorical is binary (2 classes) or multiclass.
  static DataTable with_inferred_task(std::vector<Column> columns, std::size_t target_index);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_columns() const { return columns_.size(); }
  const Task& task() const { return task_; }
  std::size_t target_index() const { return target_index_; }
  const Column& target() const { return columns_[target_index_]; }
  const std::vector<Column>& columns() const { return columns_; }
  const Column& column(std::size_t i) const { return columns_[i]; }
  /// Index of column with `name`, or npos.
  std::size_t find_column(std::string_view name) const;
  /// Indices of every non-target column.
  std::vector<std::size_t> feature_indices() const;

  /// Subset of rows. Feature dictionaries are compacted; the target keeps its
  /// full class dictionary so class ids stay stable across folds.
  DataTable take_rows(std::span<const std::size_t> rows) const;

  /// Class id per row (classification) as int.
  std::vector<int> class_ids() const;
  /// Target values (regression).
  const std::vector<double>& target_values() const { return target().values; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<Column> columns_;
  std::size_t n_rows_ = 0;
  std::size_t target_index_ = 0;
  Task task_;
};

}  // namespace catenc
