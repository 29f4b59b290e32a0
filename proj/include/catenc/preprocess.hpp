#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "catenc/table.hpp"

namespace catenc {

/// Pseudo-level that replaces missing cells of multi-level categorical columns.
inline constexpr const char* kMissingLevel = "__MISSING__";

/// Training-time missing-value replacements, replayable on new data.
class ImputationPlan {
 public:
  enum class Rule { new_level, mode, mean };
  struct Entry {
    Rule rule = Rule::mean;
    std::string label;  // new_level / mode
    double value = 0.0;  // mean
  };

  DataTable apply(const DataTable& table) const;
  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  friend std::pair<DataTable, ImputationPlan> impute_stage1(const DataTable& train);
  std::map<std::string, Entry> entries_;
};

/// Imputation I: categorical columns with more than two observed levels get a
/// MISSING pseudo-level; binary categorical columns take the training mode;
/// numeric columns take the training mean.
std::pair<DataTable, ImputationPlan> impute_stage1(const DataTable& train);

/// Per encoded column, the value that replaces a missing cell produced by an
/// encoder (unseen level deferred to imputation).
using UnseenFallbacks = std::map<std::string, double>;

/// Imputation II: replaces every missing numeric cell by its column's
/// declared fallback. Output has no missing values.
DataTable impute_stage2(const DataTable& encoded, const UnseenFallbacks& fallbacks);

class DropPlan {
 public:
  DataTable apply(const DataTable& table) const;
  const std::vector<std::string>& dropped() const { return dropped_; }

 private:
  friend std::pair<DataTable, DropPlan> drop_constant_columns(const DataTable& train);
  std::vector<std::string> dropped_;
};

/// Removes feature columns with a single distinct training value.
std::pair<DataTable, DropPlan> drop_constant_columns(const DataTable& train);

class OneHotPlan {
 public:
  DataTable apply(const DataTable& table) const;
  const std::map<std::string, std::vector<std::string>>& levels() const { return levels_; }

 private:
  friend std::pair<DataTable, OneHotPlan> final_one_hot(const DataTable& train);
  std::map<std::string, std::vector<std::string>> levels_;
};

/// Expands every remaining categorical feature into one indicator per
/// training level; unseen levels map to the zero vector.
std::pair<DataTable, OneHotPlan> final_one_hot(const DataTable& train);

/// Copy of `table` whose feature columns are replaced by `features`; the
/// target column is carried over unchanged.
DataTable with_features(const DataTable& table, std::vector<Column> features);

/// Shared indicator expansion: one 0/1 column per entry of `levels`, named
/// "<column>=<level>". Labels not in `levels` produce all zeros.
std::vector<Column> indicator_columns(const Column& column, const std::vector<std::string>& levels);

}  // namespace catenc
