#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "catenc/preprocess.hpp"
#include "catenc/table.hpp"

namespace catenc {

enum class Strategy { integer, frequency, one_hot, dummy, hash, leaf, impact, glmm, remove };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);

/// Reserved label of the collapsed rare-level bucket in indicator encoding.
inline constexpr const char* kOtherLevel = "__OTHER__";

struct EncoderSpec {
  Strategy strategy = Strategy::one_hot;
  int hct = 10;
  int glmm_folds = 0;  // 0 = no cross-fitting
  std::uint64_t seed = 0;

  bool shuffle_integer = false;      // seeded permutation of the integer codes
  bool relative_frequency = false;   // N_l / N instead of N_l
  bool binary_single_column = false;  // impact/glmm on binary targets: one column instead of two
  bool spherical_modes = false;       // glmm: beta0 + u_l / tau instead of beta0 + u_l
  double impact_epsilon = 1e-4;

  void validate() const;
  /// Condition label without HCT, e.g. "integer", "glmm-5CV".
  std::string condition() const;
};

enum class Route { encoded, indicator, one_hot, removed };

struct RoutingPlan {
  struct Entry {
    std::string column;
    std::size_t n_levels = 0;
    Route route = Route::one_hot;
  };
  std::vector<Entry> entries;  // categorical feature columns in table order

  std::size_t count(Route r) const;
  Route route_of(std::string_view column) const;
};

/// Decides which categorical columns each strategy touches, based on the
/// number of observed training levels relative to the HCT.
RoutingPlan apply_hct_routing(const DataTable& table, const EncoderSpec& spec);

/// Fitted state for one input column. Transform is pure and may emit zero or
/// more output columns.
class ColumnEncoder {
 public:
  virtual ~ColumnEncoder() = default;
  virtual std::vector<Column> transform(const Column& input) const = 0;
  /// Imputation-II values for outputs that defer unseen levels to missing.
  virtual UnseenFallbacks fallbacks() const { return {}; }
};

/// Resolves each label of `column`'s dictionary through `lookup`; -1 for
/// labels absent from `lookup`.
std::vector<std::ptrdiff_t> map_levels(const Column& column,
                                       const std::unordered_map<std::string, std::size_t>& lookup);

class IntegerEncoder final : public ColumnEncoder {
 public:
  /// Levels map to 1..L in first-appearance order (seeded permutation when
  /// `shuffle`); unseen levels become missing, imputed to the mode's integer.
  static std::shared_ptr<const IntegerEncoder> fit(const Column& column, bool shuffle = false,
                                                   std::uint64_t seed = 0);
  std::vector<Column> transform(const Column& input) const override;
  UnseenFallbacks fallbacks() const override;
  double code_of(std::string_view label) const;  // NaN when unseen

 private:
  std::string name_;
  std::unordered_map<std::string, std::size_t> code_;
  double mode_code_ = 1.0;
};

class FrequencyEncoder final : public ColumnEncoder {
 public:
  static std::shared_ptr<const FrequencyEncoder> fit(const Column& column, bool relative = false);
  std::vector<Column> transform(const Column& input) const override;

 private:
  std::string name_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> value_;
  double unseen_ = 1.0;
};

enum class IndicatorVariant { one_hot, dummy };

class IndicatorEncoder final : public ColumnEncoder {
 public:
  /// Keeps the hct-1 most frequent levels (ties by first appearance) and
  /// collapses the rest into __OTHER__ when there are more than hct-1 levels.
  static std::shared_ptr<const IndicatorEncoder> fit(const Column& column, IndicatorVariant variant, int hct);
  std::vector<Column> transform(const Column& input) const override;

  const std::vector<std::string>& kept_levels() const { return kept_; }
  bool has_other() const { return has_other_; }
  /// Labels of the emitted indicator columns, in order.
  std::vector<std::string> output_levels() const;
  const std::string& reference() const { return reference_; }

 private:
  std::string name_;
  IndicatorVariant variant_ = IndicatorVariant::one_hot;
  std::vector<std::string> kept_;  // most frequent first
  std::vector<std::string> collapsed_;
  bool has_other_ = false;
  std::string reference_;  // dummy only
};

/// 64-bit FNV-1a over the label bytes with the offset basis XOR-ed with the seed.
std::uint64_t stable_hash(std::string_view label, std::uint64_t seed);

class HashEncoder final : public ColumnEncoder {
 public:
  /// Level l goes to indicator column (hash(l) mod hash_size) + 1. Columns
  /// constant on the training data are not emitted.
  static std::shared_ptr<const HashEncoder> fit(const Column& column, int hash_size, std::uint64_t seed);
  std::vector<Column> transform(const Column& input) const override;

  int hash_size() const { return hash_size_; }
  /// 1-based indicator ids emitted.
  const std::vector<int>& active_columns() const { return active_; }
  int column_of(std::string_view label) const;

 private:
  std::string name_;
  int hash_size_ = 1;
  std::uint64_t seed_ = 0;
  std::vector<int> active_;
};

/// Trained encoder for a whole table.
class FittedEncoder {
 public:
  /// Replaces each routed column by its encoder's output. Never mutates input;
  /// unseen-level cells may come back missing (see fallbacks()).
  DataTable transform(const DataTable& table) const;
  const UnseenFallbacks& fallbacks() const { return fallbacks_; }
  const RoutingPlan& routing() const { return routing_; }
  const EncoderSpec& spec() const { return spec_; }

 private:
  friend struct EncoderFitter;
  EncoderSpec spec_;
  RoutingPlan routing_;
  std::vector<std::string> input_columns_;
  std::unordered_map<std::string, std::shared_ptr<const ColumnEncoder>> encoders_;  // absent = passthrough
  UnseenFallbacks fallbacks_;
};

struct EncoderFit {
  FittedEncoder encoder;
  DataTable training_encoding;  // cross-fitted where the strategy requires it
};

/// Fits the encoding step on Imputation-I output.
EncoderFit fit_encoder(const DataTable& train, const EncoderSpec& spec);

}  // namespace catenc
