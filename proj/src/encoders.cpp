#include "catenc/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "catenc/error.hpp"
#include "catenc/random.hpp"
#include "catenc/target_encoders.hpp"

namespace catenc {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Observed levels sorted by descending count, ties in first-appearance order.
std::vector<std::size_t> levels_by_frequency(const Column& c) {
  const auto counts = c.level_counts();
  std::vector<std::size_t> order;
  for (std::size_t l = 0; l < counts.size(); ++l)
    if (counts[l] > 0) order.push_back(l);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return counts[a] > counts[b]; });
  return order;
}

void require_categorical(const Column& c) {
  if (!c.is_categorical()) throw InvalidArgument("encoder input column '" + c.name + "' must be categorical");
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::integer:
      return "integer";
    case Strategy::frequency:
      return "frequency";
    case Strategy::one_hot:
      return "one_hot";
    case Strategy::dummy:
      return "dummy";
    case Strategy::hash:
      return "hash";
    case Strategy::leaf:
      return "leaf";
    case Strategy::impact:
      return "impact";
    case Strategy::glmm:
      return "glmm";
    case Strategy::remove:
      return "remove";
  }
  return "unknown";
}

Strategy strategy_from_string(std::string_view s) {
  for (auto st : {Strategy::integer, Strategy::frequency, Strategy::one_hot, Strategy::dummy, Strategy::hash,
                  Strategy::leaf, Strategy::impact, Strategy::glmm, Strategy::remove})
    if (to_string(st) == s) return st;
  if (s == "one-hot" || s == "onehot") return Strategy::one_hot;
  throw InvalidArgument("unknown encoder strategy '" + std::string(s) + "'");
}

void EncoderSpec::validate() const {
  if (hct < 2) throw InvalidArgument("hct must be at least 2");
  if (glmm_folds != 0 && (glmm_folds < 2 || glmm_folds > 20))
    throw InvalidArgument("glmm_folds must be 0 or in 2..20, got " + std::to_string(glmm_folds));
  if (!(impact_epsilon > 0.0)) throw InvalidArgument("impact epsilon must be positive");
}

std::string EncoderSpec::condition() const {
  std::string s(to_string(strategy));
  if (strategy == Strategy::glmm) s += glmm_folds == 0 ? "-noCV" : "-" + std::to_string(glmm_folds) + "CV";
  return s;
}

std::size_t RoutingPlan::count(Route r) const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [r](const Entry& e) { return e.route == r; }));
}

Route RoutingPlan::route_of(std::string_view column) const {
  for (const auto& e : entries)
    if (e.column == column) return e.route;
  throw InvalidArgument("column '" + std::string(column) + "' is not a routed categorical column");
}

RoutingPlan apply_hct_routing(const DataTable& table, const EncoderSpec& spec) {
  spec.validate();
  RoutingPlan plan;
  for (auto j : table.feature_indices()) {
    const auto& c = table.column(j);
    if (!c.is_categorical()) continue;
    RoutingPlan::Entry e;
    e.column = c.name;
    e.n_levels = c.observed_level_count();
    const bool high = e.n_levels > static_cast<std::size_t>(spec.hct);
    switch (spec.strategy) {
      case Strategy::one_hot:
      case Strategy::dummy:
        e.route = Route::indicator;
        break;
      case Strategy::remove:
        e.route = high ? Route::removed : Route::one_hot;
        break;
      default:
        e.route = high ? Route::encoded : Route::one_hot;
        break;
    }
    plan.entries.push_back(e);
  }
  return plan;
}

std::vector<std::ptrdiff_t> map_levels(const Column& column,
                                       const std::unordered_map<std::string, std::size_t>& lookup) {
  std::vector<std::ptrdiff_t> out(column.levels.size(), -1);
  for (std::size_t l = 0; l < column.levels.size(); ++l) {
    auto it = lookup.find(column.levels[l]);
    if (it != lookup.end()) out[l] = static_cast<std::ptrdiff_t>(it->second);
  }
  return out;
}

// ---- integer ----

std::shared_ptr<const IntegerEncoder> IntegerEncoder::fit(const Column& column, bool shuffle, std::uint64_t seed) {
  require_categorical(column);
  auto enc = std::make_shared<IntegerEncoder>();
  enc->name_ = column.name;
  const auto counts = column.level_counts();
  std::vector<std::size_t> observed;
  for (std::size_t l = 0; l < counts.size(); ++l)
    if (counts[l] > 0) observed.push_back(l);
  std::vector<std::size_t> codes(observed.size());
  std::iota(codes.begin(), codes.end(), std::size_t{1});
  if (shuffle) {
    std::mt19937_64 rng(seed);
    shuffle_in_place(codes, rng);
  }
  for (std::size_t k = 0; k < observed.size(); ++k) enc->code_.emplace(column.levels[observed[k]], codes[k]);
  const auto by_freq = levels_by_frequency(column);
  if (!by_freq.empty()) enc->mode_code_ = static_cast<double>(enc->code_.at(column.levels[by_freq.front()]));
  return enc;
}

double IntegerEncoder::code_of(std::string_view label) const {
  auto it = code_.find(std::string(label));
  return it == code_.end() ? kNaN : static_cast<double>(it->second);
}

std::vector<Column> IntegerEncoder::transform(const Column& input) const {
  require_categorical(input);
  const auto slot = map_levels(input, code_);
  std::vector<double> values(input.size(), kNaN);
  std::vector<std::uint8_t> missing(input.size(), 1);
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input.missing[i]) continue;
    const auto s = slot[static_cast<std::size_t>(input.codes[i])];
    if (s < 0) continue;
    values[i] = static_cast<double>(s);
    missing[i] = 0;
  }
  std::vector<Column> out;
  out.push_back(Column::numeric(name_, std::move(values), std::move(missing)));
  return out;
}

UnseenFallbacks IntegerEncoder::fallbacks() const { return {{name_, mode_code_}}; }

// ---- frequency ----

std::shared_ptr<const FrequencyEncoder> FrequencyEncoder::fit(const Column& column, bool relative) {
  require_categorical(column);
  auto enc = std::make_shared<FrequencyEncoder>();
  enc->name_ = column.name;
  const auto counts = column.level_counts();
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  for (std::size_t l = 0; l < counts.size(); ++l) {
    if (counts[l] == 0) continue;
    enc->index_.emplace(column.levels[l], enc->value_.size());
    enc->value_.push_back(relative ? static_cast<double>(counts[l]) / total : static_cast<double>(counts[l]));
  }
  enc->unseen_ = relative && total > 0 ? 1.0 / total : 1.0;
  return enc;
}

std::vector<Column> FrequencyEncoder::transform(const Column& input) const {
  require_categorical(input);
  const auto slot = map_levels(input, index_);
  std::vector<double> values(input.size(), unseen_);
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input.missing[i]) continue;
    const auto s = slot[static_cast<std::size_t>(input.codes[i])];
    if (s >= 0) values[i] = value_[static_cast<std::size_t>(s)];
  }
  std::vector<Column> out;
  out.push_back(Column::numeric(name_, std::move(values)));
  return out;
}

// ---- indicator ----

std::shared_ptr<const IndicatorEncoder> IndicatorEncoder::fit(const Column& column, IndicatorVariant variant,
                                                              int hct) {
  require_categorical(column);
  if (hct < 2) throw InvalidArgument("indicator encoding needs hct >= 2");
  if (column.find_level(kOtherLevel) >= 0)
    throw DataError("column '" + column.name + "' contains the reserved level " + kOtherLevel);
  auto enc = std::make_shared<IndicatorEncoder>();
  enc->name_ = column.name;
  enc->variant_ = variant;
  const auto by_freq = levels_by_frequency(column);
  const auto keep = static_cast<std::size_t>(hct - 1);
  const bool collapse = by_freq.size() > keep;
  for (std::size_t k = 0; k < by_freq.size(); ++k) {
    const auto& lbl = column.levels[by_freq[k]];
    if (!collapse || k < keep)
      enc->kept_.push_back(lbl);
    else
      enc->collapsed_.push_back(lbl);
  }
  enc->has_other_ = collapse;
  if (variant == IndicatorVariant::dummy && !enc->kept_.empty())
    enc->reference_ = *std::min_element(enc->kept_.begin(), enc->kept_.end());
  return enc;
}

std::vector<std::string> IndicatorEncoder::output_levels() const {
  std::vector<std::string> out;
  for (const auto& l : kept_)
    if (variant_ == IndicatorVariant::one_hot || l != reference_) out.push_back(l);
  if (has_other_) out.push_back(kOtherLevel);
  return out;
}

std::vector<Column> IndicatorEncoder::transform(const Column& input) const {
  require_categorical(input);
  const auto outputs = output_levels();
  std::unordered_map<std::string, std::size_t> slot_of;
  // Slot index into outputs; outputs.size() means "all zeros" (dummy reference).
  const std::size_t zero_slot = outputs.size();
  for (std::size_t k = 0; k < outputs.size(); ++k) slot_of.emplace(outputs[k], k);
  auto slot_for_label = [&](const std::string& lbl) -> std::size_t {
    if (variant_ == IndicatorVariant::dummy && lbl == reference_) return zero_slot;
    auto it = slot_of.find(lbl);
    if (it != slot_of.end() && lbl != kOtherLevel) return it->second;
    if (std::find(collapsed_.begin(), collapsed_.end(), lbl) != collapsed_.end()) return slot_of.at(kOtherLevel);
    return static_cast<std::size_t>(-1);  // unseen
  };
  std::size_t unseen_slot = zero_slot;
  if (variant_ == IndicatorVariant::dummy && !kept_.empty()) unseen_slot = slot_for_label(kept_.front());

  std::vector<std::size_t> level_slot(input.levels.size());
  for (std::size_t l = 0; l < input.levels.size(); ++l) {
    const auto s = slot_for_label(input.levels[l]);
    level_slot[l] = s == static_cast<std::size_t>(-1) ? unseen_slot : s;
  }
  std::vector<std::vector<double>> data(outputs.size(), std::vector<double>(input.size(), 0.0));
  for (std::size_t i = 0; i < input.size(); ++i) {
    const auto s = input.missing[i] ? unseen_slot : level_slot[static_cast<std::size_t>(input.codes[i])];
    if (s < zero_slot) data[s][i] = 1.0;
  }
  std::vector<Column> out;
  for (std::size_t k = 0; k < outputs.size(); ++k)
    out.push_back(Column::numeric(name_ + "=" + outputs[k], std::move(data[k])));
  return out;
}

// ---- hash ----

std::uint64_t stable_hash(std::string_view label, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::shared_ptr<const HashEncoder> HashEncoder::fit(const Column& column, int hash_size, std::uint64_t seed) {
  require_categorical(column);
  if (hash_size < 1) throw InvalidArgument("hash size must be at least 1");
  auto enc = std::make_shared<HashEncoder>();
  enc->name_ = column.name;
  enc->hash_size_ = hash_size;
  enc->seed_ = seed;
  std::vector<std::size_t> hits(static_cast<std::size_t>(hash_size), 0);
  std::size_t n = 0;
  const auto counts = column.level_counts();
  for (std::size_t l = 0; l < counts.size(); ++l) {
    if (counts[l] == 0) continue;
    hits[static_cast<std::size_t>(enc->column_of(column.levels[l]) - 1)] += counts[l];
    n += counts[l];
  }
  for (int k = 0; k < hash_size; ++k) {
    const auto h = hits[static_cast<std::size_t>(k)];
    if (h > 0 && h < n) enc->active_.push_back(k + 1);
  }
  return enc;
}

int HashEncoder::column_of(std::string_view label) const {
  return static_cast<int>(stable_hash(label, seed_) % static_cast<std::uint64_t>(hash_size_)) + 1;
}

std::vector<Column> HashEncoder::transform(const Column& input) const {
  require_categorical(input);
  std::vector<std::ptrdiff_t> slot_of_column(static_cast<std::size_t>(hash_size_) + 1, -1);
  for (std::size_t k = 0; k < active_.size(); ++k) slot_of_column[static_cast<std::size_t>(active_[k])] = static_cast<std::ptrdiff_t>(k);
  std::vector<std::ptrdiff_t> level_slot(input.levels.size());
  for (std::size_t l = 0; l < input.levels.size(); ++l)
    level_slot[l] = slot_of_column[static_cast<std::size_t>(column_of(input.levels[l]))];
  std::vector<std::vector<double>> data(active_.size(), std::vector<double>(input.size(), 0.0));
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input.missing[i]) continue;
    const auto s = level_slot[static_cast<std::size_t>(input.codes[i])];
    if (s >= 0) data[static_cast<std::size_t>(s)][i] = 1.0;
  }
  std::vector<Column> out;
  for (std::size_t k = 0; k < active_.size(); ++k)
    out.push_back(Column::numeric(name_ + "#" + std::to_string(active_[k]), std::move(data[k])));
  return out;
}

// ---- whole-table encoder ----

struct EncoderFitter {
  static EncoderFit fit(const DataTable& train, const EncoderSpec& spec) {
    spec.validate();
    FittedEncoder enc;
    enc.spec_ = spec;
    enc.routing_ = apply_hct_routing(train, spec);
    const auto& target = train.target();
    const auto& task = train.task();

    std::vector<Column> features;
    for (auto j : train.feature_indices()) {
      const auto& c = train.column(j);
      enc.input_columns_.push_back(c.name);
      if (!c.is_categorical()) {
        features.push_back(c);
        continue;
      }
      const auto route = enc.routing_.route_of(c.name);
      if (route == Route::removed) {
        enc.encoders_.emplace(c.name, nullptr);
        continue;
      }
      if (route == Route::one_hot) {
        features.push_back(c);
        continue;
      }
      const auto col_seed = derive_seed(spec.seed, {j});
      std::shared_ptr<const ColumnEncoder> ce;
      std::vector<Column> training_columns;
      bool have_training = false;
      switch (spec.strategy) {
        case Strategy::integer:
          ce = IntegerEncoder::fit(c, spec.shuffle_integer, col_seed);
          break;
        case Strategy::frequency:
          ce = FrequencyEncoder::fit(c, spec.relative_frequency);
          break;
        case Strategy::one_hot:
          ce = IndicatorEncoder::fit(c, IndicatorVariant::one_hot, spec.hct);
          break;
        case Strategy::dummy:
          ce = IndicatorEncoder::fit(c, IndicatorVariant::dummy, spec.hct);
          break;
        case Strategy::hash:
          ce = HashEncoder::fit(c, spec.hct, spec.seed);
          break;
        case Strategy::leaf:
          ce = LeafEncoder::fit(c, target, task, col_seed);
          break;
        case Strategy::impact:
          ce = ImpactFit::fit(c, target, task, spec.impact_epsilon, spec.binary_single_column);
          break;
        case Strategy::glmm: {
          GlmmEncoder::Options opt;
          opt.binary_single_column = spec.binary_single_column;
          opt.spherical_modes = spec.spherical_modes;
          if (spec.glmm_folds >= 2) {
            auto cf = cross_fit_encode(c, target, task, spec.glmm_folds, col_seed, opt);
            ce = cf.plan.full_model;
            training_columns = std::move(cf.training_encoding);
            have_training = true;
          } else {
            ce = GlmmEncoder::fit(c, target, task, opt);
          }
          break;
        }
        case Strategy::remove:
          break;
      }
      if (!have_training) training_columns = ce->transform(c);
      for (auto& [name, value] : ce->fallbacks()) enc.fallbacks_[name] = value;
      enc.encoders_.emplace(c.name, ce);
      for (auto& out : training_columns) features.push_back(std::move(out));
    }
    auto training = with_features(train, std::move(features));
    return {std::move(enc), std::move(training)};
  }
};

DataTable FittedEncoder::transform(const DataTable& table) const {
  const auto idx = table.feature_indices();
  if (idx.size() != input_columns_.size()) throw DataError("encoder input has a different number of feature columns");
  std::vector<Column> features;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& c = table.column(idx[k]);
    if (c.name != input_columns_[k])
      throw DataError("encoder input column '" + c.name + "' does not match fitted column '" + input_columns_[k] + "'");
    auto it = encoders_.find(c.name);
    if (it == encoders_.end()) {
      features.push_back(c);
      continue;
    }
    if (!it->second) continue;  // removed
    for (auto& out : it->second->transform(c)) features.push_back(std::move(out));
  }
  return with_features(table, std::move(features));
}

EncoderFit fit_encoder(const DataTable& train, const EncoderSpec& spec) { return EncoderFitter::fit(train, spec); }

}  // namespace catenc
