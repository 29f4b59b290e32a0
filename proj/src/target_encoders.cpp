#include "catenc/target_encoders.hpp"

#include <cmath>
#include <limits>

#include "catenc/error.hpp"
#include "catenc/random.hpp"

namespace catenc {
namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

void check_inputs(const Column& column, const Column& target, const Task& task) {
  if (!column.is_categorical()) throw InvalidArgument("encoder input column '" + column.name + "' must be categorical");
  if (column.size() != target.size()) throw InvalidArgument("feature and target lengths differ");
  if (task.is_classification() != target.is_categorical()) throw InvalidArgument("target kind does not match task");
}

std::vector<std::string> class_output_names(const std::string& base, const Column& target, bool single) {
  if (single) return {base};
  std::vector<std::string> out;
  for (const auto& cls : target.levels) out.push_back(base + "." + cls);
  return out;
}

}  // namespace

// ---- impact ----

std::shared_ptr<const ImpactFit> ImpactFit::fit(const Column& column, const Column& target, const Task& task,
                                                double epsilon, bool binary_single_column) {
  check_inputs(column, target, task);
  if (!(epsilon > 0.0)) throw InvalidArgument("impact smoothing epsilon must be positive");
  auto enc = std::make_shared<ImpactFit>();
  enc->epsilon_ = epsilon;
  const auto n_levels = column.levels.size();
  const auto counts = column.level_counts();

  if (!task.is_classification()) {
    double total = 0.0;
    double n = 0.0;
    std::vector<double> sums(n_levels, 0.0);
    for (std::size_t i = 0; i < column.size(); ++i) {
      if (column.missing[i]) continue;
      sums[static_cast<std::size_t>(column.codes[i])] += target.values[i];
      total += target.values[i];
      n += 1.0;
    }
    if (n == 0) throw DataError("impact encoder needs at least one training row");
    const double grand = total / n;
    enc->output_names_ = {column.name};
    enc->unseen_ = {0.0};
    for (std::size_t l = 0; l < n_levels; ++l) {
      if (counts[l] == 0) continue;
      const double nl = static_cast<double>(counts[l]);
      enc->index_.emplace(column.levels[l], enc->values_.size());
      enc->values_.push_back({(sums[l] + epsilon * grand) / (nl + epsilon) - grand});
    }
    return enc;
  }

  const auto n_classes = static_cast<std::size_t>(task.n_classes);
  std::vector<double> class_n(n_classes, 0.0);
  std::vector<std::vector<double>> level_class(n_levels, std::vector<double>(n_classes, 0.0));
  double n = 0.0;
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (column.missing[i]) continue;
    const auto c = static_cast<std::size_t>(target.codes[i]);
    level_class[static_cast<std::size_t>(column.codes[i])][c] += 1.0;
    class_n[c] += 1.0;
    n += 1.0;
  }
  for (std::size_t c = 0; c < n_classes; ++c)
    if (class_n[c] == 0.0) throw DataError("class '" + target.levels[c] + "' is absent from the impact training data");

  const bool single = binary_single_column && task.kind == TaskKind::binary;
  std::vector<std::size_t> classes;
  if (single)
    classes = {1};
  else
    for (std::size_t c = 0; c < n_classes; ++c) classes.push_back(c);
  enc->output_names_ = class_output_names(column.name, target, single);
  enc->unseen_.assign(classes.size(), 0.0);
  for (std::size_t l = 0; l < n_levels; ++l) {
    if (counts[l] == 0) continue;
    const double nl = static_cast<double>(counts[l]);
    std::vector<double> v;
    for (auto c : classes) {
      const double prior = class_n[c] / n;
      const double p = (level_class[l][c] + epsilon * prior) / (nl + epsilon);
      v.push_back(logit(p) - logit(prior));
    }
    enc->index_.emplace(column.levels[l], enc->values_.size());
    enc->values_.push_back(std::move(v));
  }
  return enc;
}

const std::vector<double>& ImpactFit::values_of(std::string_view label) const {
  auto it = index_.find(std::string(label));
  return it == index_.end() ? unseen_ : values_[it->second];
}

std::vector<Column> ImpactFit::transform(const Column& input) const {
  const auto slot = map_levels(input, index_);
  std::vector<std::vector<double>> data(output_names_.size(), std::vector<double>(input.size(), 0.0));
  for (std::size_t i = 0; i < input.size(); ++i) {
    const std::ptrdiff_t s = input.missing[i] ? -1 : slot[static_cast<std::size_t>(input.codes[i])];
    const auto& v = s < 0 ? unseen_ : values_[static_cast<std::size_t>(s)];
    for (std::size_t k = 0; k < v.size(); ++k) data[k][i] = v[k];
  }
  std::vector<Column> out;
  for (std::size_t k = 0; k < output_names_.size(); ++k) out.push_back(Column::numeric(output_names_[k], std::move(data[k])));
  return out;
}

// ---- leaf ----

std::shared_ptr<const LeafEncoder> LeafEncoder::fit(const Column& column, const Column& target, const Task& task,
                                                    std::uint64_t seed, const CartOptions& options) {
  check_inputs(column, target, task);
  auto enc = std::make_shared<LeafEncoder>();
  enc->name_ = column.name;
  enc->tree_ = grow_and_prune(column, target, task, seed, options);
  return enc;
}

std::vector<Column> LeafEncoder::transform(const Column& input) const {
  std::vector<std::string> per_level(input.levels.size());
  for (std::size_t l = 0; l < input.levels.size(); ++l) per_level[l] = std::to_string(tree_.assign_leaf(input.levels[l]));
  const auto fallback = std::to_string(tree_.largest_leaf());
  std::vector<std::string> labels(input.size());
  for (std::size_t i = 0; i < input.size(); ++i)
    labels[i] = input.missing[i] ? fallback : per_level[static_cast<std::size_t>(input.codes[i])];
  std::vector<Column> out;
  out.push_back(Column::categorical(name_, labels));
  return out;
}

// ---- glmm ----

std::shared_ptr<const GlmmEncoder> GlmmEncoder::fit(const Column& column, const Column& target, const Task& task,
                                                    const Options& options) {
  check_inputs(column, target, task);
  auto enc = std::make_shared<GlmmEncoder>();
  const auto counts = column.level_counts();

  if (!task.is_classification()) {
    enc->models_.push_back(fit_gaussian_ranint(column, target, options.glmm));
    enc->output_names_ = {column.name};
  } else if (task.kind == TaskKind::binary) {
    auto positive = fit_binomial_ranint(column, target, 1, options.glmm);
    const bool single = options.binary_single_column;
    if (!single) {
      // Swapping the class labels negates beta0 and every mode exactly.
      RandomInterceptFit negative = positive;
      negative.beta0 = -positive.beta0;
      for (auto& m : negative.modes) m = -m;
      enc->models_.push_back(std::move(negative));
    }
    enc->models_.push_back(std::move(positive));
    enc->output_names_ = class_output_names(column.name, target, single);
  } else {
    for (int c = 0; c < task.n_classes; ++c) enc->models_.push_back(fit_binomial_ranint(column, target, c, options.glmm));
    enc->output_names_ = class_output_names(column.name, target, false);
  }

  for (std::size_t l = 0; l < column.levels.size(); ++l)
    if (counts[l] > 0) enc->index_.emplace(column.levels[l], l);
  for (const auto& m : enc->models_) {
    std::vector<double> v(column.levels.size(), m.beta0);
    for (std::size_t l = 0; l < column.levels.size(); ++l)
      if (counts[l] > 0) v[l] = m.beta0 + (options.spherical_modes ? m.spherical_mode(l) : m.modes[l]);
    enc->values_.push_back(std::move(v));
    enc->intercepts_.push_back(m.beta0);
  }
  return enc;
}

double GlmmEncoder::value_of(std::size_t output, std::string_view label) const {
  auto it = index_.find(std::string(label));
  return it == index_.end() ? intercepts_[output] : values_[output][it->second];
}

std::vector<Column> GlmmEncoder::transform(const Column& input) const {
  const auto slot = map_levels(input, index_);
  std::vector<Column> out;
  for (std::size_t k = 0; k < output_names_.size(); ++k) {
    std::vector<double> data(input.size(), intercepts_[k]);
    for (std::size_t i = 0; i < input.size(); ++i) {
      if (input.missing[i]) continue;
      const auto s = slot[static_cast<std::size_t>(input.codes[i])];
      if (s >= 0) data[i] = values_[k][static_cast<std::size_t>(s)];
    }
    out.push_back(Column::numeric(output_names_[k], std::move(data)));
  }
  return out;
}

CrossFitResult cross_fit_encode(const Column& column, const Column& target, const Task& task, int n_folds,
                                std::uint64_t seed, const GlmmEncoder::Options& options) {
  check_inputs(column, target, task);
  if (n_folds < 2) throw InvalidArgument("cross-fitting needs at least 2 folds");
  const auto n = column.size();
  const auto fold_seed = derive_seed(seed, {0x63726f7373ULL});
  std::vector<int> classes;
  if (task.is_classification()) classes.assign(target.codes.begin(), target.codes.end());
  CrossFitResult result;
  result.plan.n_folds = n_folds;
  result.plan.folds = stratified_kfold(classes, task.is_classification() ? task.n_classes : 0, n, n_folds, fold_seed);
  result.plan.full_model = GlmmEncoder::fit(column, target, task, options);

  std::vector<std::vector<double>> data(result.plan.full_model->n_outputs(), std::vector<double>(n, 0.0));
  for (int f = 0; f < n_folds; ++f) {
    const auto train_rows = result.plan.folds.train_rows(f);
    const auto test_rows = result.plan.folds.test_rows(f);
    const auto sub = GlmmEncoder::fit(column.take_rows(train_rows), target.take_rows(train_rows, false), task, options);
    const auto encoded = sub->transform(column.take_rows(test_rows));
    for (std::size_t k = 0; k < encoded.size(); ++k)
      for (std::size_t r = 0; r < test_rows.size(); ++r) data[k][test_rows[r]] = encoded[k].values[r];
  }
  auto full_outputs = result.plan.full_model->transform(column);
  for (std::size_t k = 0; k < data.size(); ++k)
    result.training_encoding.push_back(Column::numeric(full_outputs[k].name, std::move(data[k])));
  return result;
}

}  // namespace catenc
