#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "catenc/cart.hpp"
#include "catenc/encoders.hpp"
#include "catenc/folds.hpp"
#include "catenc/glmm.hpp"

namespace catenc {

/// Shrunken, centered conditional-target encoding. Regression emits one
/// column; classification emits one logit-scale column per class.
class ImpactFit final : public ColumnEncoder {
 public:
  static std::shared_ptr<const ImpactFit> fit(const Column& column, const Column& target, const Task& task,
                                              double epsilon = 1e-4, bool binary_single_column = false);
  std::vector<Column> transform(const Column& input) const override;

  /// Encoded values of a training level, one per output column.
  const std::vector<double>& values_of(std::string_view label) const;
  std::size_t n_outputs() const { return output_names_.size(); }
  double epsilon() const { return epsilon_; }

 private:
  std::vector<std::string> output_names_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<double>> values_;  // per level
  std::vector<double> unseen_;
  double epsilon_ = 1e-4;
};

/// Maps levels to terminal-node ids of a single-feature tree; the output is
/// categorical and one-hot encoded downstream.
class LeafEncoder final : public ColumnEncoder {
 public:
  static std::shared_ptr<const LeafEncoder> fit(const Column& column, const Column& target, const Task& task,
                                                std::uint64_t seed, const CartOptions& options = {});
  std::vector<Column> transform(const Column& input) const override;
  const LevelTree& tree() const { return tree_; }

 private:
  std::string name_;
  LevelTree tree_;
};

/// Random-intercept encoding: beta0 + u_l on the link scale, beta0 for
/// unseen levels. Classification fits one-vs-rest models, one column per class.
class GlmmEncoder final : public ColumnEncoder {
 public:
  struct Options {
    bool binary_single_column = false;
    bool spherical_modes = false;
    GlmmOptions glmm;
  };

  static std::shared_ptr<const GlmmEncoder> fit(const Column& column, const Column& target, const Task& task,
                                                const Options& options);
  static std::shared_ptr<const GlmmEncoder> fit(const Column& column, const Column& target, const Task& task) {
    return fit(column, target, task, Options{});
  }
  std::vector<Column> transform(const Column& input) const override;

  std::size_t n_outputs() const { return output_names_.size(); }
  /// Underlying model per output column (binary second column mirrors the first).
  const std::vector<RandomInterceptFit>& models() const { return models_; }
  double intercept(std::size_t output) const { return intercepts_[output]; }
  double value_of(std::size_t output, std::string_view label) const;

 private:
  std::vector<std::string> output_names_;
  std::vector<RandomInterceptFit> models_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<double>> values_;  // [output][level]
  std::vector<double> intercepts_;
};

/// Leakage-safe training encoding: state after cross-fitting.
struct CrossFitPlan {
  int n_folds = 0;
  FoldAssignment folds;
  std::shared_ptr<const GlmmEncoder> full_model;  // used at prediction time
};

struct CrossFitResult {
  std::vector<Column> training_encoding;
  CrossFitPlan plan;
};

/// Encodes each training row with the model fit on the other folds; the
/// plan's full-data model encodes new data.
CrossFitResult cross_fit_encode(const Column& column, const Column& target, const Task& task, int n_folds,
                                std::uint64_t seed, const GlmmEncoder::Options& options = {});

}  // namespace catenc
