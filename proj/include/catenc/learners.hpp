#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "catenc/table.hpp"

namespace catenc {

enum class LearnerKind { featureless, knn, ridge };

std::string_view to_string(LearnerKind k);
LearnerKind learner_kind_from_string(std::string_view s);

struct LearnerSpec {
  LearnerKind kind = LearnerKind::featureless;
  int k = 15;
  std::optional<int> filter_top;  // information-gain filter; knn defaults to 25
  int ridge_cv_folds = 5;
  int ridge_grid_size = 20;
  std::optional<double> ridge_lambda;  // fixed penalty, skips internal CV
  std::uint64_t seed = 0;

  static LearnerSpec featureless() { return {}; }
  static LearnerSpec knn(int k = 15, std::optional<int> filter_top = 25);
  static LearnerSpec ridge();

  void validate() const;
  std::string label() const;
};

/// Target in learner form: values for regression, class ids for classification.
struct Target {
  Task task;
  std::vector<double> y;
  std::vector<int> cls;

  std::size_t size() const { return task.is_classification() ? cls.size() : y.size(); }
  static Target from_table(const DataTable& table);
  Target subset(const std::vector<std::size_t>& rows) const;
};

/// Predictions are n x 1 for regression and n x C class scores (rows sum to
/// 1) for classification.
class FittedLearner {
 public:
  virtual ~FittedLearner() = default;
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;
  const std::vector<std::size_t>& selected_features() const { return selected_; }

 protected:
  virtual Eigen::MatrixXd predict_selected(const Eigen::MatrixXd& x) const = 0;
  std::vector<std::size_t> selected_;  // empty = all columns
};

std::unique_ptr<FittedLearner> fit_learner(const LearnerSpec& spec, const Eigen::MatrixXd& x, const Target& target);

std::unique_ptr<FittedLearner> fit_featureless(const Target& target);

/// Mutual information (nats) between each column, binned into `bins`
/// equal-frequency bins, and the target (binned likewise for regression).
std::vector<double> information_gain(const Eigen::MatrixXd& x, const Target& target, int bins = 10);
/// Indices of the `top` columns by information gain, ties by column order,
/// returned in ascending column order.
std::vector<std::size_t> info_gain_filter(const Eigen::MatrixXd& x, const Target& target, int top);

/// Equal-frequency bin ids (0-based) of `values`; equal values share a bin.
std::vector<int> equal_frequency_bins(const std::vector<double>& values, int bins);

class KnnModel final : public FittedLearner {
 public:
  static std::unique_ptr<KnnModel> fit(const Eigen::MatrixXd& x, const Target& target, int k);
  /// Training row indices of the k nearest neighbours, nearest first; exact
  /// distance ties go to the earlier training row.
  std::vector<std::size_t> neighbours(const Eigen::VectorXd& query) const;

 protected:
  Eigen::MatrixXd predict_selected(const Eigen::MatrixXd& x) const override;

 private:
  friend std::unique_ptr<FittedLearner> fit_learner(const LearnerSpec&, const Eigen::MatrixXd&, const Target&);
  Eigen::MatrixXd train_;  // raw training rows
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;  // 1/sd, 0 for zero-variance columns
  Target target_;
  int k_ = 15;
};

class RidgeModel final : public FittedLearner {
 public:
  static std::unique_ptr<RidgeModel> fit(const Eigen::MatrixXd& x, const Target& target, const LearnerSpec& spec);

  /// Per output: intercept followed by slopes (one output for regression and
  /// binary, C for multiclass).
  const std::vector<Eigen::VectorXd>& coefficients() const { return coef_; }
  double lambda() const { return lambda_; }

 protected:
  Eigen::MatrixXd predict_selected(const Eigen::MatrixXd& x) const override;

 private:
  friend std::unique_ptr<FittedLearner> fit_learner(const LearnerSpec&, const Eigen::MatrixXd&, const Target&);
  Task task_;
  std::vector<Eigen::VectorXd> coef_;
  double lambda_ = 0.0;
};

/// Penalized least squares with unpenalized intercept; returns
/// (intercept, slopes...).
Eigen::VectorXd ridge_regression(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda);
/// L2-penalized logistic regression by damped IRLS; intercept unpenalized.
Eigen::VectorXd ridge_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y01, double lambda);

}  // namespace catenc
