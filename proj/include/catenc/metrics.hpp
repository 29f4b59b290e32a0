#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "catenc/error.hpp"
#include "catenc/learners.hpp"

namespace catenc {

/// A test fold lacks a class needed by the metric; such folds are recorded
/// but excluded from aggregation.
class DegenerateFold : public DataError {
 public:
  using DataError::DataError;
};

enum class Metric { rmse, auc, aunu };

std::string_view to_string(Metric m);
Metric metric_from_string(std::string_view s);
Metric metric_for(const Task& task);
bool higher_is_better(Metric m);

double rmse(const std::vector<double>& pred, const std::vector<double>& truth);

/// Mann-Whitney AUC; each tied positive/negative pair counts one half.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Unweighted mean of one-vs-rest AUCs over all classes.
double aunu(const Eigen::MatrixXd& scores, const std::vector<int>& labels);

/// Metric of a prediction matrix from FittedLearner::predict.
double evaluate(Metric metric, const Eigen::MatrixXd& pred, const Target& truth);

struct TTest {
  double t = 0.0;
  double p_one_sided = 0.5;  // P(T >= t) under the null
  int df = 0;
};

/// Paired t-test on per-fold differences with the variance inflated by
/// (1/J + n_test/n_train).
TTest corrected_ttest(const std::vector<double>& diffs, double n_train, double n_test);

/// Dominance relation over conditions: beats(i, j) means i significantly
/// beats j.
struct Relation {
  std::vector<std::string> labels;
  std::vector<std::vector<bool>> dominance;
  std::vector<std::string> excluded;  // conditions dropped because of failures

  static Relation empty(std::vector<std::string> labels);
  std::size_t size() const { return labels.size(); }
  bool beats(std::size_t i, std::size_t j) const { return dominance[i][j]; }
  void set(std::size_t i, std::size_t j, bool v) { dominance[i][j] = v; }
  /// Throws unless square, irreflexive and antisymmetric.
  void validate() const;
};

/// Per-fold metric values of one condition; NaN marks a degenerate fold.
struct ConditionScores {
  std::string label;
  std::vector<double> values;
  bool failed = false;
};

/// D[i][j] = one-sided corrected t-test p-value of "i beats j" below alpha.
/// Differences are taken over folds where both conditions have values.
Relation build_relation(const std::vector<ConditionScores>& conditions, Metric metric, double n_train,
                        double n_test, double alpha = 0.05);

}  // namespace catenc
