#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "catenc/encoders.hpp"
#include "catenc/learners.hpp"
#include "catenc/preprocess.hpp"
#include "catenc/table.hpp"

namespace catenc {

/// Preprocessing state fit on training data: Imputation I, encoding,
/// Imputation II, constant dropping, final one-hot.
class FittedPipeline {
 public:
  /// Applies every fitted step to new data and returns the learner matrix.
  Eigen::MatrixXd transform(const DataTable& table) const;
  DataTable transform_table(const DataTable& table) const;

  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const FittedEncoder& encoder() const { return encoder_; }
  const DropPlan& drop_plan() const { return drop_; }

 private:
  friend struct PipelineBuilder;
  ImputationPlan imputation_;
  FittedEncoder encoder_;
  DropPlan drop_;
  OneHotPlan one_hot_;
  std::vector<std::string> feature_names_;
};

struct PipelineFit {
  FittedPipeline pipeline;
  Eigen::MatrixXd x_train;
  Target target;
};

PipelineFit fit_pipeline(const DataTable& train, const EncoderSpec& spec);

/// Feature columns of an all-numeric, missing-free table as a row-major
/// sample matrix.
Eigen::MatrixXd feature_matrix(const DataTable& table);

}  // namespace catenc
