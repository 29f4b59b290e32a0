#include "catenc/pipeline.hpp"

#include "catenc/error.hpp"

namespace catenc {

struct PipelineBuilder {
  static PipelineFit fit(const DataTable& train, const EncoderSpec& spec) {
    PipelineFit out;
    auto& p = out.pipeline;
    auto [imputed, imputation] = impute_stage1(train);
    p.imputation_ = std::move(imputation);
    auto enc = fit_encoder(imputed, spec);
    p.encoder_ = std::move(enc.encoder);
    auto stage2 = impute_stage2(enc.training_encoding, p.encoder_.fallbacks());
    auto [kept, drop] = drop_constant_columns(stage2);
    p.drop_ = std::move(drop);
    auto [expanded, one_hot] = final_one_hot(kept);
    p.one_hot_ = std::move(one_hot);
    for (auto j : expanded.feature_indices()) p.feature_names_.push_back(expanded.column(j).name);
    out.x_train = feature_matrix(expanded);
    out.target = Target::from_table(train);
    return out;
  }
};

DataTable FittedPipeline::transform_table(const DataTable& table) const {
  auto imputed = imputation_.apply(table);
  auto encoded = encoder_.transform(imputed);
  auto filled = impute_stage2(encoded, encoder_.fallbacks());
  auto kept = drop_.apply(filled);
  return one_hot_.apply(kept);
}

Eigen::MatrixXd FittedPipeline::transform(const DataTable& table) const {
  auto out = transform_table(table);
  std::vector<std::string> names;
  for (auto j : out.feature_indices()) names.push_back(out.column(j).name);
  if (names != feature_names_) throw DataError("transformed feature columns differ from the training layout");
  return feature_matrix(out);
}

PipelineFit fit_pipeline(const DataTable& train, const EncoderSpec& spec) { return PipelineBuilder::fit(train, spec); }

Eigen::MatrixXd feature_matrix(const DataTable& table) {
  const auto idx = table.feature_indices();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(table.n_rows()), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& c = table.column(idx[k]);
    if (c.is_categorical()) throw DataError("column '" + c.name + "' is still categorical");
    if (c.missing_count() != 0) throw DataError("column '" + c.name + "' has missing cells");
    for (std::size_t i = 0; i < c.values.size(); ++i)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = c.values[i];
  }
  return x;
}

}  // namespace catenc
