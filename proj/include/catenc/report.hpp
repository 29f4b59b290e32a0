#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "catenc/benchmark.hpp"
#include "catenc/consensus.hpp"

namespace catenc {

/// Fold statistics of one condition at its best HCT.
struct PerformanceRow {
  std::string dataset;
  std::string learner;
  std::string condition;
  int best_hct = 0;
  std::string metric;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t n_folds = 0;
};

/// Total pipeline time relative to one-hot on the same dataset, learner and
/// HCT, summarized across those matches.
struct RuntimeRow {
  std::string learner;
  std::string condition;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

struct ConsensusEntry {
  std::string learner;
  std::string scope;  // "best-hct" or "hct=<value>"
  std::vector<std::string> datasets;
  std::vector<std::string> conditions;
  std::vector<std::string> dropped;  // missing or failed on some dataset
  Consensus consensus;
};

struct Report {
  std::vector<PerformanceRow> performance;
  std::vector<ConsensusEntry> consensus;
  std::vector<RuntimeRow> runtime;
  std::vector<std::string> dendrogram_datasets;
  std::vector<std::string> dendrogram_conditions;
  std::vector<Relation> dataset_relations;  // consensus over learners per dataset
  std::optional<Dendrogram> dendrogram;
  std::vector<std::string> notes;
};

/// Pure function of the records.
Report build_report(const std::vector<BenchmarkRecord>& records, double alpha = 0.05);

/// Writes performance.csv, consensus.json, runtime.csv and dendrogram.json.
void write_report(const Report& report, const std::filesystem::path& dir);

std::string format_double(double v);
nlohmann::ordered_json dendrogram_json(const Dendrogram& d, const std::vector<std::string>& labels);

}  // namespace catenc
