#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "catenc/encoders.hpp"
#include "catenc/learners.hpp"
#include "catenc/table.hpp"

namespace catenc {

inline constexpr int kRecordSchemaVersion = 1;

struct BenchmarkRecord {
  int schema = kRecordSchemaVersion;
  std::string dataset;
  std::string strategy;
  int hct = 0;
  int glmm_folds = 0;
  std::string condition;
  std::string learner;
  int fold = 0;
  std::string metric;
  std::optional<double> value;  // empty on failure or degenerate fold
  double fit_seconds = 0.0;
  double transform_seconds = 0.0;
  double train_seconds = 0.0;
  double predict_seconds = 0.0;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  bool failed = false;
  bool degenerate = false;
  std::string error;

  double total_seconds() const { return fit_seconds + transform_seconds + train_seconds + predict_seconds; }
};

void to_json(nlohmann::json& j, const BenchmarkRecord& r);
void from_json(const nlohmann::json& j, BenchmarkRecord& r);
/// Compact single-line JSON with a fixed key order.
std::string to_jsonl(const BenchmarkRecord& r);
std::vector<BenchmarkRecord> read_records(std::istream& in);

struct Dataset {
  std::string name;
  DataTable table;
};

struct ConditionStatus {
  std::string dataset;
  std::string condition;
  int hct = 0;
  std::string status;  // ok | partial | failed | hct-infeasible | interrupted
  std::string detail;
};

/// True when the encoder would change at least one column of the table: a
/// routed column for encoding strategies, a deleted column for remove.
bool hct_feasible(const DataTable& table, const EncoderSpec& spec);

struct BenchmarkOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  int workers = 1;
  bool record_timings = true;  // false writes zero times for reproducible files
  /// Called once per record, in job order, from a single thread at a time.
  std::function<void(const BenchmarkRecord&)> sink;
  std::function<void(const std::string&)> progress;
  const std::atomic<bool>* stop = nullptr;
};

struct BenchmarkResult {
  std::vector<BenchmarkRecord> records;
  std::vector<ConditionStatus> status;
  bool interrupted = false;
};

/// Outer J-fold CV over datasets x encoders x learners. Every pipeline step
/// is fit on the fold's training part only.
BenchmarkResult run_benchmark(const std::vector<Dataset>& datasets, const std::vector<EncoderSpec>& encoders,
                              const std::vector<LearnerSpec>& learners, const BenchmarkOptions& options);

}  // namespace catenc
