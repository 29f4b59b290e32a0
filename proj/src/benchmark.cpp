#include "catenc/benchmark.hpp"

#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <mutex>
#include <thread>

#include "catenc/error.hpp"
#include "catenc/folds.hpp"
#include "catenc/metrics.hpp"
#include "catenc/pipeline.hpp"
#include "catenc/random.hpp"

namespace catenc {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t name_tag(const std::string& name) { return stable_hash(name, 0); }

struct Job {
  std::size_t dataset = 0;
  std::size_t encoder = 0;
  int fold = 0;
};

struct Condition {
  std::size_t dataset = 0;
  std::size_t encoder = 0;
};

std::vector<BenchmarkRecord> run_job(const Dataset& ds, const FoldAssignment& folds, const EncoderSpec& base_spec,
                                     const std::vector<LearnerSpec>& learners, int fold, std::uint64_t master,
                                     bool timings) {
  const auto train_rows = folds.train_rows(fold);
  const auto test_rows = folds.test_rows(fold);
  const auto metric = metric_for(ds.table.task());
  const auto job_seed = derive_seed(master, {name_tag(ds.name), static_cast<std::uint64_t>(fold)});

  BenchmarkRecord proto;
  proto.dataset = ds.name;
  proto.strategy = std::string(to_string(base_spec.strategy));
  proto.hct = base_spec.hct;
  proto.glmm_folds = base_spec.glmm_folds;
  proto.condition = base_spec.condition();
  proto.fold = fold;
  proto.metric = std::string(to_string(metric));
  proto.seed = job_seed;
  proto.n_train = train_rows.size();
  proto.n_test = test_rows.size();

  auto spec = base_spec;
  spec.seed = derive_seed(job_seed, {1});

  std::vector<BenchmarkRecord> out;
  auto fail_all = [&](const std::string& what) {
    for (const auto& l : learners) {
      auto r = proto;
      r.learner = l.label();
      r.failed = true;
      r.error = what;
      out.push_back(std::move(r));
    }
    return out;
  };

  PipelineFit fit;
  Eigen::MatrixXd x_test;
  Target y_test;
  try {
    const auto train = ds.table.take_rows(train_rows);
    const auto test = ds.table.take_rows(test_rows);
    auto t0 = Clock::now();
    fit = fit_pipeline(train, spec);
    proto.fit_seconds = timings ? seconds_since(t0) : 0.0;
    t0 = Clock::now();
    x_test = fit.pipeline.transform(test);
    proto.transform_seconds = timings ? seconds_since(t0) : 0.0;
    y_test = Target::from_table(test);
  } catch (const std::exception& e) {
    return fail_all(e.what());
  }

  for (const auto& base_learner : learners) {
    auto r = proto;
    r.learner = base_learner.label();
    auto lspec = base_learner;
    lspec.seed = derive_seed(job_seed, {2});
    try {
      auto t0 = Clock::now();
      const auto model = fit_learner(lspec, fit.x_train, fit.target);
      r.train_seconds = timings ? seconds_since(t0) : 0.0;
      t0 = Clock::now();
      const auto pred = model->predict(x_test);
      r.predict_seconds = timings ? seconds_since(t0) : 0.0;
      if (!pred.allFinite()) throw Error("learner produced non-finite predictions");
      try {
        r.value = evaluate(metric, pred, y_test);
      } catch (const DegenerateFold& e) {
        r.degenerate = true;
        r.error = e.what();
      }
    } catch (const std::exception& e) {
      r.failed = true;
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

void to_json(nlohmann::json& j, const BenchmarkRecord& r) { j = nlohmann::json::parse(to_jsonl(r)); }

std::string to_jsonl(const BenchmarkRecord& r) {
  nlohmann::ordered_json j;
  j["schema"] = r.schema;
  j["dataset"] = r.dataset;
  j["strategy"] = r.strategy;
  j["hct"] = r.hct;
  j["glmm_folds"] = r.glmm_folds;
  j["condition"] = r.condition;
  j["learner"] = r.learner;
  j["fold"] = r.fold;
  j["metric"] = r.metric;
  if (r.value)
    j["value"] = *r.value;
  else
    j["value"] = nullptr;
  j["fit_seconds"] = r.fit_seconds;
  j["transform_seconds"] = r.transform_seconds;
  j["train_seconds"] = r.train_seconds;
  j["predict_seconds"] = r.predict_seconds;
  j["seed"] = r.seed;
  j["n_train"] = r.n_train;
  j["n_test"] = r.n_test;
  j["failed"] = r.failed;
  j["degenerate"] = r.degenerate;
  j["error"] = r.error;
  return j.dump();
}

void from_json(const nlohmann::json& j, BenchmarkRecord& r) {
  r.schema = j.at("schema").get<int>();
  if (r.schema != kRecordSchemaVersion)
    throw DataError("unsupported record schema version " + std::to_string(r.schema));
  r.dataset = j.at("dataset").get<std::string>();
  r.strategy = j.at("strategy").get<std::string>();
  r.hct = j.at("hct").get<int>();
  r.glmm_folds = j.at("glmm_folds").get<int>();
  r.condition = j.at("condition").get<std::string>();
  r.learner = j.at("learner").get<std::string>();
  r.fold = j.at("fold").get<int>();
  r.metric = j.at("metric").get<std::string>();
  if (j.at("value").is_null())
    r.value.reset();
  else
    r.value = j.at("value").get<double>();
  r.fit_seconds = j.at("fit_seconds").get<double>();
  r.transform_seconds = j.at("transform_seconds").get<double>();
  r.train_seconds = j.at("train_seconds").get<double>();
  r.predict_seconds = j.at("predict_seconds").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.n_train = j.at("n_train").get<std::size_t>();
  r.n_test = j.at("n_test").get<std::size_t>();
  r.failed = j.at("failed").get<bool>();
  r.degenerate = j.at("degenerate").get<bool>();
  r.error = j.at("error").get<std::string>();
}

std::vector<BenchmarkRecord> read_records(std::istream& in) {
  std::vector<BenchmarkRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<BenchmarkRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw DataError("records line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

bool hct_feasible(const DataTable& table, const EncoderSpec& spec) {
  const auto plan = apply_hct_routing(table, spec);
  return plan.count(Route::encoded) + plan.count(Route::indicator) + plan.count(Route::removed) > 0;
}

BenchmarkResult run_benchmark(const std::vector<Dataset>& datasets, const std::vector<EncoderSpec>& encoders,
                              const std::vector<LearnerSpec>& learners, const BenchmarkOptions& options) {
  if (datasets.empty()) throw InvalidArgument("benchmark needs at least one dataset");
  if (encoders.empty()) throw InvalidArgument("benchmark needs at least one encoder");
  if (learners.empty()) throw InvalidArgument("benchmark needs at least one learner");
  if (options.folds < 2) throw InvalidArgument("benchmark needs at least 2 folds");
  for (const auto& e : encoders) e.validate();
  for (const auto& l : learners) l.validate();

  BenchmarkResult result;
  std::vector<FoldAssignment> folds;
  std::vector<Condition> conditions;
  std::vector<Job> jobs;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const auto& ds = datasets[d];
    folds.push_back(stratified_kfold(ds.table, options.folds, derive_seed(options.seed, {name_tag(ds.name), 0xf01d})));
    for (std::size_t e = 0; e < encoders.size(); ++e) {
      ConditionStatus st{ds.name, encoders[e].condition(), encoders[e].hct, "ok", ""};
      if (!hct_feasible(ds.table, encoders[e])) {
        st.status = "hct-infeasible";
        st.detail = "encoder touches no column at HCT " + std::to_string(encoders[e].hct);
        result.status.push_back(std::move(st));
        continue;
      }
      result.status.push_back(std::move(st));
      conditions.push_back({d, e});
      for (int f = 0; f < options.folds; ++f) jobs.push_back({d, e, f});
    }
  }

  std::vector<std::optional<std::vector<BenchmarkRecord>>> done(jobs.size());
  std::size_t next_emit = 0;
  std::mutex mu;
  std::atomic<std::size_t> next_job{0};

  auto emit_ready = [&] {
    while (next_emit < done.size() && done[next_emit]) {
      for (auto& r : *done[next_emit]) {
        if (options.sink) options.sink(r);
        result.records.push_back(std::move(r));
      }
      done[next_emit]->clear();
      ++next_emit;
    }
  };

  auto worker = [&] {
    while (true) {
      if (options.stop && options.stop->load()) return;
      const auto k = next_job.fetch_add(1);
      if (k >= jobs.size()) return;
      const auto& job = jobs[k];
      auto records = run_job(datasets[job.dataset], folds[job.dataset], encoders[job.encoder], learners, job.fold,
                             options.seed, options.record_timings);
      std::lock_guard<std::mutex> lock(mu);
      done[k] = std::move(records);
      emit_ready();
      if (options.progress)
        options.progress(datasets[job.dataset].name + " " + encoders[job.encoder].condition() + " hct=" +
                         std::to_string(encoders[job.encoder].hct) + " fold " + std::to_string(job.fold));
    }
  };

  const int n_workers = std::max(1, std::min<int>(options.workers, static_cast<int>(jobs.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  result.interrupted = next_emit < jobs.size();

  // Condition status from the emitted records.
  std::map<std::pair<std::string, std::pair<std::string, int>>, std::pair<std::size_t, std::size_t>> tally;
  for (const auto& r : result.records) {
    auto& t = tally[{r.dataset, {r.condition, r.hct}}];
    ++t.first;
    if (r.failed) ++t.second;
  }
  const auto expected = static_cast<std::size_t>(options.folds) * learners.size();
  for (auto& st : result.status) {
    if (st.status == "hct-infeasible") continue;
    const auto it = tally.find({st.dataset, {st.condition, st.hct}});
    const std::size_t n = it == tally.end() ? 0 : it->second.first;
    const std::size_t failed = it == tally.end() ? 0 : it->second.second;
    if (n < expected) {
      st.status = "interrupted";
      st.detail = std::to_string(n) + " of " + std::to_string(expected) + " records written";
    } else if (failed == n) {
      st.status = "failed";
      st.detail = "all records failed";
    } else if (failed > 0) {
      st.status = "partial";
      st.detail = std::to_string(failed) + " of " + std::to_string(n) + " records failed";
    }
  }
  return result;
}

}  // namespace catenc
