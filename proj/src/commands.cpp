#include "catenc/commands.hpp"

#include <fstream>
#include <iostream>

#include "catenc/benchmark.hpp"
#include "catenc/config.hpp"
#include "catenc/csv.hpp"
#include "catenc/report.hpp"

namespace catenc {

int cmd_run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& log) {
  RunConfig cfg;
  std::vector<Dataset> datasets;
  try {
    cfg = load_config(config_path);
    if (options.output) cfg.output = *options.output;
    if (options.workers) cfg.workers = *options.workers;
    cfg.validate();
    for (const auto& d : cfg.datasets) datasets.push_back({d.name, load_dataset(d.csv, d.schema)});
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  std::filesystem::create_directories(cfg.output);
  {
    std::ofstream out(cfg.output / "resolved-config.json", std::ios::binary);
    out << resolved_config(cfg).dump(2) << '\n';
  }
  std::ofstream records(cfg.output / "records.jsonl", std::ios::binary | std::ios::trunc);
  if (!records) {
    log << "error: cannot write " << (cfg.output / "records.jsonl").string() << '\n';
    return kExitConfigError;
  }

  BenchmarkOptions bo;
  bo.folds = cfg.folds;
  bo.seed = cfg.seed;
  bo.workers = cfg.workers;
  bo.record_timings = cfg.timings;
  bo.stop = options.stop;
  bo.sink = [&](const BenchmarkRecord& r) { records << to_jsonl(r) << '\n' << std::flush; };
  if (!options.quiet) bo.progress = [&](const std::string& msg) { log << "done " << msg << '\n'; };

  BenchmarkResult result;
  try {
    result = run_benchmark(datasets, cfg.encoders, cfg.learners, bo);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  nlohmann::ordered_json manifest;
  manifest["tool"] = "catenc_bench";
  manifest["version"] = kVersion;
  manifest["record_schema"] = kRecordSchemaVersion;
  manifest["records"] = result.records.size();
  manifest["interrupted"] = result.interrupted;
  manifest["conditions"] = nlohmann::ordered_json::array();
  std::size_t succeeded = 0;
  for (const auto& s : result.status) {
    manifest["conditions"].push_back(
        {{"dataset", s.dataset}, {"condition", s.condition}, {"hct", s.hct}, {"status", s.status}, {"detail", s.detail}});
    if (s.status == "ok" || s.status == "partial") ++succeeded;
  }
  {
    std::ofstream out(cfg.output / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << '\n';
  }
  if (result.interrupted) log << "interrupted: partial results in " << cfg.output.string() << '\n';
  if (succeeded == 0) {
    log << "error: no condition succeeded\n";
    return kExitAllFailed;
  }
  return kExitOk;
}

int cmd_report(const std::filesystem::path& dir, std::ostream& log) {
  std::ifstream in(dir / "records.jsonl", std::ios::binary);
  if (!in) {
    log << "error: cannot read " << (dir / "records.jsonl").string() << '\n';
    return kExitConfigError;
  }
  try {
    const auto records = read_records(in);
    const auto report = build_report(records);
    write_report(report, dir / "report");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
  return kExitOk;
}

nlohmann::ordered_json profile_json(const std::string& name, const DatasetProfile& p) {
  nlohmann::ordered_json j;
  j["dataset"] = name;
  j["n_rows"] = p.n_rows;
  j["task"] = std::string(to_string(p.task.kind));
  j["n_classes"] = p.task.n_classes;
  j["categorical"] = nlohmann::ordered_json::array();
  for (const auto& c : p.categorical)
    j["categorical"].push_back({{"name", c.name},
                                {"n_levels", c.n_levels},
                                {"normalized_entropy", c.normalized_entropy},
                                {"missing_rate", c.missing_rate}});
  return j;
}

int cmd_profile(const std::string& name, const std::filesystem::path& csv, const std::filesystem::path& schema,
                std::ostream& out, std::ostream& log) {
  try {
    const auto table = load_dataset(csv, schema);
    out << profile_json(name, profile_dataset(table)).dump(2) << '\n';
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
  return kExitOk;
}

}  // namespace catenc
