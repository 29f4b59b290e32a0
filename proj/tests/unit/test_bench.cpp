#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numeric>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "../support/builders.hpp"
#include "catenc/benchmark.hpp"
#include "catenc/commands.hpp"
#include "catenc/config.hpp"
#include "catenc/csv.hpp"
#include "catenc/pipeline.hpp"
#include "catenc/report.hpp"

using namespace catenc;
using testkit::cat;
using testkit::num;

namespace {

namespace fs = std::filesystem;

const Strategy kAllStrategies[] = {Strategy::integer, Strategy::frequency, Strategy::one_hot,
                                   Strategy::dummy,   Strategy::hash,      Strategy::leaf,
                                   Strategy::impact,  Strategy::glmm,      Strategy::remove};

/// Mixed table with a high-cardinality column, a low-cardinality column with
/// missing cells, a constant column and a numeric column.
DataTable fuzz_table(std::mt19937_64& rng, std::size_t n, TaskKind kind, int level_offset) {
  std::normal_distribution<double> g(0, 1);
  std::vector<std::string> hi, lo, konst;
  std::vector<double> x, yv;
  std::vector<std::int32_t> yc;
  for (std::size_t i = 0; i < n; ++i) {
    const int l = static_cast<int>(rng() % 30) + level_offset;
    hi.push_back("h" + std::to_string(l));
    lo.push_back(rng() % 7 == 0 ? "" : std::string(1, static_cast<char>('a' + rng() % 3)));
    konst.push_back("k");
    x.push_back(rng() % 9 == 0 ? std::nan("") : g(rng));
    const double s = 0.1 * (l % 5) + g(rng);
    yv.push_back(s);
  }
  std::vector<Column> cols{cat("hi", hi), cat("lo", lo), cat("konst", konst), num("x", x)};
  if (kind == TaskKind::regression) {
    cols.push_back(num("y", yv));
    return DataTable(std::move(cols), 4, {TaskKind::regression, 0});
  }
  const int c = kind == TaskKind::binary ? 2 : 3;
  // Every class present: the first c rows cycle through the classes.
  for (std::size_t i = 0; i < n; ++i)
    yc.push_back(i < static_cast<std::size_t>(c) ? static_cast<std::int32_t>(i)
                                                 : static_cast<std::int32_t>(std::abs(static_cast<long>(yv[i] * 3)) % c));
  std::vector<std::string> levels{"c0", "c1", "c2"};
  levels.resize(static_cast<std::size_t>(c));
  cols.push_back(Column::from_codes("y", levels, yc));
  return DataTable(std::move(cols), 4, {kind, c});
}

EncoderSpec spec_of(Strategy s, int hct, int glmm_folds = 0) {
  EncoderSpec e;
  e.strategy = s;
  e.hct = hct;
  e.glmm_folds = s == Strategy::glmm ? glmm_folds : 0;
  e.seed = 11;
  return e;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("catenc_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_small_dataset(const fs::path& dir) {
  std::string csv = "color,size,y\n";
  for (int i = 0; i < 40; ++i)
    csv += std::string(i % 3 == 0 ? "red" : i % 3 == 1 ? "blue" : "green") + "," + std::to_string(i % 7) + "," +
           (i % 2 ? "yes" : "no") + "\n";
  write_file(dir / "d.csv", csv);
  write_file(dir / "d.json",
             R"({"columns":[{"name":"color","kind":"categorical"},{"name":"size","kind":"numeric"},)"
             R"({"name":"y","kind":"categorical"}],"target":"y"})");
}

BenchmarkRecord rec(const std::string& ds, const std::string& cond, int hct, int fold, double value, double secs) {
  BenchmarkRecord r;
  r.dataset = ds;
  r.strategy = cond;
  r.condition = cond;
  r.hct = hct;
  r.learner = "knn";
  r.fold = fold;
  r.metric = "auc";
  r.value = value;
  r.fit_seconds = secs;
  r.n_train = 80;
  r.n_test = 20;
  return r;
}

}  // namespace

TEST_CASE("pipeline totality on fuzzed tables") {
  std::mt19937_64 rng(21);
  for (auto kind : {TaskKind::regression, TaskKind::binary, TaskKind::multiclass}) {
    for (auto s : kAllStrategies) {
      for (int hct : {2, 10}) {
        const auto train = fuzz_table(rng, 120, kind, 0);
        const auto test = fuzz_table(rng, 40, kind, 20);  // shares some levels, adds unseen ones
        CAPTURE(to_string(s));
        CAPTURE(hct);
        const auto fit = fit_pipeline(train, spec_of(s, hct, 5));
        CHECK(fit.x_train.rows() == 120);
        CHECK(fit.x_train.allFinite());
        const auto xt = fit.pipeline.transform(test);
        CHECK(xt.rows() == 40);
        CHECK(xt.cols() == fit.x_train.cols());
        CHECK(xt.allFinite());
        for (const auto& name : fit.pipeline.feature_names()) CHECK(name.rfind("konst", 0) != 0);
      }
    }
  }
}

TEST_CASE("test targets never reach the fitted pipeline") {
  std::mt19937_64 rng(4);
  const auto train = fuzz_table(rng, 150, TaskKind::regression, 0);
  const auto test = fuzz_table(rng, 50, TaskKind::regression, 10);
  std::vector<Column> poisoned_cols = test.columns();
  for (auto& v : poisoned_cols[4].values) v = 1e6;
  const DataTable poisoned(std::move(poisoned_cols), 4, test.task());
  for (auto s : kAllStrategies) {
    const auto fit = fit_pipeline(train, spec_of(s, 5, 5));
    CHECK(fit.pipeline.transform(test) == fit.pipeline.transform(poisoned));
  }
}

TEST_CASE("pipeline fitted on training folds only") {
  std::mt19937_64 rng(5);
  const auto full = fuzz_table(rng, 200, TaskKind::binary, 0);
  std::vector<std::size_t> first(150);
  std::iota(first.begin(), first.end(), std::size_t{0});
  auto changed_cols = full.columns();
  for (std::size_t i = 150; i < 200; ++i) changed_cols[4].codes[i] = 1 - changed_cols[4].codes[i];
  const DataTable changed(std::move(changed_cols), 4, full.task());
  const auto a = fit_pipeline(full.take_rows(first), spec_of(Strategy::impact, 5));
  const auto b = fit_pipeline(changed.take_rows(first), spec_of(Strategy::impact, 5));
  CHECK(a.x_train == b.x_train);
}

TEST_CASE("benchmark") {
  const auto data = testkit::signal_dataset(3, 300, 40, 1.0, 1);
  const std::vector<Dataset> ds{{"sig", data}};
  const std::vector<EncoderSpec> enc{spec_of(Strategy::one_hot, 10), spec_of(Strategy::glmm, 10, 5),
                                     spec_of(Strategy::remove, 10)};
  const std::vector<LearnerSpec> learners{LearnerSpec::featureless(), LearnerSpec::knn()};
  BenchmarkOptions opt;
  opt.folds = 3;
  opt.seed = 9;
  opt.record_timings = false;

  SUBCASE("determinism across worker counts") {
    std::string a, b;
    opt.sink = [&](const BenchmarkRecord& r) { a += to_jsonl(r) + "\n"; };
    const auto r1 = run_benchmark(ds, enc, learners, opt);
    opt.workers = 3;
    opt.sink = [&](const BenchmarkRecord& r) { b += to_jsonl(r) + "\n"; };
    run_benchmark(ds, enc, learners, opt);
    CHECK(a == b);
    CHECK(r1.records.size() == 3 * 3 * 2);
    std::istringstream in(a);
    const auto back = read_records(in);
    REQUIRE(back.size() == r1.records.size());
    CHECK(to_jsonl(back[5]) == to_jsonl(r1.records[5]));
  }
  SUBCASE("featureless baseline and removed signal") {
    const auto res = run_benchmark(ds, enc, learners, opt);
    for (const auto& r : res.records) {
      CHECK(!r.failed);
      REQUIRE(r.value.has_value());
      if (r.learner == "featureless") CHECK(*r.value == 0.5);
      if (r.condition == "remove" && r.learner == "knn") CHECK(std::abs(*r.value - 0.5) < 0.15);
    }
  }
  SUBCASE("infeasible hct is skipped") {
    const auto res = run_benchmark(ds, {spec_of(Strategy::glmm, 100, 5)}, learners, opt);
    CHECK(res.records.empty());
    REQUIRE(res.status.size() == 1);
    CHECK(res.status[0].status == "hct-infeasible");
  }
  SUBCASE("stop flag interrupts") {
    std::atomic<bool> stop{true};
    opt.stop = &stop;
    const auto res = run_benchmark(ds, enc, learners, opt);
    CHECK(res.interrupted);
    CHECK(res.records.empty());
  }
}

TEST_CASE("hct feasibility") {
  const auto t = testkit::table({cat("a", {"p", "q", "r", "p"}), num("z", {1, 2, 3, 4}), num("y", {1, 2, 3, 5})});
  CHECK(hct_feasible(t, spec_of(Strategy::glmm, 2)));
  CHECK(!hct_feasible(t, spec_of(Strategy::glmm, 3)));
  CHECK(!hct_feasible(t, spec_of(Strategy::remove, 3)));
  CHECK(hct_feasible(t, spec_of(Strategy::one_hot, 50)));
  const auto numeric_only = testkit::table({num("z", {1, 2, 3, 4}), num("y", {1, 2, 3, 5})});
  CHECK(!hct_feasible(numeric_only, spec_of(Strategy::one_hot, 50)));
}

TEST_CASE("config") {
  const auto base = fs::path("/data");
  SUBCASE("expands the encoder grid") {
    const auto cfg = parse_config_toml(R"(
folds = 3
seed = 7
[[datasets]]
name = "d"
csv = "d.csv"
schema = "d.json"
[encoders]
strategies = ["integer", "glmm"]
hct = [10, 25]
glmm_folds = [0, 5]
[[learners]]
kind = "knn"
filter_top = "none"
)",
                                       "run.toml", base);
    CHECK(cfg.folds == 3);
    CHECK(cfg.datasets[0].csv == base / "d.csv");
    CHECK(cfg.encoders.size() == 2 + 4);
    CHECK(!cfg.learners[0].filter_top.has_value());
    const auto round = config_from_resolved(nlohmann::json::parse(resolved_config(cfg).dump()));
    CHECK(resolved_config(round).dump() == resolved_config(cfg).dump());
  }
  SUBCASE("errors carry a location") {
    auto message_of = [&](const std::string& text) {
      try {
        parse_config_toml(text, "bad.toml", base);
      } catch (const ConfigError& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    CHECK(message_of("folds = \"five\"\n").rfind("bad.toml:1:", 0) == 0);
    CHECK(message_of("folds = 5\nbogus = 1\n").rfind("bad.toml:2:", 0) == 0);
    CHECK(message_of("folds = [\n").rfind("bad.toml:", 0) == 0);
    CHECK(message_of("[[learners]]\nkind = \"forest\"\n").rfind("bad.toml:2:", 0) == 0);
  }
}

TEST_CASE("run and report commands") {
  const auto dir = fresh_dir("run");
  write_small_dataset(dir);
  write_file(dir / "run.toml", R"(
folds = 2
timings = "off"
output = "out"
[[datasets]]
name = "d"
csv = "d.csv"
schema = "d.json"
[encoders]
strategies = ["one_hot"]
[[learners]]
kind = "featureless"
)");
  std::ostringstream log;
  RunOptions opt;
  opt.quiet = true;
  REQUIRE(cmd_run(dir / "run.toml", opt, log) == kExitOk);
  std::istringstream in(read_file(dir / "out" / "records.jsonl"));
  CHECK(read_records(in).size() == 2);
  const auto first = read_file(dir / "out" / "records.jsonl");

  // The resolved snapshot reproduces the records byte for byte.
  RunOptions again = opt;
  again.output = dir / "out2";
  REQUIRE(cmd_run(dir / "out" / "resolved-config.json", again, log) == kExitOk);
  CHECK(read_file(dir / "out2" / "records.jsonl") == first);

  REQUIRE(cmd_report(dir / "out", log) == kExitOk);
  CHECK(fs::exists(dir / "out" / "report" / "performance.csv"));
  CHECK(fs::exists(dir / "out" / "report" / "consensus.json"));

  // A purely numeric dataset leaves every condition infeasible.
  write_file(dir / "n.csv", "a,b,y\n1,2,3\n2,1,4\n3,5,1\n4,4,2\n");
  write_file(dir / "n.json",
             R"({"columns":[{"name":"a","kind":"numeric"},{"name":"b","kind":"numeric"},)"
             R"({"name":"y","kind":"numeric"}],"target":"y"})");
  write_file(dir / "numeric.toml", R"(
folds = 2
output = "out3"
[[datasets]]
name = "n"
csv = "n.csv"
schema = "n.json"
[encoders]
strategies = ["glmm"]
[[learners]]
kind = "featureless"
)");
  CHECK(cmd_run(dir / "numeric.toml", opt, log) == kExitAllFailed);

  write_file(dir / "broken.toml", "folds = 1\n");
  CHECK(cmd_run(dir / "broken.toml", opt, log) == kExitConfigError);
}

TEST_CASE("report") {
  std::vector<BenchmarkRecord> recs;
  for (int f = 0; f < 5; ++f) {
    recs.push_back(rec("d1", "one_hot", 10, f, 0.70 + 0.01 * f, 1.0 + f));
    recs.push_back(rec("d1", "one_hot", 25, f, 0.72 + 0.01 * f, 2.0));
    recs.push_back(rec("d1", "integer", 10, f, 0.60 + 0.01 * f, 0.5));
    recs.push_back(rec("d1", "integer", 25, f, 0.60 + 0.01 * f, 0.5));
  }
  const auto rep = build_report(recs);
  SUBCASE("one-hot ratio is exactly one") {
    bool seen = false;
    for (const auto& r : rep.runtime) {
      CHECK(r.median > 0);
      if (r.condition != "one_hot") continue;
      seen = true;
      CHECK(r.median == 1.0);
      CHECK(r.min == 1.0);
      CHECK(r.max == 1.0);
    }
    CHECK(seen);
  }
  SUBCASE("best hct and ties") {
    for (const auto& p : rep.performance) {
      if (p.condition == "one_hot") CHECK(p.best_hct == 25);
      if (p.condition == "integer") CHECK(p.best_hct == 10);
    }
  }
  SUBCASE("same records give the same report") {
    const auto again = build_report(recs);
    const auto a = fresh_dir("rep_a"), b = fresh_dir("rep_b");
    write_report(rep, a);
    write_report(again, b);
    for (const auto* f : {"performance.csv", "runtime.csv", "consensus.json", "dendrogram.json"})
      CHECK(read_file(a / f) == read_file(b / f));
  }
  SUBCASE("single condition gives one tier") {
    std::vector<BenchmarkRecord> one;
    for (int f = 0; f < 3; ++f) one.push_back(rec("d1", "one_hot", 10, f, 0.7, 1.0));
    const auto r = build_report(one);
    REQUIRE(!r.consensus.empty());
    CHECK(r.consensus[0].consensus.order.tier == std::vector<int>{1});
  }
}

TEST_CASE("profile command") {
  const auto dir = fresh_dir("profile");
  std::string csv = "u,d,y\n";
  for (int i = 0; i < 400; ++i) csv += "l" + std::to_string(i % 4) + "," + (i < 396 ? "main" : "rare") + ",1\n";
  write_file(dir / "p.csv", csv);
  write_file(dir / "p.json",
             R"({"columns":[{"name":"u","kind":"categorical"},{"name":"d","kind":"categorical"},)"
             R"({"name":"y","kind":"numeric"}],"target":"y"})");
  std::ostringstream out, log;
  REQUIRE(cmd_profile("p", dir / "p.csv", dir / "p.json", out, log) == kExitOk);
  const auto j = nlohmann::json::parse(out.str());
  CHECK(j.dump().find("\"u\"") != std::string::npos);
  const auto table = load_dataset(dir / "p.csv", dir / "p.json");
  const auto prof = profile_dataset(table);
  REQUIRE(prof.categorical.size() == 2);
  CHECK(prof.categorical[0].normalized_entropy == doctest::Approx(1.0));
  CHECK(prof.categorical[1].normalized_entropy < 0.1);
}
