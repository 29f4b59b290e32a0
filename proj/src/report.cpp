#include "catenc/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "catenc/error.hpp"
#include "catenc/metrics.hpp"

namespace catenc {
namespace {

using Key3 = std::tuple<std::string, std::string, std::string>;  // dataset, learner, condition

struct CellStats {
  std::vector<double> values;  // per fold, NaN for degenerate
  bool failed = false;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t n_records = 0;
  double total_seconds = 0.0;
};

/// (dataset, learner, condition) -> hct -> fold statistics.
using Cells = std::map<Key3, std::map<int, CellStats>>;

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v)
    if (!std::isnan(x)) {
      s += x;
      ++n;
    }
  return n ? s / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Best HCT: best mean among settings without failures; ties go to the
/// smaller HCT.
std::optional<int> best_hct(const std::map<int, CellStats>& by_hct, bool higher) {
  std::optional<int> best;
  double best_mean = 0.0;
  for (const auto& [hct, cell] : by_hct) {
    if (cell.failed) continue;
    const double m = mean_of(cell.values);
    if (std::isnan(m)) continue;
    if (!best || (higher ? m > best_mean : m < best_mean)) {
      best = hct;
      best_mean = m;
    }
  }
  return best;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

nlohmann::ordered_json dendrogram_json(const Dendrogram& d, const std::vector<std::string>& labels) {
  nlohmann::ordered_json j;
  j["leaves"] = labels;
  j["merges"] = nlohmann::ordered_json::array();
  for (const auto& m : d.merges) j["merges"].push_back({{"a", m.a}, {"b", m.b}, {"height", m.height}, {"size", m.size}});
  return j;
}

Report build_report(const std::vector<BenchmarkRecord>& records, double alpha) {
  if (records.empty()) throw DataError("no records to report on");
  Report rep;
  Cells cells;
  std::map<std::string, std::string> metric_of_dataset;
  int n_folds = 0;
  for (const auto& r : records) n_folds = std::max(n_folds, r.fold + 1);
  for (const auto& r : records) {
    auto& cell = cells[{r.dataset, r.learner, r.condition}][r.hct];
    if (cell.values.empty()) cell.values.assign(static_cast<std::size_t>(n_folds), std::numeric_limits<double>::quiet_NaN());
    if (r.failed) cell.failed = true;
    if (r.value) cell.values[static_cast<std::size_t>(r.fold)] = *r.value;
    cell.n_train += r.n_train;
    cell.n_test += r.n_test;
    ++cell.n_records;
    cell.total_seconds += r.total_seconds();
    metric_of_dataset[r.dataset] = r.metric;
  }
  std::set<std::string> datasets, learners, conditions;
  std::set<int> hcts;
  for (const auto& [key, by_hct] : cells) {
    datasets.insert(std::get<0>(key));
    learners.insert(std::get<1>(key));
    conditions.insert(std::get<2>(key));
    for (const auto& [h, c] : by_hct) {
      hcts.insert(h);
      if (c.n_records < static_cast<std::size_t>(n_folds)) {
        rep.notes.push_back("incomplete folds for " + std::get<0>(key) + "/" + std::get<1>(key) + "/" +
                            std::get<2>(key) + " hct=" + std::to_string(h));
      }
    }
  }

  // (a) performance at best HCT.
  std::map<Key3, int> best;
  for (const auto& [key, by_hct] : cells) {
    const auto metric = metric_from_string(metric_of_dataset[std::get<0>(key)]);
    const auto h = best_hct(by_hct, higher_is_better(metric));
    if (!h) continue;
    best[key] = *h;
    const auto& cell = by_hct.at(*h);
    PerformanceRow row{std::get<0>(key), std::get<1>(key), std::get<2>(key), *h, std::string(to_string(metric))};
    row.mean = mean_of(cell.values);
    row.min = std::numeric_limits<double>::infinity();
    row.max = -std::numeric_limits<double>::infinity();
    for (double v : cell.values) {
      if (std::isnan(v)) continue;
      row.min = std::min(row.min, v);
      row.max = std::max(row.max, v);
      ++row.n_folds;
    }
    rep.performance.push_back(std::move(row));
  }

  // (b) relations and consensus per learner; scope is best-HCT or a fixed HCT.
  auto relations_for = [&](const std::string& learner, std::optional<int> fixed_hct, ConsensusEntry& entry) {
    // Conditions usable on every dataset.
    std::map<std::string, std::map<std::string, const CellStats*>> usable;  // dataset -> condition -> cell
    for (const auto& ds : datasets)
      for (const auto& cond : conditions) {
        auto it = cells.find({ds, learner, cond});
        if (it == cells.end()) continue;
        const CellStats* cell = nullptr;
        if (fixed_hct) {
          auto h = it->second.find(*fixed_hct);
          if (h != it->second.end() && !h->second.failed) cell = &h->second;
        } else {
          auto b = best.find({ds, learner, cond});
          if (b != best.end()) cell = &it->second.at(b->second);
        }
        if (cell) usable[ds][cond] = cell;
      }
    std::vector<Relation> rels;
    for (const auto& ds : datasets) {
      if (usable[ds].empty()) continue;
      entry.datasets.push_back(ds);
    }
    for (const auto& cond : conditions) {
      bool everywhere = !entry.datasets.empty();
      bool anywhere = false;
      for (const auto& ds : entry.datasets) {
        const bool has = usable[ds].count(cond) > 0;
        everywhere = everywhere && has;
        anywhere = anywhere || has;
      }
      if (everywhere)
        entry.conditions.push_back(cond);
      else if (anywhere)
        entry.dropped.push_back(cond);
    }
    if (entry.conditions.empty()) return rels;
    for (const auto& ds : entry.datasets) {
      std::vector<ConditionScores> scores;
      double n_train = 0.0, n_test = 0.0;
      for (const auto& cond : entry.conditions) {
        const auto* cell = usable[ds][cond];
        scores.push_back({cond, cell->values, false});
        n_train += static_cast<double>(cell->n_train);
        n_test += static_cast<double>(cell->n_test);
      }
      const auto metric = metric_from_string(metric_of_dataset[ds]);
      rels.push_back(build_relation(scores, metric, n_train, n_test, alpha));
    }
    return rels;
  };

  std::map<std::string, std::vector<Relation>> best_relations;  // learner -> per dataset
  std::map<std::string, std::vector<std::string>> best_datasets;
  for (const auto& learner : learners) {
    std::vector<std::optional<int>> scopes{std::nullopt};
    for (int h : hcts) scopes.emplace_back(h);
    for (const auto& scope : scopes) {
      ConsensusEntry entry;
      entry.learner = learner;
      entry.scope = scope ? "hct=" + std::to_string(*scope) : "best-hct";
      auto rels = relations_for(learner, scope, entry);
      if (rels.empty()) continue;
      entry.consensus = consensus_weak_order(rels);
      if (!scope) {
        best_relations[learner] = rels;
        best_datasets[learner] = entry.datasets;
      }
      rep.consensus.push_back(std::move(entry));
    }
  }

  // (d) per-dataset consensus across learners, clustered by complete linkage.
  {
    std::set<std::string> shared;
    bool first = true;
    for (const auto& e : rep.consensus) {
      if (e.scope != "best-hct") continue;
      std::set<std::string> s(e.conditions.begin(), e.conditions.end());
      if (first) {
        shared = s;
        first = false;
      } else {
        std::set<std::string> inter;
        std::set_intersection(shared.begin(), shared.end(), s.begin(), s.end(), std::inserter(inter, inter.end()));
        shared = std::move(inter);
      }
    }
    rep.dendrogram_conditions.assign(shared.begin(), shared.end());
    if (!shared.empty()) {
      for (const auto& ds : datasets) {
        std::vector<Relation> per_learner;
        for (const auto& [learner, rels] : best_relations) {
          const auto& dsets = best_datasets[learner];
          const auto pos = std::find(dsets.begin(), dsets.end(), ds);
          if (pos == dsets.end()) continue;
          const auto& full = rels[static_cast<std::size_t>(pos - dsets.begin())];
          auto sub = Relation::empty(rep.dendrogram_conditions);
          for (std::size_t i = 0; i < sub.size(); ++i)
            for (std::size_t k = 0; k < sub.size(); ++k) {
              const auto fi = static_cast<std::size_t>(
                  std::find(full.labels.begin(), full.labels.end(), sub.labels[i]) - full.labels.begin());
              const auto fk = static_cast<std::size_t>(
                  std::find(full.labels.begin(), full.labels.end(), sub.labels[k]) - full.labels.begin());
              sub.set(i, k, full.beats(fi, fk));
            }
          per_learner.push_back(std::move(sub));
        }
        if (per_learner.empty()) continue;
        const auto c = consensus_weak_order(per_learner);
        rep.dendrogram_datasets.push_back(ds);
        rep.dataset_relations.push_back(c.order.to_relation(rep.dendrogram_conditions));
      }
    }
    if (rep.dataset_relations.size() >= 2)
      rep.dendrogram = complete_linkage(rep.dataset_relations);
    else
      rep.notes.push_back("dendrogram needs at least two datasets with shared conditions");
  }

  // (c) runtime ratios against one-hot on the same dataset, learner and HCT.
  std::map<std::pair<std::string, std::string>, std::vector<double>> ratios;  // learner, condition
  bool zero_baseline = false;
  for (const auto& [key, by_hct] : cells) {
    const auto& [ds, learner, cond] = key;
    const auto base = cells.find({ds, learner, std::string("one_hot")});
    if (base == cells.end()) continue;
    for (const auto& [h, cell] : by_hct) {
      const auto b = base->second.find(h);
      if (b == base->second.end() || cell.failed || b->second.failed) continue;
      const double denom = b->second.total_seconds / static_cast<double>(b->second.n_records);
      const double num = cell.total_seconds / static_cast<double>(cell.n_records);
      if (!(denom > 0.0)) {
        zero_baseline = true;
        continue;
      }
      ratios[{learner, cond}].push_back(num / denom);
    }
  }
  if (zero_baseline) rep.notes.push_back("runtime ratios skipped where one-hot time is zero (timings off)");
  for (auto& [key, v] : ratios) {
    RuntimeRow row{key.first, key.second};
    row.n = v.size();
    row.median = median_of(v);
    row.min = *std::min_element(v.begin(), v.end());
    row.max = *std::max_element(v.begin(), v.end());
    rep.runtime.push_back(std::move(row));
  }
  return rep;
}

void write_report(const Report& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("performance.csv");
    out << "dataset,learner,condition,best_hct,metric,mean,min,max,n_folds\n";
    for (const auto& r : rep.performance)
      out << csv_field(r.dataset) << ',' << csv_field(r.learner) << ',' << csv_field(r.condition) << ','
          << r.best_hct << ',' << r.metric << ',' << format_double(r.mean) << ',' << format_double(r.min) << ','
          << format_double(r.max) << ',' << r.n_folds << '\n';
  }
  {
    auto out = open("runtime.csv");
    out << "learner,condition,median,min,max,n\n";
    for (const auto& r : rep.runtime)
      out << csv_field(r.learner) << ',' << csv_field(r.condition) << ',' << format_double(r.median) << ','
          << format_double(r.min) << ',' << format_double(r.max) << ',' << r.n << '\n';
  }
  {
    nlohmann::ordered_json j;
    j["consensus_kind"] = "weak-order";
    j["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : rep.consensus) {
      nlohmann::ordered_json tiers = nlohmann::ordered_json::object();
      for (std::size_t i = 0; i < e.conditions.size(); ++i) tiers[e.conditions[i]] = e.consensus.order.tier[i];
      j["entries"].push_back({{"learner", e.learner},
                              {"scope", e.scope},
                              {"datasets", e.datasets},
                              {"tiers", tiers},
                              {"total_distance", e.consensus.total_distance},
                              {"exact", e.consensus.exact},
                              {"dropped", e.dropped}});
    }
    j["notes"] = rep.notes;
    open("consensus.json") << j.dump(2) << '\n';
  }
  {
    nlohmann::ordered_json j;
    j["dataset_consensus"] = "weak-order";
    j["conditions"] = rep.dendrogram_conditions;
    if (rep.dendrogram) {
      auto d = dendrogram_json(*rep.dendrogram, rep.dendrogram_datasets);
      j["leaves"] = d["leaves"];
      j["merges"] = d["merges"];
    } else {
      j["leaves"] = rep.dendrogram_datasets;
      j["merges"] = nlohmann::ordered_json::array();
    }
    open("dendrogram.json") << j.dump(2) << '\n';
  }
}

}  // namespace catenc
