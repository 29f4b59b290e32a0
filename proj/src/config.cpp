#include "catenc/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

namespace catenc {
namespace {

std::string location(std::string_view source, const toml::source_region& region) {
  std::ostringstream os;
  os << source << ":" << region.begin.line << ":" << region.begin.column << ": ";
  return os.str();
}

class TomlReader {
 public:
  explicit TomlReader(std::string_view source) : source_(source) {}

  [[noreturn]] void fail(const toml::node& node, const std::string& message) const {
    throw ConfigError(location(source_, node.source()) + message);
  }
  [[noreturn]] void fail_at_table(const toml::table& t, const std::string& message) const {
    throw ConfigError(location(source_, t.source()) + message);
  }

  template <typename T>
  std::optional<T> get(const toml::table& t, std::string_view key) const {
    const auto* node = t.get(key);
    if (!node) return std::nullopt;
    if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = node->value<std::string>()) return *v;
      fail(*node, "'" + std::string(key) + "' must be a string");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (node->is_boolean()) return node->value<bool>();
      fail(*node, "'" + std::string(key) + "' must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (node->is_integer()) return static_cast<T>(*node->value<std::int64_t>());
      fail(*node, "'" + std::string(key) + "' must be an integer");
    } else {
      if (node->is_number()) return *node->value<double>();
      fail(*node, "'" + std::string(key) + "' must be a number");
    }
  }

  std::vector<const toml::node*> array(const toml::table& t, std::string_view key) const {
    std::vector<const toml::node*> out;
    const auto* node = t.get(key);
    if (!node) return out;
    const auto* arr = node->as_array();
    if (!arr) fail(*node, "'" + std::string(key) + "' must be an array");
    for (const auto& v : *arr) out.push_back(&v);
    return out;
  }

  void check_keys(const toml::table& t, std::initializer_list<std::string_view> allowed) const {
    for (const auto& [k, v] : t) {
      bool ok = false;
      for (auto a : allowed) ok = ok || k.str() == a;
      if (!ok) fail(v, "unknown key '" + std::string(k.str()) + "'");
    }
  }

 private:
  std::string source_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal();
}

LearnerSpec parse_learner(const TomlReader& rd, const toml::table& t) {
  rd.check_keys(t, {"kind", "k", "filter_top", "ridge_cv_folds", "ridge_grid_size", "ridge_lambda"});
  const auto kind_s = rd.get<std::string>(t, "kind");
  if (!kind_s) rd.fail_at_table(t, "learner needs a 'kind'");
  LearnerSpec spec;
  try {
    const auto kind = learner_kind_from_string(*kind_s);
    if (kind == LearnerKind::knn)
      spec = LearnerSpec::knn();
    else if (kind == LearnerKind::ridge)
      spec = LearnerSpec::ridge();
  } catch (const InvalidArgument& e) {
    rd.fail(*t.get("kind"), e.what());
  }
  if (auto v = rd.get<int>(t, "k")) spec.k = *v;
  if (const auto* node = t.get("filter_top")) {
    if (auto s = node->value<std::string>(); s && *s == "none")
      spec.filter_top.reset();
    else if (node->is_integer())
      spec.filter_top = static_cast<int>(*node->value<std::int64_t>());
    else
      rd.fail(*node, "'filter_top' must be an integer or \"none\"");
  }
  if (auto v = rd.get<int>(t, "ridge_cv_folds")) spec.ridge_cv_folds = *v;
  if (auto v = rd.get<int>(t, "ridge_grid_size")) spec.ridge_grid_size = *v;
  if (auto v = rd.get<double>(t, "ridge_lambda")) spec.ridge_lambda = *v;
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    rd.fail_at_table(t, e.what());
  }
  return spec;
}

std::vector<EncoderSpec> parse_encoders(const TomlReader& rd, const toml::table& t) {
  rd.check_keys(t, {"strategies", "hct", "glmm_folds", "shuffle_integer", "relative_frequency",
                    "binary_single_column", "spherical_modes", "impact_epsilon"});
  EncoderSpec proto;
  if (auto v = rd.get<bool>(t, "shuffle_integer")) proto.shuffle_integer = *v;
  if (auto v = rd.get<bool>(t, "relative_frequency")) proto.relative_frequency = *v;
  if (auto v = rd.get<bool>(t, "binary_single_column")) proto.binary_single_column = *v;
  if (auto v = rd.get<bool>(t, "spherical_modes")) proto.spherical_modes = *v;
  if (auto v = rd.get<double>(t, "impact_epsilon")) proto.impact_epsilon = *v;

  std::vector<Strategy> strategies;
  for (const auto* n : rd.array(t, "strategies")) {
    auto s = n->value<std::string>();
    if (!s) rd.fail(*n, "strategies must be strings");
    try {
      strategies.push_back(strategy_from_string(*s));
    } catch (const InvalidArgument& e) {
      rd.fail(*n, e.what());
    }
  }
  if (strategies.empty()) rd.fail_at_table(t, "[encoders] needs a non-empty 'strategies' array");
  std::vector<int> hcts;
  for (const auto* n : rd.array(t, "hct")) {
    if (!n->is_integer()) rd.fail(*n, "hct values must be integers");
    hcts.push_back(static_cast<int>(*n->value<std::int64_t>()));
  }
  if (hcts.empty()) hcts = {10};
  std::vector<int> glmm_folds;
  for (const auto* n : rd.array(t, "glmm_folds")) {
    if (!n->is_integer()) rd.fail(*n, "glmm_folds values must be integers");
    glmm_folds.push_back(static_cast<int>(*n->value<std::int64_t>()));
  }
  if (glmm_folds.empty()) glmm_folds = {5};

  std::vector<EncoderSpec> out;
  for (auto s : strategies) {
    for (int h : hcts) {
      const auto folds = s == Strategy::glmm ? glmm_folds : std::vector<int>{0};
      for (int f : folds) {
        auto spec = proto;
        spec.strategy = s;
        spec.hct = h;
        spec.glmm_folds = f;
        try {
          spec.validate();
        } catch (const InvalidArgument& e) {
          rd.fail_at_table(t, e.what());
        }
        out.push_back(spec);
      }
    }
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (datasets.empty()) throw ConfigError("config needs at least one dataset");
  if (encoders.empty()) throw ConfigError("config needs at least one encoder");
  if (learners.empty()) throw ConfigError("config needs at least one learner");
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  std::set<std::string> names;
  for (const auto& d : datasets)
    if (!names.insert(d.name).second) throw ConfigError("duplicate dataset name '" + d.name + "'");
  std::set<std::string> labels;
  for (const auto& l : learners)
    if (!labels.insert(l.label()).second) throw ConfigError("duplicate learner '" + l.label() + "'");
}

const DatasetEntry& RunConfig::dataset(std::string_view name) const {
  for (const auto& d : datasets)
    if (d.name == name) return d;
  throw ConfigError("no dataset named '" + std::string(name) + "' in config");
}

int default_workers() {
  if (const char* env = std::getenv("CATENC_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

RunConfig parse_config_toml(std::string_view text, std::string_view source_name,
                            const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    throw ConfigError(location(source_name, e.source()) + std::string(e.description()));
  }
  const TomlReader rd(source_name);
  rd.check_keys(root, {"folds", "seed", "output", "workers", "timings", "datasets", "encoders", "learners"});
  RunConfig cfg;
  cfg.workers = default_workers();
  if (auto v = rd.get<int>(root, "folds")) cfg.folds = *v;
  if (auto v = rd.get<std::int64_t>(root, "seed")) cfg.seed = static_cast<std::uint64_t>(*v);
  if (auto v = rd.get<std::string>(root, "output")) cfg.output = resolve(base_dir, *v);
  else cfg.output = resolve(base_dir, "results");
  if (auto v = rd.get<int>(root, "workers")) cfg.workers = *v;
  if (const auto* node = root.get("timings")) {
    auto s = node->value<std::string>();
    if (s && *s == "wall")
      cfg.timings = true;
    else if (s && *s == "off")
      cfg.timings = false;
    else
      rd.fail(*node, "'timings' must be \"wall\" or \"off\"");
  }
  for (const auto* n : rd.array(root, "datasets")) {
    const auto* t = n->as_table();
    if (!t) rd.fail(*n, "each [[datasets]] entry must be a table");
    rd.check_keys(*t, {"name", "csv", "schema"});
    DatasetEntry d;
    auto name = rd.get<std::string>(*t, "name");
    auto csv = rd.get<std::string>(*t, "csv");
    auto schema = rd.get<std::string>(*t, "schema");
    if (!name || !csv || !schema) rd.fail_at_table(*t, "dataset entries need 'name', 'csv' and 'schema'");
    d.name = *name;
    d.csv = resolve(base_dir, *csv);
    d.schema = resolve(base_dir, *schema);
    cfg.datasets.push_back(std::move(d));
  }
  if (const auto* node = root.get("encoders")) {
    const auto* t = node->as_table();
    if (!t) rd.fail(*node, "[encoders] must be a table");
    cfg.encoders = parse_encoders(rd, *t);
  }
  for (const auto* n : rd.array(root, "learners")) {
    const auto* t = n->as_table();
    if (!t) rd.fail(*n, "each [[learners]] entry must be a table");
    cfg.learners.push_back(parse_learner(rd, *t));
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(source_name) + ":1:1: " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto text = buf.str();
  if (path.extension() == ".json") {
    try {
      return config_from_resolved(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_config_toml(text, path.string(), std::filesystem::absolute(base));
}

nlohmann::ordered_json resolved_config(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["folds"] = c.folds;
  j["seed"] = c.seed;
  j["output"] = c.output.string();
  j["workers"] = c.workers;
  j["timings"] = c.timings ? "wall" : "off";
  j["datasets"] = nlohmann::ordered_json::array();
  for (const auto& d : c.datasets)
    j["datasets"].push_back({{"name", d.name}, {"csv", d.csv.string()}, {"schema", d.schema.string()}});
  j["encoders"] = nlohmann::ordered_json::array();
  for (const auto& e : c.encoders) {
    j["encoders"].push_back({{"strategy", std::string(to_string(e.strategy))},
                             {"hct", e.hct},
                             {"glmm_folds", e.glmm_folds},
                             {"shuffle_integer", e.shuffle_integer},
                             {"relative_frequency", e.relative_frequency},
                             {"binary_single_column", e.binary_single_column},
                             {"spherical_modes", e.spherical_modes},
                             {"impact_epsilon", e.impact_epsilon}});
  }
  j["learners"] = nlohmann::ordered_json::array();
  for (const auto& l : c.learners) {
    nlohmann::ordered_json lj{{"kind", std::string(to_string(l.kind))},
                              {"k", l.k},
                              {"filter_top", nullptr},
                              {"ridge_cv_folds", l.ridge_cv_folds},
                              {"ridge_grid_size", l.ridge_grid_size},
                              {"ridge_lambda", nullptr}};
    if (l.filter_top) lj["filter_top"] = *l.filter_top;
    if (l.ridge_lambda) lj["ridge_lambda"] = *l.ridge_lambda;
    j["learners"].push_back(std::move(lj));
  }
  return j;
}

RunConfig config_from_resolved(const nlohmann::json& j) {
  RunConfig c;
  c.folds = j.at("folds").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.output = j.at("output").get<std::string>();
  c.workers = j.at("workers").get<int>();
  const auto timings = j.at("timings").get<std::string>();
  if (timings != "wall" && timings != "off") throw ConfigError("'timings' must be \"wall\" or \"off\"");
  c.timings = timings == "wall";
  for (const auto& d : j.at("datasets"))
    c.datasets.push_back({d.at("name").get<std::string>(), d.at("csv").get<std::string>(),
                          d.at("schema").get<std::string>()});
  for (const auto& e : j.at("encoders")) {
    EncoderSpec s;
    s.strategy = strategy_from_string(e.at("strategy").get<std::string>());
    s.hct = e.at("hct").get<int>();
    s.glmm_folds = e.at("glmm_folds").get<int>();
    s.shuffle_integer = e.at("shuffle_integer").get<bool>();
    s.relative_frequency = e.at("relative_frequency").get<bool>();
    s.binary_single_column = e.at("binary_single_column").get<bool>();
    s.spherical_modes = e.at("spherical_modes").get<bool>();
    s.impact_epsilon = e.at("impact_epsilon").get<double>();
    s.validate();
    c.encoders.push_back(s);
  }
  for (const auto& l : j.at("learners")) {
    LearnerSpec s;
    s.kind = learner_kind_from_string(l.at("kind").get<std::string>());
    s.k = l.at("k").get<int>();
    if (!l.at("filter_top").is_null()) s.filter_top = l.at("filter_top").get<int>();
    s.ridge_cv_folds = l.at("ridge_cv_folds").get<int>();
    s.ridge_grid_size = l.at("ridge_grid_size").get<int>();
    if (!l.at("ridge_lambda").is_null()) s.ridge_lambda = l.at("ridge_lambda").get<double>();
    s.validate();
    c.learners.push_back(s);
  }
  c.validate();
  return c;
}

}  // namespace catenc
