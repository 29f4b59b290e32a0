#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "catenc/encoders.hpp"
#include "catenc/error.hpp"
#include "catenc/learners.hpp"

namespace catenc {

/// Configuration problem; the message starts with "<source>:<line>:<column>:"
/// when a location is known.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct DatasetEntry {
  std::string name;
  std::filesystem::path csv;
  std::filesystem::path schema;
};

struct RunConfig {
  std::vector<DatasetEntry> datasets;
  std::vector<EncoderSpec> encoders;  // fully expanded grid
  std::vector<LearnerSpec> learners;
  int folds = 5;
  std::uint64_t seed = 0;
  std::filesystem::path output = "results";
  int workers = 1;
  bool timings = true;

  void validate() const;
  const DatasetEntry& dataset(std::string_view name) const;
};

/// Worker count from CATENC_WORKERS, else 1.
int default_workers();

/// Parses a TOML run configuration; relative paths resolve against `base_dir`.
RunConfig parse_config_toml(std::string_view text, std::string_view source_name,
                            const std::filesystem::path& base_dir);

/// Loads a TOML config, or a resolved JSON snapshot when the extension is .json.
RunConfig load_config(const std::filesystem::path& path);

/// Snapshot with every default materialized; reading it back yields an
/// equivalent config.
nlohmann::ordered_json resolved_config(const RunConfig& config);
RunConfig config_from_resolved(const nlohmann::json& j);

}  // namespace catenc
