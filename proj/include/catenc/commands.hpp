#pragma once

#include <atomic>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "catenc/profile.hpp"

namespace catenc {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitConfigError = 1, kExitAllFailed = 2 };

struct RunOptions {
  std::optional<std::filesystem::path> output;  // overrides the config
  std::optional<int> workers;
  bool quiet = false;
  const std::atomic<bool>* stop = nullptr;
};

/// Runs the benchmark described by a TOML config or resolved JSON snapshot.
/// Writes records.jsonl, resolved-config.json and manifest.json.
int cmd_run(const std::filesystem::path& config, const RunOptions& options, std::ostream& log);

/// Writes report/ files derived from <dir>/records.jsonl.
int cmd_report(const std::filesystem::path& dir, std::ostream& log);

nlohmann::ordered_json profile_json(const std::string& name, const DatasetProfile& profile);

/// Profiles one dataset; writes JSON to `out`.
int cmd_profile(const std::string& name, const std::filesystem::path& csv, const std::filesystem::path& schema,
                std::ostream& out, std::ostream& log);

}  // namespace catenc
