#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "catenc/table.hpp"

namespace catenc {

struct CsvOptions {
  char delimiter = ',';
  /// Cell values treated as missing (exact match, after unquoting).
  std::vector<std::string> missing_tokens = {"", "NA"};
};

struct CsvDocument {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// Parallel to rows: true when the cell was a quoted field. A quoted "NA"
  /// is a literal label, not a missing marker.
  std::vector<std::vector<std::uint8_t>> quoted;
};

/// RFC-4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF.
CsvDocument read_csv(std::istream& in, const CsvOptions& options = {});
CsvDocument read_csv(const std::filesystem::path& path, const CsvOptions& options = {});

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
};

/// Sidecar describing column kinds and the target:
/// {"columns":[{"name":..,"kind":"categorical"|"numeric"}..],"target":..,"task":..}
struct Schema {
  std::vector<ColumnSchema> columns;
  std::string target;
  std::string task;  // optional; empty means inferred from the target kind
};

Schema read_schema(const std::filesystem::path& path);
Schema parse_schema(const std::string& json_text);

DataTable build_table(const CsvDocument& doc, const Schema& schema, const CsvOptions& options = {});
DataTable load_dataset(const std::filesystem::path& csv_path, const std::filesystem::path& schema_path,
                       const CsvOptions& options = {});

}  // namespace catenc
