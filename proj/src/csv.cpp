#include "catenc/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "catenc/error.hpp"

namespace catenc {
namespace {

class CsvParser {
 public:
  CsvParser(std::string text, char delim) : text_(std::move(text)), delim_(delim) {}

  // Returns false at end of input.
  bool next_record(std::vector<std::string>& fields, std::vector<std::uint8_t>& quoted) {
    fields.clear();
    quoted.clear();
    if (pos_ >= text_.size()) return false;
    for (;;) {
      std::string field;
      bool was_quoted = false;
      if (pos_ < text_.size() && text_[pos_] == '"') {
        was_quoted = true;
        ++pos_;
        for (;;) {
          if (pos_ >= text_.size()) throw DataError("unterminated quoted field at line " + std::to_string(line_));
          const char c = text_[pos_++];
          if (c == '"') {
            if (pos_ < text_.size() && text_[pos_] == '"') {
              field.push_back('"');
              ++pos_;
            } else {
              break;
            }
          } else {
            if (c == '\n') ++line_;
            field.push_back(c);
          }
        }
        if (pos_ < text_.size() && text_[pos_] != delim_ && text_[pos_] != '\n' && text_[pos_] != '\r')
          throw DataError("unexpected character after closing quote at line " + std::to_string(line_));
      } else {
        while (pos_ < text_.size() && text_[pos_] != delim_ && text_[pos_] != '\n' && text_[pos_] != '\r') {
          if (text_[pos_] == '"') throw DataError("stray quote in unquoted field at line " + std::to_string(line_));
          field.push_back(text_[pos_++]);
        }
      }
      fields.push_back(std::move(field));
      quoted.push_back(was_quoted ? 1 : 0);
      if (pos_ >= text_.size()) return true;
      const char c = text_[pos_++];
      if (c == delim_) continue;
      if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
      ++line_;
      return true;
    }
  }

  std::size_t line() const { return line_; }

 private:
  std::string text_;
  char delim_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

bool is_missing_token(const std::string& cell, bool quoted, const CsvOptions& options) {
  if (quoted && !cell.empty()) return false;
  return std::find(options.missing_tokens.begin(), options.missing_tokens.end(), cell) !=
         options.missing_tokens.end();
}

bool parse_double(const std::string& s, double& out) {
  auto begin = s.data();
  auto end = s.data() + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
  if (begin == end) return false;
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

ColumnKind parse_kind(const std::string& s) {
  if (s == "categorical" || s == "cat" || s == "factor") return ColumnKind::categorical;
  if (s == "numeric" || s == "num") return ColumnKind::numeric;
  throw DataError("unknown column kind '" + s + "' in schema");
}

}  // namespace

CsvDocument read_csv(std::istream& in, const CsvOptions& options) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) text.erase(0, 3);
  CsvParser parser(std::move(text), options.delimiter);
  CsvDocument doc;
  std::vector<std::string> fields;
  std::vector<std::uint8_t> quoted;
  if (!parser.next_record(fields, quoted)) throw DataError("CSV is empty");
  doc.header = fields;
  while (parser.next_record(fields, quoted)) {
    // Blank trailing lines are tolerated.
    if (fields.size() == 1 && fields[0].empty() && !quoted[0]) continue;
    if (fields.size() != doc.header.size())
      throw DataError("CSV record ending at line " + std::to_string(parser.line() - 1) + " has " +
                      std::to_string(fields.size()) + " fields, header has " + std::to_string(doc.header.size()));
    doc.rows.push_back(fields);
    doc.quoted.push_back(quoted);
  }
  return doc;
}

CsvDocument read_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open CSV file " + path.string());
  return read_csv(in, options);
}

Schema parse_schema(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("schema is not valid JSON: ") + e.what());
  }
  Schema schema;
  try {
    for (const auto& c : j.at("columns")) schema.columns.push_back({c.at("name").get<std::string>(), parse_kind(c.at("kind"))});
    schema.target = j.at("target").get<std::string>();
    if (j.contains("task")) schema.task = j.at("task").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed schema: ") + e.what());
  }
  return schema;
}

Schema read_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_schema(ss.str());
}

DataTable build_table(const CsvDocument& doc, const Schema& schema, const CsvOptions& options) {
  if (schema.columns.size() != doc.header.size())
    throw DataError("schema declares " + std::to_string(schema.columns.size()) + " columns, CSV has " +
                    std::to_string(doc.header.size()));
  const auto n = doc.rows.size();
  std::vector<Column> columns;
  std::size_t target_index = DataTable::npos;
  for (std::size_t j = 0; j < doc.header.size(); ++j) {
    const auto& cs = schema.columns[j];
    if (cs.name != doc.header[j])
      throw DataError("schema column '" + cs.name + "' does not match CSV header '" + doc.header[j] + "'");
    if (cs.name == schema.target) target_index = j;
    std::vector<std::uint8_t> missing(n, 0);
    if (cs.kind == ColumnKind::numeric) {
      std::vector<double> values(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& cell = doc.rows[i][j];
        double v = 0.0;
        if (is_missing_token(cell, doc.quoted[i][j], options) || !parse_double(cell, v)) {
          missing[i] = 1;
          values[i] = std::numeric_limits<double>::quiet_NaN();
        } else {
          values[i] = v;
        }
      }
      columns.push_back(Column::numeric(cs.name, std::move(values), std::move(missing)));
    } else {
      std::vector<std::string> labels(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& cell = doc.rows[i][j];
        if (is_missing_token(cell, doc.quoted[i][j], options))
          missing[i] = 1;
        else
          labels[i] = cell;
      }
      columns.push_back(Column::categorical(cs.name, labels, std::move(missing)));
    }
  }
  if (target_index == DataTable::npos) throw DataError("target column '" + schema.target + "' not found");
  if (columns[target_index].missing_count() > 0)
    throw DataError("target column '" + schema.target + "' has missing values");
  auto table = DataTable::with_inferred_task(std::move(columns), target_index);
  if (!schema.task.empty()) {
    const auto declared = schema.task;
    const auto actual = table.task().kind;
    const bool ok = declared == to_string(actual) ||
                    (declared == "classification" && actual != TaskKind::regression);
    if (!ok)
      throw DataError("schema task '" + declared + "' disagrees with target column (" +
                      std::string(to_string(actual)) + ")");
  }
  return table;
}

DataTable load_dataset(const std::filesystem::path& csv_path, const std::filesystem::path& schema_path,
                       const CsvOptions& options) {
  return build_table(read_csv(csv_path, options), read_schema(schema_path), options);
}

}  // namespace catenc
