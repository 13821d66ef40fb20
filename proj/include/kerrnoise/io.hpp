#pragma once

// CSV / JSON emission of sweep results.
//
// Data files hold only the rows, with every float printed as %.17g, so identical
// runs give byte-identical files. Run metadata (tool version, timestamp,
// tolerances) goes to a sidecar `<data file>.meta.json`, which also carries the
// schema version for CSV files; JSON data files embed it directly.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "kerrnoise/error.hpp"
#include "kerrnoise/sweep.hpp"

namespace kerrnoise {

enum class OutputFormat { csv, json };

inline const char* to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& data_file) {
  return std::filesystem::path(data_file.string() + ".meta.json");
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cells.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back();
    } else {
      cells.back() += c;
    }
  }
  return cells;
}

inline std::string json_cell(const Cell& cell) {
  if (const auto* v = std::get_if<double>(&cell))
    return std::isfinite(*v) ? format_double(*v) : "null";
  return nlohmann::json(std::get<std::string>(cell)).dump();
}

inline bool is_text_column(const std::string& name) { return name == "error"; }

inline double parse_number(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("unparseable number '" + text + "'");
  }
  if (used != text.size()) throw InvalidArgument("unparseable number '" + text + "'");
  return v;
}

inline void require_schema(const std::string& version, const std::string& where) {
  if (version != kSchemaVersion)
    throw InvalidArgument(where + ": unsupported schema_version '" + version + "' (expected '" +
                          kSchemaVersion + "')");
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open '" + path.string() + "' for writing");
  return out;
}

inline nlohmann::ordered_json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

}  // namespace detail

inline void write_metadata_sidecar(const SweepResult& result, const std::filesystem::path& data_file,
                                   OutputFormat format) {
  nlohmann::ordered_json meta;
  meta["schema_version"] = result.schema_version;
  meta["command"] = result.command;
  meta["format"] = to_string(format);
  meta["data_file"] = data_file.filename().string();
  meta["columns"] = result.columns;
  meta["inputs"] = result.inputs;
  meta["tool"] = "kerrnoise";
  meta["tool_version"] = kVersion;
  meta["timestamp"] = utc_timestamp();
  meta["run"] = result.metadata;
  auto out = detail::open_for_write(sidecar_path(data_file));
  out << meta.dump(2) << '\n';
}

inline void write_csv(const SweepResult& result, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  for (std::size_t c = 0; c < result.columns.size(); ++c)
    out << (c ? "," : "") << detail::csv_escape(result.columns[c]);
  out << '\n';
  for (const Row& row : result.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      if (const auto* v = std::get_if<double>(&row[c]))
        out << format_double(*v);
      else
        out << detail::csv_escape(std::get<std::string>(row[c]));
    }
    out << '\n';
  }
  if (!out) throw InvalidArgument("failed writing '" + path.string() + "'");
  write_metadata_sidecar(result, path, OutputFormat::csv);
}

inline void write_json(const SweepResult& result, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << "{\n\"schema_version\": " << nlohmann::json(result.schema_version).dump()
      << ",\n\"command\": " << nlohmann::json(result.command).dump()
      << ",\n\"inputs\": " << result.inputs.dump()
      << ",\n\"columns\": " << nlohmann::json(result.columns).dump() << ",\n\"rows\": [";
  for (std::size_t r = 0; r < result.rows.size(); ++r) {
    out << (r ? ",\n" : "\n") << '[';
    for (std::size_t c = 0; c < result.rows[r].size(); ++c)
      out << (c ? "," : "") << detail::json_cell(result.rows[r][c]);
    out << ']';
  }
  out << "\n]\n}\n";
  if (!out) throw InvalidArgument("failed writing '" + path.string() + "'");
  write_metadata_sidecar(result, path, OutputFormat::json);
}

inline void write_sweep(const SweepResult& result, const std::filesystem::path& path,
                        OutputFormat format) {
  if (format == OutputFormat::csv)
    write_csv(result, path);
  else
    write_json(result, path);
}

/// Reads a CSV data file together with its sidecar; rejects unknown schema versions.
inline SweepResult read_csv(const std::filesystem::path& path) {
  const auto meta = detail::read_json_file(sidecar_path(path));
  SweepResult result;
  result.schema_version = meta.value("schema_version", std::string());
  detail::require_schema(result.schema_version, sidecar_path(path).string());
  result.command = meta.value("command", std::string());
  result.inputs = meta.value("inputs", nlohmann::ordered_json::object());
  result.metadata = meta.value("run", nlohmann::ordered_json::object());

  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("'" + path.string() + "' is empty");
  result.columns = detail::csv_split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::csv_split(line);
    if (cells.size() != result.columns.size())
      throw InvalidArgument("'" + path.string() + "': row width does not match header");
    Row row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (detail::is_text_column(result.columns[c]))
        row.emplace_back(cells[c]);
      else
        row.emplace_back(detail::parse_number(cells[c]));
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

inline SweepResult read_json(const std::filesystem::path& path) {
  const auto doc = detail::read_json_file(path);
  SweepResult result;
  result.schema_version = doc.value("schema_version", std::string());
  detail::require_schema(result.schema_version, path.string());
  result.command = doc.value("command", std::string());
  result.inputs = doc.value("inputs", nlohmann::ordered_json::object());
  result.columns = doc.at("columns").get<std::vector<std::string>>();
  for (const auto& jrow : doc.at("rows")) {
    Row row;
    for (std::size_t c = 0; c < jrow.size(); ++c) {
      const auto& v = jrow[c];
      if (v.is_string())
        row.emplace_back(v.get<std::string>());
      else if (v.is_null())
        row.emplace_back(std::numeric_limits<double>::quiet_NaN());
      else
        row.emplace_back(v.get<double>());
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace kerrnoise
