#include "chaoslab/records.hpp"

#include <charconv>
#include <cmath>
#include <json.hpp>
#include <ostream>

#include "chaoslab/errors.hpp"

namespace chaoslab {

namespace {

std::string render_csv(const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return csv_escape(*s);
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  return std::to_string(std::get<std::int64_t>(cell));
}

nlohmann::ordered_json render_json(const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  if (const auto* d = std::get_if<double>(&cell)) {
    if (!std::isfinite(*d)) return nullptr;
    return *d;
  }
  return std::get<std::int64_t>(cell);
}

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw DomainError("row width " + std::to_string(row.size()) + " does not match " +
                      std::to_string(columns.size()) + " columns of table " + name);
  rows.push_back(std::move(row));
}

Format parse_format(std::string_view text) {
  if (text == "csv") return Format::csv;
  if (text == "json") return Format::json;
  throw DomainError("unknown format '" + std::string(text) + "' (expected csv or json)");
}

std::string_view extension(Format format) { return format == Format::csv ? "csv" : "json"; }

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return {buf, res.ptr};
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv(const Table& table, std::ostream& out) {
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out << (i ? "," : "") << csv_escape(table.columns[i]);
  out << "\r\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << render_csv(row[i]);
    out << "\r\n";
  }
}

void write_ndjson(const Table& table, std::ostream& out) {
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = render_json(row[i]);
    out << obj.dump() << '\n';
  }
}

void write_table(const Table& table, Format format, std::ostream& out) {
  if (format == Format::csv)
    write_csv(table, out);
  else
    write_ndjson(table, out);
}

std::filesystem::path sibling_path(const std::filesystem::path& primary, std::string_view name,
                                   Format format) {
  auto p = primary;
  p.replace_extension(std::string(name) + "." + std::string(extension(format)));
  return p;
}

std::filesystem::path manifest_path(const std::filesystem::path& primary) {
  auto p = primary;
  p += ".manifest.json";
  return p;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  auto params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : parameters) params[k] = v;
  j["parameters"] = params;
  j["master_seed"] = master_seed;
  j["version"] = version;
  j["outputs"] = outputs;
  j["started_at"] = started_at;
  j["wall_clock_seconds"] = wall_clock_seconds;
  return j.dump(2) + "\n";
}

std::string artifact_version() {
#ifdef CHAOSLAB_VERSION
  return CHAOSLAB_VERSION;
#else
  return "unknown";
#endif
}

}  // namespace chaoslab
