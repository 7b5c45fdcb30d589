#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace chaoslab {

using Cell = std::variant<std::string, double, std::int64_t>;

/// A named table of records. Rendered either as CSV with a header row or as
/// newline-delimited JSON objects.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

enum class Format { csv, json };
Format parse_format(std::string_view text);
std::string_view extension(Format format);

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite.
std::string format_double(double value);

/// RFC-4180 quoting: fields with a comma, quote, CR or LF are quoted and
/// embedded quotes are doubled.
std::string csv_escape(std::string_view field);

void write_csv(const Table& table, std::ostream& out);
/// Non-finite numbers are written as null.
void write_ndjson(const Table& table, std::ostream& out);
void write_table(const Table& table, Format format, std::ostream& out);

/// Path of an auxiliary table next to the primary output:
/// results.csv + "fits" -> results.fits.csv.
std::filesystem::path sibling_path(const std::filesystem::path& primary, std::string_view name,
                                   Format format);

/// Manifest path for a primary output: results.csv -> results.csv.manifest.json.
std::filesystem::path manifest_path(const std::filesystem::path& primary);

struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::uint64_t master_seed = 0;
  std::string version;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0.0;
  std::string started_at;  // ISO-8601 UTC

  std::string to_json() const;
};

std::string artifact_version();

}  // namespace chaoslab
