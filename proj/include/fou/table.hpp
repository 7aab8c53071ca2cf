#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fou/analytics.hpp"
#include "fou/estimation.hpp"
#include "fou/types.hpp"

namespace fou::io {

/// Shortest round-trip text for a double (17 significant digits, "nan", "inf").
std::string format_double(double v);

/// Writes `content` to a sibling temp file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view content);

/// `path_id,t,value` rows, one per path and grid point.
std::string ensemble_csv(const Ensemble& ensemble);
/// `x,value,error_estimate` rows.
std::string table_csv(const std::vector<TableRow>& rows);
/// `metric,estimate,std_error,target,z` rows.
std::string report_csv(const Report& report);
/// One PASS/FAIL line per check plus a closing verdict.
std::string report_summary(const Report& report);

/// Numeric CSV with a header line.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Column index by name; UsageError if absent.
  std::size_t column(std::string_view name) const;
};

/// Parses comma-separated numeric rows; UsageError naming the line on malformed input.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// Ordered `key = value` entries.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Flat key-value grammar shared by config files and manifests:
/// one `key = value` per line, `#` starts a comment, blank lines ignored,
/// keys are [a-z0-9-_.] and may not repeat. ConfigError names the bad line.
KeyValues parse_key_values(std::string_view text);
std::string format_key_values(const KeyValues& entries);

std::string read_text(const std::filesystem::path& path);

}  // namespace fou::io
