#include "fou/table.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "fou/errors.hpp"

namespace fou::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  return std::all_of(key.begin(), key.end(), [](char c) {
    return std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) ||
           c == '-' || c == '_' || c == '.';
  });
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw UsageError("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw UsageError("cannot move output into place at '" + path.string() + "'");
  }
}

std::string ensemble_csv(const Ensemble& ensemble) {
  std::string out = "path_id,t,value\n";
  const auto& grid = ensemble.grid();
  for (std::size_t i = 0; i < ensemble.count(); ++i) {
    const auto row = ensemble.path(i);
    const std::string id = std::to_string(i);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      out += id;
      out += ',';
      out += format_double(grid[k]);
      out += ',';
      out += format_double(row[k]);
      out += '\n';
    }
  }
  return out;
}

std::string table_csv(const std::vector<TableRow>& rows) {
  std::string out = "x,value,error_estimate\n";
  for (const auto& r : rows) {
    out += format_double(r.x) + "," + format_double(r.value) + "," + format_double(r.error) + "\n";
  }
  return out;
}

std::string report_csv(const Report& report) {
  std::string out = "metric,estimate,std_error,target,z\n";
  for (const auto& c : report.checks) {
    out += c.metric + "," + format_double(c.estimate) + "," + format_double(c.std_error) + "," +
           format_double(c.target) + "," + format_double(c.z) + "\n";
  }
  return out;
}

std::string report_summary(const Report& report) {
  std::ostringstream os;
  os << report.title << "\n";
  for (const auto& c : report.checks) {
    char line[256];
    std::snprintf(line, sizeof line, "%s %s estimate=%.6g target=%.6g", c.pass ? "PASS" : "FAIL",
                  c.metric.c_str(), c.estimate, c.target);
    os << line;
    if (!std::isnan(c.z)) {
      std::snprintf(line, sizeof line, " z=%.3f", c.z);
      os << line;
    }
    os << "\n";
  }
  os << (report.passed() ? "all checks passed" : std::to_string(report.failures()) + " check(s) failed")
     << "\n";
  return os.str();
}

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw UsageError("table has no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto cells = split(line, ',');
    if (!have_header) {
      for (auto c : cells) table.header.emplace_back(c);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      std::ostringstream os;
      os << "line " << line_no << ": expected " << table.header.size() << " fields, got "
         << cells.size();
      throw UsageError(os.str());
    }
    std::vector<double> row;
    for (auto c : cells) {
      const std::string cell(c);
      char* stop = nullptr;
      errno = 0;
      const double v = std::strtod(cell.c_str(), &stop);
      if (cell.empty() || stop != cell.c_str() + cell.size()) {
        std::ostringstream os;
        os << "line " << line_no << ": '" << cell << "' is not a number";
        throw UsageError(os.str());
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
    if (end == text.size()) break;
  }
  if (!have_header) throw UsageError("table is empty: no header line");
  return table;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!valid_key(key)) {
      throw ConfigError("line " + std::to_string(line_no) + ": invalid key '" + key + "'");
    }
    const bool repeated =
        std::any_of(out.begin(), out.end(), [&](const auto& kv) { return kv.first == key; });
    if (repeated) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    out.emplace_back(key, value);
  }
  return out;
}

std::string format_key_values(const KeyValues& entries) {
  std::string out;
  for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
  return out;
}

}  // namespace fou::io
