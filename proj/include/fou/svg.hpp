#pragma once

#include <string>

#include "fou/table.hpp"

namespace fou::io {

struct PlotSpec {
  std::string x_column = "x";
  std::string y_column = "value";
  /// Rows sharing a value in this column form one curve; empty means a single curve.
  std::string group_column;
  bool log_x = false;
  bool log_y = false;
  std::string title;
  int width = 640;
  int height = 420;
};

/// Static, self-contained SVG of the table's curves. Points with a
/// nonpositive coordinate on a log axis are dropped. Output depends only on
/// the inputs.
std::string render_svg(const CsvTable& table, const PlotSpec& spec);

}  // namespace fou::io
