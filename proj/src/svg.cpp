#include "fou/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

namespace fou::io {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v, bool log_axis) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", log_axis ? std::pow(10.0, v) : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return !(lo <= hi); }
  void pad() {
    if (empty()) {
      lo = 0.0;
      hi = 1.0;
    } else if (lo == hi) {
      const double d = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
      lo -= d;
      hi += d;
    }
  }
};

}  // namespace

std::string render_svg(const CsvTable& table, const PlotSpec& spec) {
  const bool has_rows = !table.rows.empty();
  const std::size_t xi = has_rows ? table.column(spec.x_column) : 0;
  const std::size_t yi = has_rows ? table.column(spec.y_column) : 0;
  const bool grouped = has_rows && !spec.group_column.empty();
  const std::size_t gi = grouped ? table.column(spec.group_column) : 0;

  std::map<double, std::vector<std::pair<double, double>>> series;
  Range xr;
  Range yr;
  for (const auto& row : table.rows) {
    double x = row[xi];
    double y = row[yi];
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    if (spec.log_x) {
      if (!(x > 0.0)) continue;
      x = std::log10(x);
    }
    if (spec.log_y) {
      if (!(y > 0.0)) continue;
      y = std::log10(y);
    }
    series[grouped ? row[gi] : 0.0].emplace_back(x, y);
    xr.add(x);
    yr.add(y);
  }
  xr.pad();
  yr.pad();

  const double left = 70.0;
  const double right = spec.width - 20.0;
  const double top = 40.0;
  const double bottom = spec.height - 50.0;
  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * (right - left); };
  auto py = [&](double y) { return bottom - (y - yr.lo) / (yr.hi - yr.lo) * (bottom - top); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
     << spec.height << "\" viewBox=\"0 0 " << spec.width << " " << spec.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    os << "<text x=\"" << fmt(spec.width / 2.0) << "\" y=\"22\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"14\">" << escape(spec.title) << "</text>\n";
  }
  os << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
  os << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(bottom) << "\" x2=\"" << fmt(right)
     << "\" y2=\"" << fmt(bottom) << "\"/>\n";
  os << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(left) << "\" y2=\""
     << fmt(bottom) << "\"/>\n";
  os << "</g>\n";

  os << "<g font-family=\"sans-serif\" font-size=\"10\">\n";
  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / kTicks;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / kTicks;
    os << "<line x1=\"" << fmt(px(fx)) << "\" y1=\"" << fmt(bottom) << "\" x2=\"" << fmt(px(fx))
       << "\" y2=\"" << fmt(bottom + 4) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(px(fx)) << "\" y=\"" << fmt(bottom + 16)
       << "\" text-anchor=\"middle\">" << tick_label(fx, spec.log_x) << "</text>\n";
    os << "<line x1=\"" << fmt(left - 4) << "\" y1=\"" << fmt(py(fy)) << "\" x2=\"" << fmt(left)
       << "\" y2=\"" << fmt(py(fy)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(py(fy) + 3)
       << "\" text-anchor=\"end\">" << tick_label(fy, spec.log_y) << "</text>\n";
  }
  os << "<text x=\"" << fmt((left + right) / 2) << "\" y=\"" << fmt(spec.height - 12.0)
     << "\" text-anchor=\"middle\">" << escape(spec.x_column) << (spec.log_x ? " (log)" : "")
     << "</text>\n";
  os << "<text x=\"14\" y=\"" << fmt((top + bottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
     << fmt((top + bottom) / 2) << ")\">" << escape(spec.y_column) << (spec.log_y ? " (log)" : "")
     << "</text>\n";
  os << "</g>\n";

  std::size_t index = 0;
  for (const auto& [key, pts] : series) {
    const char* color = kPalette[index++ % std::size(kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      os << (i ? " " : "") << fmt(px(pts[i].first)) << "," << fmt(py(pts[i].second));
    }
    os << "\"/>\n";
    if (pts.size() <= 64) {
      for (const auto& [x, y] : pts) {
        os << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"2.5\" fill=\""
           << color << "\"/>\n";
      }
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace fou::io
