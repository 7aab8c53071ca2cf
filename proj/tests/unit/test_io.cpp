#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "fou/errors.hpp"
#include "fou/fbm.hpp"
#include "fou/svg.hpp"
#include "fou/table.hpp"

using namespace fou;
namespace fs = std::filesystem;

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 0.0}) {
    CHECK(std::stod(io::format_double(v)) == v);
  }
  CHECK(io::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(io::format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("csv writers") {
  const auto e = sample_fbm_cholesky({0.5, 1, 1}, TimeGrid({0.5, 1.0}), 1, 2);
  const std::string csv = io::ensemble_csv(e);
  CHECK(csv.rfind("path_id,t,value\n", 0) == 0);
  const auto parsed = io::parse_csv(csv);
  REQUIRE(parsed.rows.size() == 4);
  CHECK(parsed.rows[3][0] == 1.0);
  CHECK(parsed.rows[3][1] == 1.0);
  CHECK(parsed.rows[3][2] == e.path(1)[1]);

  CHECK(io::table_csv({{1.0, 2.0, 0.0}}) == "x,value,error_estimate\n1,2,0\n");

  Report r{"demo", {{"a", 1.0, 0.5, 1.2, -0.4, true}, {"b", 2.0, 0.0, 1.0, std::nan(""), false}}};
  CHECK(io::report_csv(r) == "metric,estimate,std_error,target,z\na,1,0.5,1.2,-0.40000000000000002\nb,2,0,1,nan\n");
  const std::string summary = io::report_summary(r);
  CHECK(summary.find("PASS a") != std::string::npos);
  CHECK(summary.find("FAIL b") != std::string::npos);
  CHECK(summary.find("1 check(s) failed") != std::string::npos);
}

TEST_CASE("csv parsing") {
  const auto t = io::parse_csv("x,value\n1,2\n3,4\n");
  CHECK(t.column("value") == 1);
  CHECK(t.rows[1][0] == 3.0);
  CHECK_THROWS_AS(t.column("nope"), UsageError);
  CHECK_THROWS_AS(io::parse_csv("x,value\n1\n"), UsageError);
  CHECK_THROWS_AS(io::parse_csv("x,value\n1,abc\n"), UsageError);
  CHECK(io::parse_csv("x,value\n").rows.empty());
}

TEST_CASE("key-value config") {
  const auto kv = io::parse_key_values("# comment\nhurst = 0.6\n\nseed=3\n");
  REQUIRE(kv.size() == 2);
  CHECK(kv[0] == std::pair<std::string, std::string>{"hurst", "0.6"});
  CHECK(kv[1].second == "3");
  CHECK(io::parse_key_values(io::format_key_values(kv)) == kv);
  CHECK_THROWS_AS(io::parse_key_values("hurst\n"), ConfigError);
  CHECK_THROWS_AS(io::parse_key_values("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(io::parse_key_values(" = 2\n"), ConfigError);
}

TEST_CASE("atomic_write") {
  const fs::path dir = fs::temp_directory_path() / "fou_test_io";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path f = dir / "a.txt";
  io::atomic_write(f, "one");
  io::atomic_write(f, "two");
  CHECK(io::read_text(f) == "two");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  CHECK_THROWS(io::read_text(dir / "missing.txt"));
  fs::remove_all(dir);
}

TEST_CASE("svg rendering") {
  SUBCASE("empty table gives axes only") {
    const std::string svg = io::render_svg(io::CsvTable{}, {});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("<line") != std::string::npos);
    CHECK(svg.find("<polyline") == std::string::npos);
  }
  SUBCASE("curves, groups, log axes and determinism") {
    io::CsvTable t{{"x", "value", "g"}, {}};
    for (int i = 1; i <= 10; ++i) {
      t.rows.push_back({double(i), std::exp(-0.3 * i), 0.0});
      t.rows.push_back({double(i), std::exp(-0.6 * i), 1.0});
    }
    io::PlotSpec spec;
    spec.group_column = "g";
    spec.log_y = true;
    spec.title = "a < b";
    const std::string svg = io::render_svg(t, spec);
    std::size_t lines = 0;
    for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
    CHECK(lines == 2);
    CHECK(svg.find("a &lt; b") != std::string::npos);
    CHECK(svg.find("value (log)") != std::string::npos);
    CHECK(svg == io::render_svg(t, spec));
  }
  SUBCASE("nonpositive values are dropped on log axes") {
    io::CsvTable t{{"x", "value"}, {{1.0, -1.0}, {2.0, 1.0}, {3.0, 2.0}}};
    io::PlotSpec spec;
    spec.log_y = true;
    const std::string svg = io::render_svg(t, spec);
    std::size_t circles = 0;
    for (std::size_t p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) ++circles;
    CHECK(circles == 2);
  }
}
