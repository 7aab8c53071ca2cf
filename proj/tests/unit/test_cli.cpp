#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "fou/analytics.hpp"
#include "fou/cli.hpp"
#include "fou/table.hpp"

using namespace fou;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fou");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fou_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path only_child(const fs::path& dir) {
  std::vector<fs::path> kids;
  for (const auto& e : fs::directory_iterator(dir)) kids.push_back(e.path());
  REQUIRE(kids.size() == 1);
  return kids[0];
}

}  // namespace

TEST_CASE("cov table to stdout matches the library") {
  const auto r = run_cli({"cov", "--formula", "xd", "--hurst", "0.75", "--tau-grid", "0:2:0.5"});
  REQUIRE(r.code == 0);
  const auto t = io::parse_csv(r.out);
  REQUIRE(t.rows.size() == 5);
  for (const auto& row : t.rows) CHECK(row[1] == xd_cov({0.75, 1.0, 1.0}, 0.0, row[0]));
}

TEST_CASE("simulate writes a run directory and reruns byte-identically") {
  const fs::path base = scratch("sim");
  const std::vector<std::string> args{"simulate", "--process", "fou2", "--hurst", "0.75", "--gamma", "1.0",
                                      "--t-max", "2", "--steps", "16", "--paths", "20", "--seed", "42",
                                      "--out", base.string() + "/a/"};
  REQUIRE(run_cli(args).code == 0);
  const fs::path dir = only_child(base / "a");
  CHECK(dir.filename().string().find("-simulate") != std::string::npos);
  CHECK(fs::exists(dir / "data.csv"));
  CHECK(fs::exists(dir / "manifest.txt"));
  CHECK(fs::exists(dir / "plot.svg"));

  const auto rerun = run_cli({"simulate", "--config", (dir / "manifest.txt").string(), "--out",
                              (base / "b.csv").string()});
  REQUIRE(rerun.code == 0);
  CHECK(io::read_text(dir / "data.csv") == io::read_text(base / "b.csv"));
  const auto manifest = io::parse_key_values(io::read_text(base / "b.csv.manifest.txt"));
  bool seen_seed = false;
  for (const auto& [k, v] : manifest) {
    if (k == "seed") seen_seed = v == "42";
  }
  CHECK(seen_seed);
  fs::remove_all(base);
}

TEST_CASE("flags override config, config overrides defaults") {
  const fs::path base = scratch("precedence");
  io::atomic_write(base / "c.txt", "hurst = 0.6\nalpha = 2\n");
  const auto r = run_cli({"cov", "--formula", "xd", "--tau-grid", "1:1:1", "--config",
                          (base / "c.txt").string(), "--alpha", "3"});
  REQUIRE(r.code == 0);
  CHECK(io::parse_csv(r.out).rows[0][1] == xd_cov({0.6, 3.0, 1.0}, 0.0, 1.0));
  io::atomic_write(base / "bad.txt", "hurst = 0.6\nbogus = 1\n");
  CHECK(run_cli({"cov", "--config", (base / "bad.txt").string()}).code == 2);
  fs::remove_all(base);
}

TEST_CASE("usage and domain errors exit 2") {
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"cov", "--no-such-flag", "1"}).code == 2);
  CHECK(run_cli({"simulate", "--paths", "ten"}).code == 2);
  const auto k = run_cli({"kernel", "--hurst", "0.4"});
  CHECK(k.code == 2);
  CHECK(k.err.find("1/2 < H < 1") != std::string::npos);
  CHECK(run_cli({"cov", "--formula", "y", "--hurst", "0.3"}).code == 2);
  CHECK(run_cli({"cov", "--hurst", "1.5"}).code == 2);
  CHECK(run_cli({"experiment", "weak-convergence", "--mode", "monte-carlo", "--a", "4,100000"}).code == 2);
}

TEST_CASE("experiments report checks and honour --strict") {
  const auto w = run_cli({"experiment", "weak-convergence", "--hurst", "0.75", "--alpha", "1", "--a",
                          "4,16,64,256", "--mode", "quadrature", "--strict"});
  CHECK(w.code == 0);
  CHECK(w.out.find("error_decreasing") != std::string::npos);

  const auto d = run_cli({"experiment", "decay-rate", "--curve", "xd", "--hurst", "0.75", "--strict"});
  CHECK(d.code == 0);
  const auto rd = run_cli({"experiment", "range-dependence", "--sequence", "fgn", "--hurst", "0.25", "--strict"});
  CHECK(rd.code == 0);
  CHECK(rd.err.find("short-range") != std::string::npos);

  const auto st = run_cli({"experiment", "stationarity", "--process", "fou1", "--init", "zero", "--steps",
                           "8", "--t-max", "4", "--paths", "2000", "--strict"});
  CHECK(st.code == 1);
}

TEST_CASE("kernel report") {
  const auto r = run_cli({"kernel", "--hurst", "0.75", "--alpha", "1"});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("two_int_kernel_vs_kappa") != std::string::npos);
}

TEST_CASE("render") {
  const fs::path base = scratch("render");
  io::atomic_write(base / "t.csv", "x,value\n1,1\n2,0.5\n3,0.25\n");
  REQUIRE(run_cli({"render", "--in", (base / "t.csv").string(), "--out", (base / "t.svg").string(), "--log-y"})
              .code == 0);
  CHECK(io::read_text(base / "t.svg").rfind("<svg", 0) == 0);
  io::atomic_write(base / "bad.csv", "x,value\n1\n");
  CHECK(run_cli({"render", "--in", (base / "bad.csv").string(), "--out", (base / "b.svg").string()}).code == 2);
  io::atomic_write(base / "empty.csv", "x,value\n");
  CHECK(run_cli({"render", "--in", (base / "empty.csv").string(), "--out", (base / "e.svg").string()}).code == 0);
  fs::remove_all(base);
}
