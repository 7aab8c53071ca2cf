#include "fou/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fou/analytics.hpp"
#include "fou/errors.hpp"
#include "fou/estimation.hpp"
#include "fou/fbm.hpp"
#include "fou/svg.hpp"
#include "fou/table.hpp"
#include "fou/transforms.hpp"

namespace fou::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMaxEnsembleValues = 50'000'000;
constexpr std::size_t kMaxTableRows = 1'000'000;

using Settings = std::map<std::string, std::string>;

const std::set<std::string> kMetaKeys = {"kind", "version", "timestamp", "outputs"};

const std::map<std::string, std::string>& key_help() {
  static const std::map<std::string, std::string> help = {
      {"hurst", "Hurst exponent H in (0,1)"},
      {"alpha", "mean-reversion rate alpha > 0 (Doob time change, fOU-1)"},
      {"gamma", "mean-reversion rate gamma > 0 (fOU-2)"},
      {"seed", "64-bit seed"},
      {"process", "process: fbm, xd, y, fou1, fou2, ou"},
      {"t-max", "grid end time"},
      {"steps", "number of grid intervals on [0, t-max]"},
      {"paths", "number of paths"},
      {"init", "fOU-1 initial value: stationary or zero"},
      {"method", "sampler: auto, cholesky, circulant (fbm); langevin, direct (fou2)"},
      {"refine", "internal quadrature refinement factor"},
      {"tolerance", "truncation tolerance for integrals over (-inf, t]"},
      {"formula", "fbm, ou, xd, fgn, fou1-asym, fou1-var, y, yvar, ud, rho-y, scaled-y"},
      {"tau-grid", "evaluation grid a:b:step (inclusive)"},
      {"s", "first time argument"},
      {"t", "second time argument"},
      {"terms", "number of terms of the large-lag expansion"},
      {"rel-tol", "quadrature relative tolerance"},
      {"abs-tol", "quadrature absolute tolerance"},
      {"a", "comma-separated scaling factors, increasing"},
      {"probes", "comma-separated s:t probe pairs"},
      {"mode", "quadrature or monte-carlo"},
      {"curve", "decay curve: xd, ud, rho-y"},
      {"lag", "covariance lag"},
      {"shifts", "comma-separated time shifts"},
      {"sequence", "autocovariance sequence: fgn, rho-y, xd"},
      {"length", "sequence length"},
  };
  return help;
}

// ---------------------------------------------------------------- parsing

double parse_real(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw UsageError("--" + key + ": '" + text + "' is not a finite number");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw UsageError("--" + key + ": '" + text + "' is not a nonnegative integer");
  }
  errno = 0;
  const unsigned long long v = std::strtoull(text.c_str(), nullptr, 10);
  if (errno == ERANGE) throw UsageError("--" + key + ": '" + text + "' is out of range");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

/// Typed, validated view of the resolved settings of one command.
class Args {
 public:
  explicit Args(Settings values) : values_(std::move(values)) {}

  const std::string& str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("missing setting --" + key);
    return it->second;
  }
  double real(const std::string& key) const { return parse_real(key, str(key)); }
  double positive(const std::string& key) const {
    const double v = real(key);
    if (!(v > 0.0)) throw UsageError("--" + key + " must be > 0");
    return v;
  }
  std::size_t count(const std::string& key) const {
    const auto v = parse_unsigned(key, str(key));
    if (v == 0) throw UsageError("--" + key + " must be >= 1");
    return static_cast<std::size_t>(v);
  }
  std::uint64_t seed() const { return parse_unsigned("seed", str("seed")); }
  std::string choice(const std::string& key, std::initializer_list<const char*> options) const {
    const std::string& v = str(key);
    std::string all;
    for (const char* o : options) {
      if (v == o) return v;
      all += all.empty() ? o : std::string(", ") + o;
    }
    throw UsageError("--" + key + ": '" + v + "' is not one of " + all);
  }
  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split(str(key), ',')) out.push_back(parse_real(key, item));
    if (out.empty()) throw UsageError("--" + key + " needs at least one value");
    return out;
  }
  std::vector<std::pair<double, double>> pairs(const std::string& key) const {
    std::vector<std::pair<double, double>> out;
    for (const auto& item : split(str(key), ',')) {
      const auto parts = split(item, ':');
      if (parts.size() != 2) throw UsageError("--" + key + ": '" + item + "' is not s:t");
      out.emplace_back(parse_real(key, parts[0]), parse_real(key, parts[1]));
    }
    if (out.empty()) throw UsageError("--" + key + " needs at least one pair");
    return out;
  }
  std::vector<double> grid(const std::string& key) const {
    const auto parts = split(str(key), ':');
    if (parts.size() != 3) throw UsageError("--" + key + ": expected a:b:step");
    const double a = parse_real(key, parts[0]);
    const double b = parse_real(key, parts[1]);
    const double step = parse_real(key, parts[2]);
    if (!(step > 0.0) || !(b >= a)) throw UsageError("--" + key + ": needs b >= a and step > 0");
    const double n = std::floor((b - a) / step + 1e-9);
    if (n + 1.0 > static_cast<double>(kMaxTableRows)) {
      throw UsageError("--" + key + ": more than 10^6 points");
    }
    std::vector<double> xs;
    for (std::size_t i = 0; i <= static_cast<std::size_t>(n); ++i) xs.push_back(a + step * static_cast<double>(i));
    return xs;
  }
  ModelParams params() const {
    ModelParams p;
    if (values_.count("hurst")) p.hurst = real("hurst");
    if (values_.count("alpha")) p.alpha = real("alpha");
    if (values_.count("gamma")) p.gamma = real("gamma");
    p.validate();
    return p;
  }
  QuadratureConfig quad() const {
    QuadratureConfig q;
    q.rel_tol = positive("rel-tol");
    q.abs_tol = positive("abs-tol");
    return q;
  }
  TruncationPolicy trunc() const {
    TruncationPolicy t;
    t.tolerance = positive("tolerance");
    return t;
  }
  const Settings& values() const { return values_; }

 private:
  Settings values_;
};

// ---------------------------------------------------------------- outcomes

struct Outcome {
  std::string csv;                         // primary output
  std::vector<std::pair<std::string, std::string>> extra;  // run-directory only
  std::optional<Report> report;
  std::optional<io::CsvTable> plot_table;
  io::PlotSpec plot;
  std::string summary;
};

io::CsvTable table_of(const std::vector<TableRow>& rows) {
  io::CsvTable t;
  t.header = {"x", "value", "error_estimate"};
  for (const auto& r : rows) t.rows.push_back({r.x, r.value, r.error});
  return t;
}

Check band_check(std::string metric, double estimate, double target, double rel_band) {
  const bool pass = std::abs(estimate - target) <= rel_band * std::abs(target);
  return {std::move(metric), estimate, 0.0, target, kNaN, pass};
}

// ---------------------------------------------------------------- simulation

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

Ensemble simulate(const Args& args, const std::string& process, const TimeGrid& grid,
                  std::size_t paths, std::uint64_t seed) {
  const ModelParams p = args.params();
  const std::string method =
      args.choice("method", {"auto", "cholesky", "circulant", "langevin", "direct"});
  const std::size_t refine = args.count("refine");
  const TruncationPolicy trunc = args.trunc();
  const std::string init = args.choice("init", {"stationary", "zero"});
  if (paths * grid.size() > kMaxEnsembleValues) {
    throw UsageError("paths x grid points exceeds the 5e7 value limit");
  }
  const bool fbm_method = method == "cholesky" || method == "circulant";
  const bool fou2_method = method == "langevin" || method == "direct";
  if ((fbm_method && process != "fbm") || (fou2_method && process != "fou2")) {
    throw UsageError("--method " + method + " does not apply to --process " + process);
  }
  if (process == "fbm") {
    const std::size_t steps = grid.size() - 1;
    const bool circulant = method == "circulant" || (method == "auto" && is_power_of_two(steps));
    if (!circulant) return sample_fbm_cholesky(p, grid, seed, paths);
    if (!is_power_of_two(steps)) throw UsageError("--method circulant needs a power-of-two --steps");
    const double dt = grid[1] - grid[0];
    Ensemble raw = sample_fgn_circulant(p, steps, dt, seed, paths);
    std::vector<double> values(paths * grid.size(), 0.0);
    for (std::size_t i = 0; i < paths; ++i) {
      const auto row = raw.path(i);
      std::copy(row.begin(), row.end(), values.begin() + static_cast<std::ptrdiff_t>(i * grid.size() + 1));
    }
    Ensemble ens(p, grid, seed, ProcessTag::FBM, paths);
    ens.reset(grid, std::move(values), ProcessTag::FBM);
    for (const auto& w : raw.warnings()) ens.add_warning(w);
    return ens;
  }
  if (process == "xd") return doob_transform(p, grid, seed, paths);
  if (process == "ou") return ou_process(p.alpha, grid, seed, paths);
  if (process == "y") return y_process(p, grid, seed, paths, refine);
  if (process == "fou1") {
    return fou1_path(p, grid, seed, paths, init == "zero" ? Fou1Init::Zero : Fou1Init::StationaryTruncated,
                     trunc, refine);
  }
  if (process == "fou2") {
    return fou2_path(p, grid, seed, paths,
                     method == "direct" ? Fou2Method::DirectTransform : Fou2Method::LangevinOnY, trunc,
                     refine);
  }
  throw UsageError("--process: unknown process '" + process + "'");
}

const std::initializer_list<const char*> kProcesses = {"fbm", "xd", "y", "fou1", "fou2", "ou"};

io::CsvTable path_table(const Ensemble& ens, std::size_t max_paths) {
  io::CsvTable t;
  t.header = {"path_id", "t", "value"};
  for (std::size_t i = 0; i < std::min(max_paths, ens.count()); ++i) {
    const auto row = ens.path(i);
    for (std::size_t k = 0; k < ens.grid().size(); ++k) {
      t.rows.push_back({static_cast<double>(i), ens.grid()[k], row[k]});
    }
  }
  return t;
}

Outcome cmd_simulate(const Args& args) {
  const std::string process = args.choice("process", kProcesses);
  const double t_max = args.positive("t-max");
  const std::size_t steps = args.count("steps");
  const std::size_t paths = args.count("paths");
  const std::uint64_t seed = args.seed();
  const TimeGrid grid = TimeGrid::uniform(0.0, t_max, steps);
  const Ensemble ens = simulate(args, process, grid, paths, seed);
  Outcome o;
  o.csv = io::ensemble_csv(ens);
  o.plot_table = path_table(ens, 10);
  o.plot = {"t", "value", "path_id", false, false, process + " sample paths"};
  std::ostringstream os;
  os << "simulated " << paths << " " << process << " path(s) on " << grid.size() << " points\n";
  for (const auto& w : ens.warnings()) os << "warning: " << w << "\n";
  o.summary = os.str();
  return o;
}

// ---------------------------------------------------------------- covariances

std::size_t lattice_index(double x, const char* what) {
  if (x < 0.0 || std::abs(x - std::round(x)) > 1e-9) {
    std::ostringstream os;
    os << what << " needs nonnegative integer grid points, got " << x;
    throw UsageError(os.str());
  }
  return static_cast<std::size_t>(std::llround(x));
}

Outcome cmd_cov(const Args& args) {
  const std::string formula = args.choice(
      "formula", {"fbm", "ou", "xd", "fgn", "fou1-asym", "fou1-var", "y", "yvar", "ud", "rho-y", "scaled-y"});
  const ModelParams p = args.params();
  const std::vector<double> xs = args.grid("tau-grid");
  const double s = args.real("s");
  const double t = args.real("t");
  const auto terms = static_cast<int>(args.count("terms"));
  const QuadratureConfig quad = args.quad();
  const TruncationPolicy trunc = args.trunc();
  const std::set<std::string> kernel = {"y", "yvar", "ud", "rho-y", "scaled-y"};
  if (kernel.count(formula)) p.require_kernel_regime();
  if (formula == "fgn" || formula == "rho-y") {
    for (double x : xs) lattice_index(x, formula.c_str());
  }

  std::function<QuadResult(double)> f;
  auto exact = [](double v) { return QuadResult{v, 0.0, 0}; };
  if (formula == "fbm") f = [&](double x) { return exact(fbm_cov(p, s, x)); };
  if (formula == "ou") f = [&](double x) { return exact(ou_cov(p.alpha, 0.0, x)); };
  if (formula == "xd") f = [&](double x) { return exact(xd_cov(p, 0.0, x)); };
  if (formula == "fgn") f = [&](double x) { return exact(fgn_autocov(p, lattice_index(x, "fgn"))); };
  if (formula == "fou1-asym") f = [&](double x) { return exact(fou1_cov_asymptotic(p, x, terms)); };
  if (formula == "fou1-var") {
    f = [&](double x) {
      ModelParams q = p;
      q.alpha = x;
      return fou1_stationary_variance(q, quad);
    };
  }
  if (formula == "y") f = [&](double x) { return y_cov(p, s, x, quad); };
  if (formula == "yvar") f = [&](double x) { return y_var(p, x, quad); };
  if (formula == "ud") f = [&](double x) { return ud_cov(p, 0.0, x, trunc, quad); };
  if (formula == "rho-y") f = [&](double x) { return rho_y(p, lattice_index(x, "rho-y"), quad); };
  if (formula == "scaled-y") f = [&](double x) { return scaled_y_cov(p, x, s, t, quad); };

  const auto rows = tabulate(f, xs);
  Outcome o;
  o.csv = io::table_csv(rows);
  o.plot_table = table_of(rows);
  o.plot = {"x", "value", "", false, false, formula + " covariance"};
  o.summary = "tabulated " + formula + " at " + std::to_string(rows.size()) + " point(s)\n";
  return o;
}

Outcome cmd_kernel(const Args& args) {
  const ModelParams p = args.params();
  p.require_kernel_regime();
  const std::vector<double> xs = args.grid("tau-grid");
  const QuadratureConfig quad = args.quad();
  const KernelSpec k(p);
  for (double x : xs) {
    if (x == 0.0) throw UsageError("--tau-grid: the kernel is singular at x = 0");
  }
  const auto rows = tabulate([&](double x) { return QuadResult{k(x), 0.0, 0}; }, xs);
  const KappaSigma ks = kappa_sigma(p);
  const QuadResult integral = kernel_integral(p, quad);
  Report r{"kernel constants", {}};
  r.checks.push_back({"c_const", k.c(), 0.0, k.c(), kNaN, true});
  r.checks.push_back({"sigma", ks.sigma, 0.0, std::sqrt(ks.kappa), kNaN, true});
  r.checks.push_back(band_check("two_int_kernel_vs_kappa", 2.0 * integral.value, ks.kappa, 1e-6));
  Outcome o;
  o.csv = io::table_csv(rows);
  o.extra.emplace_back("report.csv", io::report_csv(r));
  o.plot_table = table_of(rows);
  o.plot = {"x", "value", "", false, true, "kernel k(x)"};
  o.summary = io::report_summary(r);
  o.report = std::move(r);
  return o;
}

// ---------------------------------------------------------------- experiments

Outcome report_outcome(Report r) {
  Outcome o;
  o.csv = io::report_csv(r);
  o.summary = io::report_summary(r);
  o.report = std::move(r);
  return o;
}

Outcome cmd_weak_convergence(const Args& args) {
  const ModelParams p = args.params();
  WeakConvergenceConfig cfg;
  cfg.a_values = args.reals("a");
  cfg.probes = args.pairs("probes");
  const std::string mode = args.choice("mode", {"quadrature", "monte-carlo"});
  cfg.mode = mode == "quadrature" ? ConvergenceMode::Quadrature : ConvergenceMode::MonteCarlo;
  cfg.quad = args.quad();
  cfg.paths = args.count("paths");
  cfg.seed = args.seed();
  if (cfg.mode == ConvergenceMode::Quadrature) p.require_kernel_regime();
  Outcome o = report_outcome(weak_convergence_experiment(p, cfg));

  // Error against the limit per probe, for the plot.
  io::CsvTable t;
  t.header = {"probe", "a", "abs_error"};
  for (std::size_t i = 0; i < cfg.probes.size(); ++i) {
    for (const auto& c : o.report->checks) {
      const bool cov_row = c.metric.rfind("scaled_cov", 0) == 0 || c.metric.rfind("cov", 0) == 0;
      if (!cov_row) continue;
      std::ostringstream prefix;
      prefix << "[s=" << cfg.probes[i].first << ",t=" << cfg.probes[i].second << ",a=";
      const auto pos = c.metric.find(prefix.str());
      if (pos == std::string::npos) continue;
      const double a = std::strtod(c.metric.c_str() + pos + prefix.str().size(), nullptr);
      const double limit = p.hurst > 0.5 ? kappa_sigma(p).kappa : 1.0;
      const double err = std::abs(c.estimate - limit * std::min(cfg.probes[i].first, cfg.probes[i].second));
      t.rows.push_back({static_cast<double>(i), a, err});
    }
  }
  o.plot_table = std::move(t);
  o.plot = {"a", "abs_error", "probe", true, true, "distance to the Brownian limit"};
  return o;
}

Outcome cmd_decay_rate(const Args& args) {
  const ModelParams p = args.params();
  const std::string curve = args.choice("curve", {"xd", "ud", "rho-y"});
  const std::vector<double> xs = args.grid("tau-grid");
  const QuadratureConfig quad = args.quad();
  const TruncationPolicy trunc = args.trunc();
  const double h = p.hurst;
  double rate = 0.0;
  double band = 0.1;
  std::function<QuadResult(double)> f;
  if (curve == "xd") {
    rate = p.alpha * std::min(1.0, (1.0 - h) / h);
    band = 0.05;
    f = [&](double x) { return QuadResult{xd_cov(p, 0.0, x), 0.0, 0}; };
  } else if (curve == "ud") {
    p.require_kernel_regime();
    rate = std::min(p.gamma, (1.0 - h) / h);
    f = [&](double x) { return ud_cov(p, 0.0, x, trunc, quad); };
  } else {
    p.require_kernel_regime();
    for (double x : xs) lattice_index(x, "rho-y");
    rate = p.alpha * (1.0 - h) / h;
    f = [&](double x) { return rho_y(p, lattice_index(x, "rho-y"), quad); };
  }
  const auto rows = tabulate(f, xs);
  std::vector<double> tau;
  std::vector<double> values;
  for (const auto& r : rows) {
    tau.push_back(r.x);
    values.push_back(r.value);
  }
  const FitReport fit = decay_rate_fit(tau, values, xs.front(), xs.back());
  Report r{"decay rate of " + curve, {}};
  r.checks.push_back(band_check("decay_slope[" + curve + "]", fit.slope, -rate, band));
  r.checks.push_back({"r_squared[" + curve + "]", fit.r_squared, 0.0, 1.0, kNaN, true});
  Outcome o = report_outcome(std::move(r));
  o.extra.emplace_back("data.csv", io::table_csv(rows));
  o.plot_table = table_of(rows);
  o.plot = {"x", "value", "", false, true, curve + " covariance decay"};
  return o;
}

Outcome cmd_stationarity(const Args& args) {
  const std::string process = args.choice("process", kProcesses);
  const double t_max = args.positive("t-max");
  const std::size_t steps = args.count("steps");
  const std::size_t paths = args.count("paths");
  const std::uint64_t seed = args.seed();
  const double lag = args.real("lag");
  const std::vector<double> shifts = args.reals("shifts");
  const TimeGrid grid = TimeGrid::uniform(0.0, t_max, steps);
  for (double h : shifts) {
    if (!grid.index_of(h) || !grid.index_of(h + lag)) {
      std::ostringstream os;
      os << "shift " << h << " with lag " << lag << " is not on the grid";
      throw UsageError(os.str());
    }
  }
  if (paths < 2) throw UsageError("--paths must be >= 2 for standard errors");
  const Ensemble ens = simulate(args, process, grid, paths, seed);
  const StationarityReport st = stationarity_test(ens, lag, shifts);
  Report r{"stationarity of " + process, {}};
  const CovEstimate& base = st.estimates.front();
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    const CovEstimate& c = st.estimates[i];
    std::ostringstream name;
    name << "cov[h=" << shifts[i] << ",lag=" << lag << "]";
    const double se = std::hypot(c.std_error, base.std_error);
    const double z = i == 0 ? 0.0 : (se > 0.0 ? (c.value - base.value) / se : kNaN);
    r.checks.push_back({name.str(), c.value, c.std_error, base.value, z, true});
  }
  r.checks.push_back({"max_pairwise_z", st.max_abs_z, 0.0, 3.0, kNaN, st.pass});
  return report_outcome(std::move(r));
}

Outcome cmd_range_dependence(const Args& args) {
  const ModelParams p = args.params();
  const std::string sequence = args.choice("sequence", {"fgn", "rho-y", "xd"});
  const std::size_t length = args.count("length");
  const QuadratureConfig quad = args.quad();
  if (sequence == "rho-y") p.require_kernel_regime();
  if (length < 16) throw UsageError("--length must be >= 16");
  std::vector<double> seq(length);
  for (std::size_t n = 0; n < length; ++n) {
    if (sequence == "fgn") seq[n] = fgn_autocov(p, n);
    if (sequence == "xd") seq[n] = xd_cov(p, 0.0, static_cast<double>(n));
    if (sequence == "rho-y") seq[n] = rho_y(p, n, quad).value;
  }
  const RangeReport rr = range_dependence_diagnostic(seq);
  const RangeClass expected =
      sequence == "fgn" && p.hurst > 0.5 ? RangeClass::LongRange : RangeClass::ShortRange;
  Report r{"range dependence of " + sequence + ": " + std::string(to_string(rr.classification)), {}};
  r.checks.push_back({"classification", static_cast<double>(rr.classification), 0.0,
                      static_cast<double>(expected), kNaN, rr.classification == expected});
  if (expected == RangeClass::LongRange) {
    r.checks.push_back(band_check("power_exponent", rr.power.slope, 2.0 * p.hurst - 2.0, 0.15));
  } else if (sequence == "rho-y") {
    r.checks.push_back(band_check("exponential_rate", -rr.exponential.slope,
                                  p.alpha * (1.0 - p.hurst) / p.hurst, 0.1));
  } else if (sequence == "xd") {
    r.checks.push_back(band_check("exponential_rate", -rr.exponential.slope,
                                  p.alpha * std::min(1.0, (1.0 - p.hurst) / p.hurst), 0.1));
  }
  r.checks.push_back({"cauchy_gap", rr.cauchy_gap, 0.0, 0.05, kNaN, true});
  Outcome o = report_outcome(std::move(r));
  std::vector<TableRow> rows;
  for (std::size_t n = 0; n < length; ++n) rows.push_back({static_cast<double>(n), seq[n], 0.0});
  o.extra.emplace_back("data.csv", io::table_csv(rows));
  io::CsvTable t = table_of(rows);
  for (auto& row : t.rows) row[1] = std::abs(row[1]);
  o.plot_table = std::move(t);
  o.plot = {"x", "value", "", true, true, "|autocovariance| of " + sequence};
  return o;
}

Outcome cmd_holder(const Args& args) {
  const std::string process = args.choice("process", kProcesses);
  const double t_max = args.positive("t-max");
  const std::size_t steps = args.count("steps");
  const std::uint64_t seed = args.seed();
  const ModelParams p = args.params();
  if (steps < 128) throw UsageError("--steps must be >= 128 for at least 4 dyadic scales");
  const TimeGrid grid = TimeGrid::uniform(0.0, t_max, steps);
  const Ensemble ens = simulate(args, process, grid, 1, seed);
  std::vector<std::size_t> scales;
  for (std::size_t m = 1; m <= steps / 16; m *= 2) scales.push_back(m);
  const FitReport fit = holder_exponent(ens.sample_path(0), scales);
  const double target = process == "ou" ? 0.5 : p.hurst;
  Report r{"Holder exponent of " + process, {}};
  r.checks.push_back({"holder_slope", fit.slope, 0.0, target, kNaN,
                      fit.slope >= target - 0.15 && fit.slope <= target + 0.1});
  return report_outcome(std::move(r));
}

// ---------------------------------------------------------------- commands

struct Command {
  std::string name;         // CLI name
  std::string kind;         // manifest kind
  std::string description;
  Settings defaults;
  std::function<Outcome(const Args&)> handler;
};

std::vector<Command> commands() {
  const Settings model = {{"hurst", "0.75"}, {"alpha", "1"}, {"gamma", "1"}};
  const Settings quad = {{"rel-tol", "1e-8"}, {"abs-tol", "1e-10"}};
  const Settings sim = {{"seed", "0"},   {"method", "auto"},   {"init", "stationary"},
                        {"refine", "8"}, {"tolerance", "1e-8"}};
  auto merge = [](std::initializer_list<Settings> parts) {
    Settings out;
    for (const auto& part : parts) {
      for (const auto& [k, v] : part) out[k] = v;
    }
    return out;
  };
  return {
      {"simulate", "simulate", "sample paths of a process",
       merge({model, sim, {{"process", "fbm"}, {"t-max", "10"}, {"steps", "512"}, {"paths", "100"}}}),
       cmd_simulate},
      {"cov", "cov", "tabulate an analytic covariance",
       merge({model, quad,
              {{"formula", "xd"}, {"tau-grid", "0:20:0.1"}, {"s", "1"}, {"t", "2"}, {"terms", "2"},
               {"tolerance", "1e-8"}}}),
       cmd_cov},
      {"kernel", "kernel", "tabulate the kernel k(x) and its constants",
       merge({{{"hurst", "0.75"}, {"alpha", "1"}}, quad, {{"tau-grid", "0.1:20:0.1"}}}), cmd_kernel},
      {"weak-convergence", "weak-convergence", "covariance convergence of the scaled process",
       merge({model, quad,
              {{"a", "4,16,64,256"}, {"probes", "1:2,0.5:3"}, {"mode", "quadrature"}, {"paths", "2000"},
               {"seed", "0"}}}),
       cmd_weak_convergence},
      {"decay-rate", "decay-rate", "exponential decay rate of a covariance curve",
       merge({model, quad, {{"curve", "xd"}, {"tau-grid", "5:15:0.5"}, {"tolerance", "1e-10"}}}),
       cmd_decay_rate},
      {"stationarity", "stationarity", "shift invariance of simulated covariances",
       merge({model, sim,
              {{"process", "xd"}, {"t-max", "4"}, {"steps", "8"}, {"paths", "4000"}, {"lag", "1"},
               {"shifts", "0,1,2"}}}),
       cmd_stationarity},
      {"range-dependence", "range-dependence", "long/short range dependence of a sequence",
       merge({model, quad, {{"sequence", "fgn"}, {"length", "256"}}}), cmd_range_dependence},
      {"holder", "holder", "Holder exponent of one simulated path",
       merge({model, sim, {{"process", "fbm"}, {"t-max", "1"}, {"steps", "4096"}, {"refine", "1"}}}),
       cmd_holder},
  };
}

// ---------------------------------------------------------------- output

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

bool is_directory_target(const std::string& out) {
  return !out.empty() && (out.back() == '/' || fs::is_directory(out));
}

fs::path fresh_run_dir(const fs::path& base, const std::string& stamp, const std::string& kind) {
  fs::create_directories(base);
  fs::path dir = base / (stamp + "-" + kind);
  for (int n = 1; fs::exists(dir); ++n) dir = base / (stamp + "-" + kind + "-" + std::to_string(n));
  fs::create_directory(dir);
  return dir;
}

std::string manifest_text(const Command& cmd, const Settings& settings, const std::string& stamp,
                          const std::vector<std::string>& outputs) {
  io::KeyValues kv;
  kv.emplace_back("kind", cmd.kind);
  kv.emplace_back("version", kVersion);
  kv.emplace_back("timestamp", stamp);
  for (const auto& [k, v] : settings) kv.emplace_back(k, v);
  std::string joined;
  for (const auto& o : outputs) joined += (joined.empty() ? "" : ",") + o;
  kv.emplace_back("outputs", joined);
  return io::format_key_values(kv);
}

void write_outputs(const Command& cmd, const Settings& settings, const Outcome& o,
                   const std::string& out, std::ostream& stdout_stream, std::ostream& stderr_stream) {
  const std::string stamp = utc_timestamp();
  if (out.empty()) {
    stdout_stream << o.csv;
    stderr_stream << o.summary;
    return;
  }
  std::vector<std::string> written;
  if (is_directory_target(out)) {
    const fs::path dir = fresh_run_dir(out, stamp, cmd.kind);
    const bool is_report = o.report && o.csv == io::report_csv(*o.report);
    const std::string primary = is_report ? "report.csv" : "data.csv";
    io::atomic_write(dir / primary, o.csv);
    written.push_back(primary);
    for (const auto& [name, content] : o.extra) {
      io::atomic_write(dir / name, content);
      written.push_back(name);
    }
    if (o.report) {
      io::atomic_write(dir / "summary.txt", o.summary);
      written.push_back("summary.txt");
    }
    if (o.plot_table) {
      io::atomic_write(dir / "plot.svg", io::render_svg(*o.plot_table, o.plot));
      written.push_back("plot.svg");
    }
    io::atomic_write(dir / "manifest.txt", manifest_text(cmd, settings, stamp, written));
    stdout_stream << o.summary << "wrote " << dir.string() << "\n";
    return;
  }
  const fs::path file(out);
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  io::atomic_write(file, o.csv);
  written.push_back(file.filename().string());
  if (o.report) {
    fs::path summary = file;
    summary += ".summary.txt";
    io::atomic_write(summary, o.summary);
    written.push_back(summary.filename().string());
  }
  fs::path manifest = file;
  manifest += ".manifest.txt";
  io::atomic_write(manifest, manifest_text(cmd, settings, stamp, written));
  stdout_stream << o.summary << "wrote " << file.string() << "\n";
}

// ---------------------------------------------------------------- render

struct RenderOptions {
  std::string in;
  std::string out;
  io::PlotSpec spec;
};

int do_render(const RenderOptions& r, std::ostream& out) {
  if (r.in.empty() || r.out.empty()) throw UsageError("render needs --in and --out");
  const io::CsvTable table = io::read_csv(r.in);
  if (table.rows.size() > kMaxTableRows) throw UsageError("render: table exceeds 10^6 rows");
  const std::string svg = io::render_svg(table, r.spec);
  const fs::path file(r.out);
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  io::atomic_write(file, svg);
  out << "wrote " << file.string() << "\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractional Ornstein-Uhlenbeck processes: simulation, covariances, experiments", "fou"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  struct Bound {
    const Command* cmd;
    CLI::App* app;
    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> opts;
    std::string config;
    std::string out;
    bool strict = false;
  };
  const std::vector<Command> cmds = commands();
  std::vector<std::unique_ptr<Bound>> bound;
  CLI::App* experiment = app.add_subcommand("experiment", "run a verification experiment");
  experiment->require_subcommand(1);
  const std::set<std::string> experiments = {"weak-convergence", "decay-rate", "stationarity",
                                             "range-dependence", "holder"};
  std::set<std::string> known_keys;
  for (const auto& c : cmds) {
    for (const auto& [k, v] : c.defaults) known_keys.insert(k);
  }
  for (const auto& c : cmds) {
    auto b = std::make_unique<Bound>();
    b->cmd = &c;
    CLI::App* parent = experiments.count(c.name) ? experiment : &app;
    b->app = parent->add_subcommand(c.name, c.description);
    for (const auto& [k, v] : c.defaults) {
      const auto help = key_help().count(k) ? key_help().at(k) : k;
      b->opts[k] = b->app->add_option("--" + k, b->raw[k], help)->default_str(v);
    }
    b->app->add_option("--config", b->config, "flat key = value settings file");
    b->app->add_option("--out", b->out, "output file, or directory (trailing /) for a run folder");
    b->app->add_flag("--strict", b->strict, "exit 1 if any check fails");
    bound.push_back(std::move(b));
  }
  RenderOptions render;
  CLI::App* render_app = app.add_subcommand("render", "render a CSV table as SVG");
  render_app->add_option("--in", render.in, "input CSV")->required();
  render_app->add_option("--out", render.out, "output SVG")->required();
  render_app->add_option("--x", render.spec.x_column, "x column")->default_str("x");
  render_app->add_option("--y", render.spec.y_column, "y column")->default_str("value");
  render_app->add_option("--group", render.spec.group_column, "column splitting rows into curves");
  render_app->add_option("--title", render.spec.title, "plot title");
  render_app->add_flag("--log-x", render.spec.log_x, "logarithmic x axis");
  render_app->add_flag("--log-y", render.spec.log_y, "logarithmic y axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (render_app->parsed()) return do_render(render, out);
    for (const auto& b : bound) {
      if (!b->app->parsed()) continue;
      Settings settings = b->cmd->defaults;
      if (!b->config.empty()) {
        for (const auto& [k, v] : io::parse_key_values(io::read_text(b->config))) {
          if (kMetaKeys.count(k)) continue;
          if (!known_keys.count(k)) throw ConfigError("unknown config key '" + k + "'");
          if (settings.count(k)) settings[k] = v;
        }
      }
      for (const auto& [k, opt] : b->opts) {
        if (opt->count() > 0) settings[k] = b->raw[k];
      }
      const Outcome outcome = b->cmd->handler(Args(settings));
      write_outputs(*b->cmd, settings, outcome, b->out, out, err);
      if (b->strict && outcome.report && !outcome.report->passed()) return 1;
      return 0;
    }
    throw UsageError("no subcommand selected");
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const BudgetError& e) {
    err << "budget error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << " (min eigenvalue " << e.min_eigenvalue() << ")\n";
    return 1;
  } catch (const QuadratureError& e) {
    err << "quadrature error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "file error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace fou::cli
