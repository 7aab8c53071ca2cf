#include "fou/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fou/analytics.hpp"
#include "fou/errors.hpp"
#include "fou/rng.hpp"
#include "fou/transforms.hpp"

namespace fou {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t grid_index(const Ensemble& ens, double t) {
  const auto k = ens.grid().index_of(t);
  if (!k) {
    std::ostringstream os;
    os << "time " << t << " is not on the ensemble grid";
    throw UsageError(os.str());
  }
  return *k;
}

std::string probe_name(const char* what, double s, double t, double a) {
  std::ostringstream os;
  os << what << "[s=" << s << ",t=" << t << ",a=" << a << "]";
  return os.str();
}

// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

bool Report::passed() const { return failures() == 0; }

std::size_t Report::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const Check& c) { return !c.pass; }));
}

double z_score(double estimate, double std_error, double target) {
  if (!(std_error > 0.0)) return kNaN;
  return (estimate - target) / std_error;
}

FitReport linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw UsageError("linear_fit needs >= 2 matching points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw UsageError("linear_fit: x values are all equal");
  FitReport f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  f.lo = *std::min_element(x.begin(), x.end());
  f.hi = *std::max_element(x.begin(), x.end());
  return f;
}

CovEstimate empirical_cov(const Ensemble& ensemble, double s, double t) {
  const std::size_t n = ensemble.count();
  if (n < 2) throw UsageError("empirical_cov needs at least 2 paths for a standard error");
  const std::size_t i = grid_index(ensemble, s);
  const std::size_t j = grid_index(ensemble, t);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const auto row = ensemble.path(p);
    const double x = row[i] * row[j];
    const double delta = x - mean;
    mean += delta / static_cast<double>(p + 1);
    m2 += delta * (x - mean);
  }
  const double var = m2 / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

StationarityReport stationarity_test(const Ensemble& ensemble, double lag,
                                     const std::vector<double>& shifts) {
  StationarityReport r;
  r.shifts = shifts;
  for (double h : shifts) r.estimates.push_back(empirical_cov(ensemble, h, h + lag));
  for (std::size_t i = 0; i < r.estimates.size(); ++i) {
    for (std::size_t j = i + 1; j < r.estimates.size(); ++j) {
      const auto& a = r.estimates[i];
      const auto& b = r.estimates[j];
      const double se = std::hypot(a.std_error, b.std_error);
      const double z = se > 0.0 ? std::abs(a.value - b.value) / se
                                : (a.value == b.value ? 0.0 : std::numeric_limits<double>::infinity());
      r.max_abs_z = std::max(r.max_abs_z, z);
    }
  }
  r.pass = r.max_abs_z < 3.0;
  return r;
}

std::string_view to_string(RangeClass c) {
  switch (c) {
    case RangeClass::ShortRange: return "short-range";
    case RangeClass::LongRange: return "long-range";
    case RangeClass::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

RangeReport range_dependence_diagnostic(std::span<const double> autocov) {
  if (autocov.size() < 16) throw UsageError("range_dependence_diagnostic needs >= 16 values");
  for (double v : autocov) {
    if (!std::isfinite(v)) throw UsageError("range_dependence_diagnostic: non-finite autocovariance");
  }
  RangeReport r;
  const std::size_t n = autocov.size();
  double half_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    r.partial_sum += autocov[k];
    if (k < n / 2) half_sum += autocov[k];
  }
  r.cauchy_gap = r.partial_sum != 0.0 ? std::abs(r.partial_sum - half_sum) / std::abs(r.partial_sum)
                                      : std::abs(r.partial_sum - half_sum);
  const bool settled = r.cauchy_gap <= 0.05;

  // Tail fit from lag 4 on, skipping exact zeros.
  std::vector<double> lags;
  std::vector<double> log_lags;
  std::vector<double> logs;
  for (std::size_t k = 4; k < n; ++k) {
    if (autocov[k] == 0.0) continue;
    lags.push_back(static_cast<double>(k));
    log_lags.push_back(std::log(static_cast<double>(k)));
    logs.push_back(std::log(std::abs(autocov[k])));
  }
  if (lags.size() < 3) {
    r.classification = settled ? RangeClass::ShortRange : RangeClass::Inconclusive;
    return r;
  }
  r.power = linear_fit(log_lags, logs);
  r.exponential = linear_fit(lags, logs);
  const bool power_wins = r.power.r_squared > r.exponential.r_squared;
  if (power_wins && r.power.slope > -1.0 && r.power.slope < 0.0 && !settled) {
    r.classification = RangeClass::LongRange;
  } else if (!power_wins || settled || r.power.slope < -1.0) {
    r.classification = RangeClass::ShortRange;
  } else {
    r.classification = RangeClass::Inconclusive;
  }
  return r;
}

FitReport decay_rate_fit(std::span<const double> tau, std::span<const double> values, double lo,
                         double hi) {
  if (tau.size() != values.size()) throw UsageError("decay_rate_fit: size mismatch");
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (tau[i] < lo || tau[i] > hi) continue;
    if (!(values[i] > 0.0)) {
      std::ostringstream os;
      os << "decay_rate_fit: nonpositive value " << values[i] << " at tau = " << tau[i];
      throw UsageError(os.str());
    }
    x.push_back(tau[i]);
    y.push_back(std::log(values[i]));
  }
  if (x.size() < 2) throw UsageError("decay_rate_fit: fewer than 2 points in the window");
  return linear_fit(x, y);
}

FitReport holder_exponent(const SamplePath& path, const std::vector<std::size_t>& scales) {
  if (scales.size() < 4) throw UsageError("holder_exponent needs at least 4 scales");
  const auto& grid = path.grid;
  if (grid.size() < 2 || !grid.is_uniform()) throw UsageError("holder_exponent needs a uniform grid");
  const double h = grid[1] - grid[0];
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t m : scales) {
    if (m == 0 || m >= grid.size()) throw UsageError("holder_exponent: scale out of range");
    double worst = 0.0;
    for (std::size_t k = 0; k + m < path.values.size(); ++k) {
      worst = std::max(worst, std::abs(path.values[k + m] - path.values[k]));
    }
    if (!(worst > 0.0)) throw UsageError("holder_exponent: constant path");
    x.push_back(std::log(static_cast<double>(m) * h));
    y.push_back(std::log(worst));
  }
  return linear_fit(x, y);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw UsageError("ks_two_sample needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)};
}

NormalityReport normality_test(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 8) throw UsageError("normality_test needs at least 8 values");
  const double nn = static_cast<double>(n);
  const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / nn;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double v : sample) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= nn;
  m3 /= nn;
  m4 /= nn;
  if (!(m2 > 0.0)) throw UsageError("normality_test: sample has zero variance");
  NormalityReport r;
  r.skewness = m3 / std::pow(m2, 1.5);
  r.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  r.skew_z = r.skewness / std::sqrt(6.0 / nn);
  r.kurtosis_z = r.excess_kurtosis / std::sqrt(24.0 / nn);
  r.pass = std::abs(r.skew_z) < 3.0 && std::abs(r.kurtosis_z) < 3.0;
  return r;
}

namespace {

Report weak_convergence_quadrature(const ModelParams& params, const WeakConvergenceConfig& cfg) {
  params.require_kernel_regime();
  const double kappa = kappa_sigma(params).kappa;
  Report report{"weak-convergence (quadrature)", {}};
  for (const auto& [s, t] : cfg.probes) {
    const double target = kappa * std::min(s, t);
    std::vector<double> errors;
    for (double a : cfg.a_values) {
      const QuadResult v = scaled_y_cov(params, a, s, t, cfg.quad);
      errors.push_back(std::abs(v.value - target));
      report.checks.push_back({probe_name("scaled_cov", s, t, a), v.value, v.error, target, kNaN, true});
    }
    std::size_t decreases = 0;
    for (std::size_t i = 1; i < errors.size(); ++i) decreases += errors[i] < errors[i - 1] ? 1 : 0;
    std::ostringstream name;
    name << "error_decreasing[s=" << s << ",t=" << t << "]";
    const double steps = static_cast<double>(errors.size() > 0 ? errors.size() - 1 : 0);
    report.checks.push_back({name.str(), static_cast<double>(decreases), 0.0, steps, kNaN,
                             static_cast<double>(decreases) == steps});
    if (!errors.empty()) {
      const double rel = errors.back() / target;
      std::ostringstream fin;
      fin << "final_rel_error[s=" << s << ",t=" << t << "]";
      report.checks.push_back({fin.str(), rel, 0.0, 0.05, kNaN, rel < 0.05});
    }
    for (double a : cfg.a_values) {
      const double lo = std::min(s, t);
      const double hi = std::max(s, t);
      const QuadResult inc = kernel_ramp(params, a * (hi - lo), cfg.quad);
      const double lhs = 2.0 * inc.value / a;
      const double bound = kappa * (hi - lo);
      report.checks.push_back(
          {probe_name("tightness", s, t, a), lhs, 2.0 * inc.error / a, bound, kNaN, lhs <= bound});
    }
  }
  return report;
}

Report weak_convergence_monte_carlo(const ModelParams& params, const WeakConvergenceConfig& cfg) {
  if (!(cfg.probe_spacing > 0.0) || !(cfg.max_fine_step > 0.0)) {
    throw UsageError("weak convergence: probe spacing and fine step must be > 0");
  }
  double horizon = 1.0;
  for (const auto& [s, t] : cfg.probes) {
    if (s < 0.0 || t < 0.0) throw UsageError("weak convergence: probe times must be >= 0");
    horizon = std::max({horizon, s, t});
  }
  const auto steps = static_cast<std::size_t>(std::llround(horizon / cfg.probe_spacing));
  const TimeGrid unit = TimeGrid::uniform(0.0, steps * cfg.probe_spacing, steps);
  for (const auto& [s, t] : cfg.probes) {
    if (!unit.index_of(s) || !unit.index_of(t)) {
      std::ostringstream os;
      os << "probe (" << s << ", " << t << ") is not a multiple of the probe spacing "
         << cfg.probe_spacing;
      throw UsageError(os.str());
    }
  }
  std::vector<std::size_t> refinements;
  for (double a : cfg.a_values) {
    const auto r = static_cast<std::size_t>(std::ceil(a * cfg.probe_spacing / cfg.max_fine_step));
    const std::size_t points = steps * std::max<std::size_t>(r, 1) + 1;
    if (points > cfg.max_grid_points) {
      std::ostringstream os;
      os << "a = " << a << " needs " << points << " grid points, over the simulation budget of "
         << cfg.max_grid_points;
      throw BudgetError(os.str());
    }
    refinements.push_back(std::max<std::size_t>(r, 1));
  }

  Report report{"weak-convergence (monte-carlo)", {}};
  for (std::size_t k = 0; k < cfg.a_values.size(); ++k) {
    const double a = cfg.a_values[k];
    const TimeGrid grid = TimeGrid::uniform(0.0, a * unit.back(), steps);
    const Ensemble y = y_process(params, grid, mix64(cfg.seed + k), cfg.paths, refinements[k]);
    for (const auto& [s, t] : cfg.probes) {
      const CovEstimate c = empirical_cov(y, grid[*unit.index_of(s)], grid[*unit.index_of(t)]);
      const double target = params.hurst == 0.5 ? std::min(s, t)
                                                : scaled_y_cov(params, a, s, t, cfg.quad).value;
      const double z = z_score(c.value / a, c.std_error / a, target);
      report.checks.push_back(
          {probe_name("cov", s, t, a), c.value / a, c.std_error / a, target, z, std::abs(z) < 5.0});
    }
    std::vector<double> z1 = y.column(*grid.index_of(a));
    for (double& v : z1) v /= std::sqrt(a);
    const NormalityReport nr = normality_test(z1);
    const double n = static_cast<double>(z1.size());
    std::ostringstream sk;
    sk << "skewness[t=1,a=" << a << "]";
    report.checks.push_back({sk.str(), nr.skewness, std::sqrt(6.0 / n), 0.0, nr.skew_z,
                             std::abs(nr.skew_z) < 3.0});
    std::ostringstream ku;
    ku << "excess_kurtosis[t=1,a=" << a << "]";
    report.checks.push_back({ku.str(), nr.excess_kurtosis, std::sqrt(24.0 / n), 0.0, nr.kurtosis_z,
                             std::abs(nr.kurtosis_z) < 3.0});
  }
  return report;
}

}  // namespace

Report weak_convergence_experiment(const ModelParams& params, const WeakConvergenceConfig& cfg) {
  params.validate();
  if (cfg.a_values.empty() || cfg.probes.empty()) {
    throw UsageError("weak convergence needs at least one a value and one probe");
  }
  for (std::size_t i = 0; i < cfg.a_values.size(); ++i) {
    if (!(cfg.a_values[i] > 0.0)) throw UsageError("a values must be > 0");
    if (i > 0 && !(cfg.a_values[i] > cfg.a_values[i - 1])) {
      throw UsageError("a values must be strictly increasing");
    }
  }
  return cfg.mode == ConvergenceMode::Quadrature ? weak_convergence_quadrature(params, cfg)
                                                 : weak_convergence_monte_carlo(params, cfg);
}

}  // namespace fou
