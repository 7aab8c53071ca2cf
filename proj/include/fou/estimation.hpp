#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fou/quadrature.hpp"
#include "fou/types.hpp"

namespace fou {

/// Known-mean (zero) covariance estimate with its Monte Carlo standard error.
struct CovEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

/// Least-squares line through (x, y) restricted to x in [lo, hi].
struct FitReport {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// One verified quantity; `z` is NaN when the check is not a z-test.
struct Check {
  std::string metric;
  double estimate = 0.0;
  double std_error = 0.0;
  double target = 0.0;
  double z = 0.0;
  bool pass = true;
};

struct Report {
  std::string title;
  std::vector<Check> checks;

  bool passed() const;
  std::size_t failures() const;
};

/// z-score of `estimate` against `target`; NaN when the standard error is 0.
double z_score(double estimate, double std_error, double target);

FitReport linear_fit(std::span<const double> x, std::span<const double> y);

/// (1/N) sum X_s X_t over paths; throws UsageError off-grid or with fewer than 2 paths.
CovEstimate empirical_cov(const Ensemble& ensemble, double s, double t);

struct StationarityReport {
  std::vector<double> shifts;
  std::vector<CovEstimate> estimates;  // cov(h, h + lag) per shift
  double max_abs_z = 0.0;
  bool pass = true;
};

/// Pairwise z-scores between cov(h, h + lag) over all shifts; passes if max |z| < 3.
StationarityReport stationarity_test(const Ensemble& ensemble, double lag,
                                     const std::vector<double>& shifts);

enum class RangeClass { ShortRange, LongRange, Inconclusive };

std::string_view to_string(RangeClass c);

struct RangeReport {
  RangeClass classification = RangeClass::Inconclusive;
  FitReport power;        // log |rho(n)| against log n
  FitReport exponential;  // log |rho(n)| against n
  double partial_sum = 0.0;
  double cauchy_gap = 0.0;  // |S_N - S_{N/2}| / |S_N|
};

/// Classifies an autocovariance sequence rho(0), rho(1), ... (length >= 16).
///
/// LongRange when the power law fits the tail better than the exponential
/// with exponent in (-1, 0) and the partial sums do not settle; ShortRange
/// when the exponential fit wins, the partial sums settle to 5%, or the
/// power exponent is below -1.
RangeReport range_dependence_diagnostic(std::span<const double> autocov);

/// Slope of log(value) against tau over the window; UsageError on nonpositive values.
FitReport decay_rate_fit(std::span<const double> tau, std::span<const double> values, double lo,
                         double hi);

/// Regression of log max |x(t + m h) - x(t)| on log(m h) over the window
/// sizes `scales` (in grid steps). Needs a uniform grid and >= 4 scales.
FitReport holder_exponent(const SamplePath& path, const std::vector<std::size_t>& scales);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov distribution.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct NormalityReport {
  double skewness = 0.0;
  double skew_z = 0.0;
  double excess_kurtosis = 0.0;
  double kurtosis_z = 0.0;
  bool pass = true;
};

/// Skewness and excess-kurtosis z-tests (standard errors sqrt(6/n), sqrt(24/n));
/// passes if both |z| < 3.
NormalityReport normality_test(std::span<const double> sample);

enum class ConvergenceMode { Quadrature, MonteCarlo };

struct WeakConvergenceConfig {
  std::vector<double> a_values;
  std::vector<std::pair<double, double>> probes;
  ConvergenceMode mode = ConvergenceMode::Quadrature;
  QuadratureConfig quad;
  // Monte Carlo only.
  std::size_t paths = 10000;
  std::uint64_t seed = 0;
  double probe_spacing = 0.5;        // user-time grid step; probes must lie on it
  double max_fine_step = 0.125;      // bound on the quadrature step of Y
  std::size_t max_grid_points = 4096;
};

/// Covariance convergence of Z^(a)_t = Y_{a t} / sqrt(a) to kappa min(s, t).
///
/// Quadrature mode reports the error sequence against kappa min(s, t), its
/// strict decrease, the final relative error (< 5%), and the tightness bound
/// E((Y_{at} - Y_{as})^2) / a <= kappa (t - s). Monte Carlo mode simulates
/// Z^(a) and checks covariance within 5 SE and normality of Z^(a)_1.
/// Throws BudgetError naming the first a whose grid exceeds the budget.
Report weak_convergence_experiment(const ModelParams& params, const WeakConvergenceConfig& cfg);

}  // namespace fou
