#include "fou/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fou/errors.hpp"

namespace fou {

namespace {

void require_nonnegative(double t, const char* who) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    std::ostringstream os;
    os << who << ": time must be finite and >= 0, got " << t;
    throw DomainError(os.str());
  }
}

QuadResult scale(QuadResult r, double factor) {
  r.value *= factor;
  r.error *= std::abs(factor);
  return r;
}

}  // namespace

double ou_cov(double alpha, double s, double t) {
  if (!(alpha > 0.0)) throw DomainError("ou_cov: alpha must be > 0");
  return std::exp(-alpha * std::abs(t - s)) / (2.0 * alpha);
}

double xd_cov(const ModelParams& params, double s, double t) {
  params.validate();
  const double h = params.hurst;
  const double a = params.alpha;
  const double tau = std::abs(t - s);
  const double var = std::pow(h / a, 2.0 * h);
  // 1 - (1 - e^{-a tau / H})^{2H}, kept in log form against e^{a tau}.
  const double log_tail = std::log(-std::expm1(2.0 * h * std::log1p(-std::exp(-a * tau / h))));
  return 0.5 * var * (std::exp(-a * tau) + std::exp(a * tau + log_tail));
}

QuadResult fou1_stationary_variance(const ModelParams& params, const QuadratureConfig& quad) {
  params.validate();
  const double h = params.hurst;
  const Integrand weight = [](double x) { return 1.0 / (1.0 + x * x); };
  // int_0^inf x^{1-2H}/(1+x^2) dx folded onto [0,1] by x -> 1/x.
  const QuadratureConfig half = quad.scaled(0.5);
  const QuadResult integral = integrate_power_left(weight, 0.0, 1.0, 1.0 - 2.0 * h, half) +
                              integrate_power_left(weight, 0.0, 1.0, 2.0 * h - 1.0, half);
  const double prefactor = std::tgamma(2.0 * h + 1.0) * std::sin(std::numbers::pi * h) /
                           std::numbers::pi * std::pow(params.alpha, -2.0 * h);
  return scale(integral, prefactor);
}

double fou1_cov_asymptotic(const ModelParams& params, double t, int terms) {
  params.validate();
  if (params.hurst == 0.5) throw DomainError("the large-lag expansion excludes H = 1/2");
  if (!(t > 0.0)) throw DomainError("fou1_cov_asymptotic: t must be > 0");
  if (terms < 1) throw UsageError("fou1_cov_asymptotic: need at least one term");
  const double h2 = 2.0 * params.hurst;
  double sum = 0.0;
  double product = 1.0;
  for (int n = 1; n <= terms; ++n) {
    product *= (h2 - (2 * n - 2)) * (h2 - (2 * n - 1));
    sum += std::pow(params.alpha, -2.0 * n) * product * std::pow(t, h2 - 2.0 * n);
  }
  return 0.5 * sum;
}

KernelSpec::KernelSpec(const ModelParams& params) : params_(params) {
  params.validate();
  params.require_kernel_regime();
  const double h = params.hurst;
  c_ = h * (2.0 * h - 1.0) * std::pow(params.alpha / h, 2.0 * (1.0 - h));
  decay_ = params.alpha * (1.0 - h) / h;
}

double KernelSpec::operator()(double x) const {
  if (x == 0.0) throw DomainError("kernel is singular at x = 0; use singular quadrature");
  const double ax = std::abs(x);
  const double b = params_.alpha / params_.hurst;
  return c_ * std::exp(-decay_ * ax) * std::pow(-std::expm1(-b * ax), exponent());
}

double KernelSpec::regular(double x) const {
  const double ax = std::abs(x);
  const double b = params_.alpha / params_.hurst;
  const double ratio = ax > 0.0 ? -std::expm1(-b * ax) / ax : b;
  return c_ * std::exp(-decay_ * ax) * std::pow(ratio, exponent());
}

double c_const(const ModelParams& params) { return KernelSpec(params).c(); }

double kernel_eval(const KernelSpec& spec, double x) { return spec(x); }

QuadResult kernel_integral(const ModelParams& params, const QuadratureConfig& quad) {
  const KernelSpec k(params);
  const double b = params.alpha / params.hurst;
  const double c = k.decay_rate();
  auto tail_bound = [&](double x) {
    return k.c() * std::pow(-std::expm1(-b * x), k.exponent()) * std::exp(-c * x) / c;
  };
  double cut = std::max(2.0, std::log(10.0 * k.c() / (c * quad.abs_tol)) / c);
  while (tail_bound(cut) > quad.abs_tol / 10.0) cut *= 1.5;
  const QuadratureConfig half = quad.scaled(0.5);
  QuadResult r = integrate_power_left([&](double x) { return k.regular(x); }, 0.0, 1.0,
                                      k.exponent(), half) +
                 integrate([&](double x) { return k(x); }, 1.0, cut, half);
  r.error += tail_bound(cut);
  return r;
}

QuadResult kernel_ramp(const ModelParams& params, double length, const QuadratureConfig& quad) {
  require_nonnegative(length, "kernel_ramp");
  const KernelSpec k(params);
  if (length == 0.0) return {};
  const double split = std::min(length, 1.0);
  const QuadratureConfig half = quad.scaled(0.5);
  QuadResult r = integrate_power_left([&](double x) { return (length - x) * k.regular(x); }, 0.0,
                                      split, k.exponent(), half);
  if (length > split) {
    r += integrate([&](double x) { return (length - x) * k(x); }, split, length, half);
  }
  return r;
}

QuadResult y_increment_cov(const ModelParams& params, double t1, double t2, double s1, double s2,
                           const QuadratureConfig& quad) {
  const KernelSpec k(params);
  if (!(t2 > t1) || !(s2 > s1)) throw UsageError("y_increment_cov: windows must have t2 > t1, s2 > s1");
  return integrate_diagonal_singular([&](double u, double v) { return k.regular(u - v); }, t1, t2,
                                     s1, s2, k.exponent(), quad);
}

QuadResult y_var(const ModelParams& params, double t, const QuadratureConfig& quad) {
  return scale(kernel_ramp(params, t, quad), 2.0);
}

QuadResult y_cov(const ModelParams& params, double s, double t, const QuadratureConfig& quad) {
  require_nonnegative(s, "y_cov");
  require_nonnegative(t, "y_cov");
  const double lo = std::min(s, t);
  const double hi = std::max(s, t);
  QuadResult diff = kernel_ramp(params, hi - lo, quad);
  QuadResult r = kernel_ramp(params, hi, quad) + kernel_ramp(params, lo, quad);
  r.value -= diff.value;
  r.error += diff.error;
  r.evaluations += diff.evaluations;
  return r;
}

QuadResult y_cov_limit(const ModelParams& params, double s, const QuadratureConfig& quad) {
  require_nonnegative(s, "y_cov_limit");
  return scale(kernel_integral(params, quad), s) + kernel_ramp(params, s, quad);
}

QuadResult rho_y(const ModelParams& params, std::size_t n, const QuadratureConfig& quad) {
  const double nn = static_cast<double>(n);
  return y_increment_cov(params, nn, nn + 1.0, 0.0, 1.0, quad);
}

double rho_y_scaled_limit(const ModelParams& params) {
  const KernelSpec k(params);
  const double c = k.decay_rate();
  return k.c() * (-std::expm1(-c)) * std::expm1(c) / (c * c);
}

QuadResult ud_cov(const ModelParams& params, double s, double t, const TruncationPolicy& trunc,
                  const QuadratureConfig& quad) {
  params.validate();
  params.require_kernel_regime();
  if (!std::isfinite(s) || !std::isfinite(t)) throw DomainError("ud_cov: times must be finite");
  const double h = params.hurst;
  const double gamma = params.gamma;
  const double lo = std::min(s, t);
  // |Cov error| <= 3 sup Var(U) e^{-gamma (min(s,t) - cutoff)}, sup Var(U) <= H^{2H} (2 + 1/gamma)^2.
  const double var_bound = std::pow(h, 2.0 * h) * std::pow(2.0 + 1.0 / gamma, 2.0);
  auto tail = [&](double cutoff) { return 3.0 * var_bound * std::exp(-gamma * (lo - cutoff)); };
  if (!(trunc.tolerance > 0.0) || !std::isfinite(trunc.tolerance)) {
    throw ConfigError("truncation tolerance must be a positive finite number");
  }
  double cutoff = lo - std::log(3.0 * var_bound / trunc.tolerance) / gamma;
  if (trunc.lower_cutoff) {
    cutoff = *trunc.lower_cutoff;
    if (tail(cutoff) > trunc.tolerance) {
      std::ostringstream os;
      os << "lower_cutoff " << cutoff << " leaves a tail bound of " << tail(cutoff)
         << " > tolerance " << trunc.tolerance;
      throw ConfigError(os.str());
    }
  }
  if (!(cutoff < lo)) throw ConfigError("ud_cov: cutoff must lie below min(s, t)");
  if ((lo - cutoff) * gamma > 700.0) {
    throw ConfigError("ud_cov: truncation tolerance is unreachable in floating point");
  }

  const double prefactor = h * (2.0 * h - 1.0) * std::pow(h, 2.0 * h - 2.0);
  const double up = gamma + 1.0 - 1.0 / h;
  const double down = gamma - 1.0 + 1.0 / h;
  const double q = 2.0 * h - 2.0;
  const Integrand2 g = [&](double u, double v) {
    const double hi = std::max(u, v);
    const double lo_uv = std::min(u, v);
    const double d = hi - lo_uv;
    const double ratio = d > 0.0 ? -std::expm1(-d / h) / d : 1.0 / h;
    return prefactor * std::exp(up * hi + down * lo_uv - gamma * (t + s)) * std::pow(ratio, q);
  };
  QuadResult r = integrate_diagonal_singular(g, cutoff, t, cutoff, s, q, quad);
  r.error += tail(cutoff);
  return r;
}

double ud_var_closed_form(const ModelParams& params) {
  params.validate();
  params.require_kernel_regime();
  const double h = params.hurst;
  const double gamma = params.gamma;
  return std::pow(h, 2.0 * h) * (2.0 * h - 1.0) * beta_function(1.0 + (gamma - 1.0) * h, 2.0 * h - 1.0) /
         gamma;
}

double beta_function(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("Beta needs positive arguments");
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

KappaSigma kappa_sigma(const ModelParams& params) {
  const KernelSpec k(params);
  const double h = params.hurst;
  const double kappa = 2.0 * k.c() * (h / params.alpha) * beta_function(1.0 - h, 2.0 * h - 1.0);
  return {kappa, std::sqrt(kappa)};
}

QuadResult scaled_y_cov(const ModelParams& params, double a, double s, double t,
                        const QuadratureConfig& quad) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("scaled_y_cov: a must be > 0");
  return scale(y_cov(params, a * s, a * t, quad), 1.0 / a);
}

std::vector<TableRow> tabulate(const std::function<QuadResult(double)>& f,
                               const std::vector<double>& xs) {
  std::vector<TableRow> rows;
  rows.reserve(xs.size());
  for (double x : xs) {
    const QuadResult r = f(x);
    rows.push_back({x, r.value, r.error});
  }
  return rows;
}

}  // namespace fou
