#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fou/quadrature.hpp"
#include "fou/transforms.hpp"
#include "fou/types.hpp"

namespace fou {

/// Stationary OU covariance e^{-alpha |t-s|} / (2 alpha).
double ou_cov(double alpha, double s, double t);

/// Stationary covariance of the Doob transform X^(D,alpha), a function of |t-s|.
///
/// Evaluated in log space as
/// (H/alpha)^{2H} (e^{-a tau} + e^{a tau} (1 - (1 - e^{-a tau/H})^{2H})) / 2,
/// which avoids the cancellation of the three exponentials at large lags.
double xd_cov(const ModelParams& params, double s, double t);

/// Var of the stationary fOU of the first kind, by quadrature of
/// Gamma(2H+1) sin(pi H) / pi * alpha^{-2H} * int_0^inf x^{1-2H} / (1 + x^2) dx.
QuadResult fou1_stationary_variance(const ModelParams& params, const QuadratureConfig& quad = {});

/// Partial sum of the large-lag expansion of the stationary fOU-1 covariance:
/// 1/2 sum_{n=1}^{N} alpha^{-2n} prod_{k=0}^{2n-1} (2H - k) t^{2H-2n}.
/// Throws DomainError at H = 1/2.
double fou1_cov_asymptotic(const ModelParams& params, double t, int terms);

/// Kernel k(x) = C e^{-alpha (1-H) x / H} |1 - e^{-alpha x / H}|^{2H-2} of the
/// increments of Y^(alpha), C = H (2H-1) (alpha/H)^{2(1-H)}. Needs 1/2 < H < 1.
class KernelSpec {
 public:
  explicit KernelSpec(const ModelParams& params);

  const ModelParams& params() const noexcept { return params_; }
  double c() const noexcept { return c_; }
  /// Exponential decay rate alpha (1-H) / H.
  double decay_rate() const noexcept { return decay_; }
  /// Singularity exponent 2H - 2.
  double exponent() const noexcept { return 2.0 * params_.hurst - 2.0; }

  /// k(|x|); throws DomainError at x = 0.
  double operator()(double x) const;
  /// k(x) |x|^{2-2H}: bounded and smooth, tends to C (alpha/H)^{2H-2} at 0.
  double regular(double x) const;

 private:
  ModelParams params_;
  double c_;
  double decay_;
};

double c_const(const ModelParams& params);
double kernel_eval(const KernelSpec& spec, double x);

/// int_0^inf k, truncated where the analytic tail bound drops below abs_tol / 10;
/// the bound is added to the error.
QuadResult kernel_integral(const ModelParams& params, const QuadratureConfig& quad = {});

/// int_0^L (L - x) k(x) dx, so that E((Y_t - Y_s)^2) = 2 kernel_ramp(t - s).
QuadResult kernel_ramp(const ModelParams& params, double length, const QuadratureConfig& quad = {});

/// E((Y_t2 - Y_t1)(Y_s2 - Y_s1)) as a double integral of k(|u - v|).
QuadResult y_increment_cov(const ModelParams& params, double t1, double t2, double s1, double s2,
                           const QuadratureConfig& quad = {});

QuadResult y_var(const ModelParams& params, double t, const QuadratureConfig& quad = {});
/// E(Y_s Y_t) for s, t >= 0 (either order).
QuadResult y_cov(const ModelParams& params, double s, double t, const QuadratureConfig& quad = {});
/// lim_{t -> inf} E(Y_t Y_s) = s int_0^inf k + int_0^s (s - x) k(x) dx.
QuadResult y_cov_limit(const ModelParams& params, double s, const QuadratureConfig& quad = {});

/// E(Y_1 (Y_{n+1} - Y_n)).
QuadResult rho_y(const ModelParams& params, std::size_t n, const QuadratureConfig& quad = {});

/// Limit of e^{alpha (1-H) n / H} rho_y(n) as n grows.
double rho_y_scaled_limit(const ModelParams& params);

/// E(U_s U_t) for the fOU of the second kind (alpha = 1 in the time change).
///
/// Double integral over (-inf, t] x (-inf, s] truncated at a cutoff whose
/// discarded part is bounded by `trunc.tolerance`; the bound is added to the error.
QuadResult ud_cov(const ModelParams& params, double s, double t, const TruncationPolicy& trunc = {},
                  const QuadratureConfig& quad = {});

/// Closed form of Var U^(D,gamma) = H^{2H} (2H-1) Beta(1 + (gamma-1)H, 2H-1) / gamma.
double ud_var_closed_form(const ModelParams& params);

struct KappaSigma {
  double kappa;
  double sigma;
};

/// kappa = 2 C (H/alpha) Beta(1-H, 2H-1) and sigma = sqrt(kappa).
KappaSigma kappa_sigma(const ModelParams& params);

/// Beta function through log-Gamma.
double beta_function(double a, double b);

/// E(Y_{a s} Y_{a t}) / a.
QuadResult scaled_y_cov(const ModelParams& params, double a, double s, double t,
                        const QuadratureConfig& quad = {});

struct TableRow {
  double x;
  double value;
  double error;
};

/// Evaluates `f` at every x; exact formulas report error 0.
std::vector<TableRow> tabulate(const std::function<QuadResult(double)>& f,
                               const std::vector<double>& xs);

}  // namespace fou
