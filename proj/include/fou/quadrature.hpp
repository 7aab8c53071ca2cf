#pragma once

#include <cstddef>
#include <functional>

namespace fou {

/// Tolerances for adaptive quadrature.
struct QuadratureConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  std::size_t max_subdivisions = 2000;

  /// Exponent p of the substitution x = w^p that removes an x^{2H-2}
  /// endpoint singularity, p = 1 / (2H - 1).
  static double substitution_exponent(double hurst);

  /// Throws UsageError unless both tolerances are positive and finite.
  void validate() const;
  /// Same limits with both tolerances multiplied by `factor`.
  QuadratureConfig scaled(double factor) const;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;

  QuadResult& operator+=(const QuadResult& o) {
    value += o.value;
    error += o.error;
    evaluations += o.evaluations;
    return *this;
  }
};

inline QuadResult operator+(QuadResult a, const QuadResult& b) { return a += b; }

using Integrand = std::function<double(double)>;

/// Global adaptive Gauss-Kronrod (7/15) on [a, b].
///
/// Stops once the summed error estimate is below max(rel_tol |value|, abs_tol);
/// throws QuadratureError carrying the achieved estimate otherwise.
QuadResult integrate(const Integrand& f, double a, double b, const QuadratureConfig& cfg);

/// int_a^b g(x) (x - a)^q dx for q > -1 and g smooth, via x = a + w^{1/(q+1)}.
QuadResult integrate_power_left(const Integrand& g, double a, double b, double q,
                                const QuadratureConfig& cfg);

/// int_a^b g(x) (b - x)^q dx for q > -1 and g smooth.
QuadResult integrate_power_right(const Integrand& g, double a, double b, double q,
                                 const QuadratureConfig& cfg);

/// int_{d0}^{d1} g(d) d^q dd over distances 0 <= d0 < d1, substituted in d
/// even when d0 > 0 so nearly-singular ranges stay smooth.
QuadResult integrate_power_distance(const Integrand& g, double d0, double d1, double q,
                                    const QuadratureConfig& cfg);

using Integrand2 = std::function<double(double, double)>;

/// int_{a1}^{b1} int_{a2}^{b2} g(u, v) |u - v|^q dv du with g smooth and q > -1.
///
/// The inner integral is split at v = u and substituted in |u - v|; the outer
/// one is split wherever the inner result loses smoothness (the edges of the
/// second window) and graded towards every breakpoint.
QuadResult integrate_diagonal_singular(const Integrand2& g, double a1, double b1, double a2,
                                       double b2, double q, const QuadratureConfig& cfg);

}  // namespace fou
