#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fou/fbm.hpp"
#include "fou/types.hpp"

namespace fou {

/// Exponential time change a(t) = (H / alpha) exp(alpha t / H).
///
/// At H = 1/2 this is exp(2 alpha t) / (2 alpha), the Brownian Doob clock.
struct TimeChange {
  double hurst;
  double alpha;

  explicit TimeChange(const ModelParams& p) : hurst(p.hurst), alpha(p.alpha) {}
  TimeChange(double h, double a) : hurst(h), alpha(a) {}

  /// Throws DomainError naming `t` if a(t) overflows.
  double operator()(double t) const;
  double log_value(double t) const;
};

/// Finite realization of an integral over (-inf, t].
///
/// When `lower_cutoff` is empty it is derived from `tolerance` so that the
/// standard deviation of the discarded part is at most `tolerance`.
struct TruncationPolicy {
  std::optional<double> lower_cutoff;
  double tolerance = 1e-8;
};

/// Stationary covariance of e^{-alpha t} Z_{a(t)}, built from fbm_cov
/// pieces in log space. Used as the Gram kernel of the Doob sampler.
double doob_gram_entry(const ModelParams& params, double s, double t);

/// Exact sampler of X^(D,alpha) on an arbitrary real grid.
GridSampler make_doob_sampler(const ModelParams& params, const TimeGrid& grid);

/// X_t = e^{-alpha t} Z_{a(t)} on `grid` (negative times allowed).
Ensemble doob_transform(const ModelParams& params, const TimeGrid& grid, std::uint64_t seed,
                        std::size_t count);

/// Stationary classical OU with rate alpha (Doob transform at H = 1/2).
Ensemble ou_process(double alpha, const TimeGrid& grid, std::uint64_t seed, std::size_t count);

/// Y^(alpha) on a grid starting at 0, through
/// Y_t = X_t - X_0 + alpha * int_0^t X_s ds with X the Doob transform,
/// trapezoid quadrature on a `refinement`-fold refined grid.
Ensemble y_process(const ModelParams& params, const TimeGrid& grid, std::uint64_t seed,
                   std::size_t count, std::size_t refinement = 8);

/// {alpha^H Y^(alpha)_{t/alpha}} on the grid {alpha t_i}; equal in law to Y^(1).
Ensemble rescale_y(const Ensemble& y);

/// Solution of dU = -rate U dt + dW with U at the first grid time equal to x0.
///
/// U_t = e^{-rate t} x0 + W_t - rate int_0^t e^{-rate (t-s)} W_s ds with the
/// integral done by trapezoid on the driver grid, keeping the exponential
/// weight exact between grid points so that steps with rate * h > 1 stay
/// accurate. Times are measured from the first grid point, where the driver
/// must be 0.
SamplePath langevin_solve(const SamplePath& driver, double rate, double x0);

enum class Fou1Init { Zero, StationaryTruncated };
enum class Fou2Method { LangevinOnY, DirectTransform };

/// Standard deviation of the part of int_{-inf}^0 e^{alpha s} dZhat_s below `cutoff`.
double fou1_truncation_bound(const ModelParams& params, double cutoff);
/// Bound on the standard deviation of the part of
/// int_{-inf}^0 e^{(gamma-1) s} dZ_{a(s)} below `cutoff` (alpha = 1).
double fou2_truncation_bound(const ModelParams& params, double cutoff);

/// Cutoffs satisfying the policy; ConfigError if the tolerance is unreachable.
double resolve_fou1_cutoff(const ModelParams& params, const TruncationPolicy& policy);
double resolve_fou2_cutoff(const ModelParams& params, const TruncationPolicy& policy);

/// Past grid on [cutoff, 0]: u(r) = log(1 - c r) / c at r = 0, step, 2 step, ...
/// ending exactly at cutoff, with c = rate / (H + 1/2). Spacing starts at
/// `step` near 0 and widens where the exponential weight is negligible.
/// Halving `step` yields a superset of the points.
std::vector<double> stretched_past_grid(double cutoff, double step, double rate, double hurst);

/// U^(Z,alpha): Langevin driven by FBM, either from 0 or stationary with the
/// initial value taken from a stationary-increment two-sided FBM shared with
/// the path.
Ensemble fou1_path(const ModelParams& params, const TimeGrid& grid, std::uint64_t seed,
                   std::size_t count, Fou1Init init, const TruncationPolicy& trunc = {},
                   std::size_t refinement = 8);

/// Grid layout shared by both fOU-2 constructions.
struct Fou2Layout {
  TimeGrid full;                        // cutoff ... 0 ... t_max
  std::size_t zero_index = 0;           // index of t = 0 in `full`
  std::vector<std::size_t> user_index;  // user grid points inside `full`
};

Fou2Layout fou2_layout(const ModelParams& params, const TimeGrid& grid,
                       const TruncationPolicy& trunc, std::size_t refinement);

/// U^(D,gamma) on full[zero_index..] from one X^(D,1) sample on the full grid.
std::vector<double> fou2_from_doob_sample(const ModelParams& params, const TimeGrid& full,
                                          std::size_t zero_index, std::span<const double> x,
                                          Fou2Method method);

/// U^(D,gamma): Langevin driven by Y^(1), stationary. Both methods consume the
/// same X^(D,1) sample for a given seed.
Ensemble fou2_path(const ModelParams& params, const TimeGrid& grid, std::uint64_t seed,
                   std::size_t count, Fou2Method method, const TruncationPolicy& trunc = {},
                   std::size_t refinement = 8);

}  // namespace fou
