#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>

#include <Eigen/Dense>

#include "fou/rng.hpp"
#include "fou/types.hpp"

namespace fou {

/// E(Z_s Z_t) = (t^2H + s^2H - |t-s|^2H) / 2 for s, t >= 0.
///
/// Evaluated as (s^2H + t^2H (1 - (1 - s/t)^2H)) / 2 with s <= t so that
/// widely separated times do not cancel catastrophically.
double fbm_cov(const ModelParams& params, double s, double t);

/// E((Z_t2 - Z_t1)(Z_s2 - Z_s1)); zero for a degenerate window.
double fbm_increment_cov(const ModelParams& params, double t1, double t2, double s1, double s2);

/// Autocovariance of unit-step fractional Gaussian noise at lag n.
double fgn_autocov(const ModelParams& params, std::size_t n);

/// Gram matrix of fbm_cov; throws NumericalError if it is not PSD within
/// -1e-8 x max diagonal.
CovMatrix build_cov_matrix(const ModelParams& params, const TimeGrid& grid);

/// Cholesky factor of a covariance matrix with escalating diagonal jitter.
class GaussianFactor {
 public:
  /// Jitter starts at 1e-12 x max diagonal and grows x10 up to 1e-8; after
  /// that a NumericalError carrying the most negative eigenvalue is thrown.
  static GaussianFactor factorize(const Eigen::MatrixXd& cov);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(lower_.rows()); }
  double jitter() const noexcept { return jitter_; }
  const Eigen::MatrixXd& lower() const noexcept { return lower_; }

  /// Writes L z for dim() fresh standard normals drawn from `stream`.
  void sample(PathStream& stream, std::span<double> out) const;

 private:
  GaussianFactor(Eigen::MatrixXd lower, double jitter) : lower_(std::move(lower)), jitter_(jitter) {}
  Eigen::MatrixXd lower_;
  double jitter_ = 0.0;
};

using CovFunction = std::function<double(double, double)>;

/// Exact sampler for a centered Gaussian process on an arbitrary grid.
///
/// Grid points for which `pinned` returns true are fixed at 0 and left out
/// of the factorized matrix.
class GridSampler {
 public:
  GridSampler(const TimeGrid& grid, const CovFunction& cov,
              const std::function<bool(double)>& pinned = {});

  const TimeGrid& grid() const noexcept { return grid_; }
  void sample(PathStream& stream, std::span<double> out) const;

 private:
  TimeGrid grid_;
  std::vector<std::size_t> free_index_;
  std::unique_ptr<GaussianFactor> factor_;
};

/// Exact FBM paths by Cholesky factorization. Grid times must be >= 0; a
/// point at t = 0 is pinned to Z_0 = 0.
Ensemble sample_fbm_cholesky(const ModelParams& params, const TimeGrid& grid,
                             std::uint64_t seed, std::size_t count);

/// Davies-Harte circulant embedding for unit-step fractional Gaussian noise.
class CirculantFgn {
 public:
  /// `n` must be a power of two, n >= 2.
  CirculantFgn(const ModelParams& params, std::size_t n);
  ~CirculantFgn();
  CirculantFgn(const CirculantFgn&) = delete;
  CirculantFgn& operator=(const CirculantFgn&) = delete;

  std::size_t size() const noexcept { return n_; }
  /// Smallest eigenvalue of the 2n circulant; embedding is exact iff >= 0.
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }
  bool valid() const noexcept { return valid_; }

  /// Writes n fGN values (lag-0 variance 1). Requires valid().
  void sample(PathStream& stream, std::span<double> out) const;

 private:
  struct Plan;
  std::size_t n_;
  std::vector<double> sqrt_lambda_;
  double min_eigenvalue_ = 0.0;
  bool valid_ = false;
  std::unique_ptr<Plan> plan_;
};

/// FBM on {dt, 2dt, ..., n dt} from cumulative circulant fGN scaled by dt^H.
/// Falls back to Cholesky (with a warning on the ensemble) if the embedding
/// has a negative eigenvalue.
Ensemble sample_fgn_circulant(const ModelParams& params, std::size_t n, double dt,
                              std::uint64_t seed, std::size_t count);

enum class TwoSidedConstruction {
  /// Independent one-sided copies for t < 0 and t > 0.
  IndependentHalves,
  /// Stationary increments on all of R: (|s|^2H + |t|^2H - |t-s|^2H) / 2.
  StationaryIncrements,
};

/// Covariance of two-sided FBM under the given construction.
double two_sided_fbm_cov(const ModelParams& params, double s, double t,
                         TwoSidedConstruction construction);

/// Two-sided FBM through 0; the value at t = 0 is exactly 0.
Ensemble sample_two_sided_fbm(
    const ModelParams& params, const TimeGrid& grid, std::uint64_t seed, std::size_t count,
    TwoSidedConstruction construction = TwoSidedConstruction::IndependentHalves);

}  // namespace fou
