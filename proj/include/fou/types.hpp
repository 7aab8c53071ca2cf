#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace fou {

/// Hurst exponent and mean-reversion rates shared by every process.
struct ModelParams {
  double hurst = 0.75;
  double alpha = 1.0;
  double gamma = 1.0;

  /// Throws DomainError unless 0 < hurst < 1, alpha > 0, gamma > 0.
  void validate() const;
  /// Kernel representations need 1/2 < H < 1; throws DomainError otherwise.
  void require_kernel_regime() const;
};

/// Strictly increasing, finite sample times.
class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> times);

  /// `steps` equal intervals on [t0, t1], i.e. steps + 1 points.
  static TimeGrid uniform(double t0, double t1, std::size_t steps);

  std::span<const double> times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  double operator[](std::size_t i) const { return times_[i]; }
  double front() const { return times_.front(); }
  double back() const { return times_.back(); }

  /// Equal spacing up to a relative tolerance on the step.
  bool is_uniform(double rel_tol = 1e-10) const;
  /// Index of `t` if it lies on the grid (relative tolerance 1e-9).
  std::optional<std::size_t> index_of(double t) const;
  /// Subdivides every interval into `factor` equal pieces.
  TimeGrid refined(std::size_t factor) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  std::vector<double> times_;
};

/// One realization on a grid.
struct SamplePath {
  TimeGrid grid;
  std::vector<double> values;
};

enum class ProcessTag { FBM, XD, Y, FOU1, FOU2, OU };

std::string_view to_string(ProcessTag tag);
std::optional<ProcessTag> parse_process_tag(std::string_view name);

/// A seeded collection of paths sharing one grid, stored row-major.
class Ensemble {
 public:
  Ensemble(ModelParams params, TimeGrid grid, std::uint64_t seed, ProcessTag tag,
           std::size_t count);

  const ModelParams& params() const noexcept { return params_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  std::uint64_t seed() const noexcept { return seed_; }
  ProcessTag tag() const noexcept { return tag_; }
  std::size_t count() const noexcept { return count_; }
  std::size_t width() const noexcept { return grid_.size(); }

  std::span<double> path(std::size_t i) {
    return {values_.data() + i * width(), width()};
  }
  std::span<const double> path(std::size_t i) const {
    return {values_.data() + i * width(), width()};
  }
  SamplePath sample_path(std::size_t i) const;

  /// Values of every path at grid index `k`.
  std::vector<double> column(std::size_t k) const;

  const std::vector<double>& values() const noexcept { return values_; }

  /// Non-fatal notes, e.g. a sampler fallback.
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  /// Replaces grid and values; used by pathwise transformations.
  void reset(TimeGrid grid, std::vector<double> values, ProcessTag tag);

 private:
  ModelParams params_;
  TimeGrid grid_;
  std::uint64_t seed_;
  ProcessTag tag_;
  std::size_t count_;
  std::vector<double> values_;
  std::vector<std::string> warnings_;
};

/// Symmetric Gram matrix of a covariance function on a grid.
struct CovMatrix {
  TimeGrid grid;
  Eigen::MatrixXd entries;

  double max_diagonal() const;
  double min_eigenvalue() const;
};

}  // namespace fou
