#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>

namespace fou {

/// Counter-based random stream keyed by (seed, path index).
///
/// The k-th output is a SplitMix64 finalizer applied to key + k * golden, so a
/// path's stream depends only on its key and never on which worker produced it.
/// Satisfies UniformRandomBitGenerator.
class PathStream {
 public:
  using result_type = std::uint64_t;

  PathStream(std::uint64_t seed, std::uint64_t path_index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller; the second variate of a pair is cached.
  double normal();
  void fill_normal(std::span<double> out);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t mix64(std::uint64_t x);

/// Runs `fn(path_index, stream)` for every path on a fixed worker pool.
///
/// Each path owns its stream, so output does not depend on the schedule.
void for_each_path(std::size_t count, std::uint64_t seed,
                   const std::function<void(std::size_t, PathStream&)>& fn);

/// Worker count used by for_each_path (hardware concurrency, at least 1).
std::size_t worker_count();

}  // namespace fou
