#include "fou/rng.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>
#include <vector>

namespace fou {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

PathStream::PathStream(std::uint64_t seed, std::uint64_t path_index)
    : key_(mix64(seed ^ mix64(path_index * kGolden + 0x632BE59BD9B4E019ULL))) {}

PathStream::result_type PathStream::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double PathStream::uniform() {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  const std::uint64_t k = (*this)() >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double PathStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(phi);
  has_cached_ = true;
  return r * std::cos(phi);
}

void PathStream::fill_normal(std::span<double> out) {
  for (double& v : out) v = normal();
}

std::size_t worker_count() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

void for_each_path(std::size_t count, std::uint64_t seed,
                   const std::function<void(std::size_t, PathStream&)>& fn) {
  const std::size_t workers = std::min(worker_count(), count);
  auto run_one = [&](std::size_t i) {
    PathStream stream(seed, i);
    fn(i, stream);
  };
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) run_one(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          run_one(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace fou
