#include "fou/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fou/errors.hpp"

namespace fou {

void ModelParams::validate() const {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    std::ostringstream os;
    os << "hurst must satisfy 0 < H < 1, got " << hurst;
    throw DomainError(os.str());
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    std::ostringstream os;
    os << "alpha must be > 0, got " << alpha;
    throw DomainError(os.str());
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    std::ostringstream os;
    os << "gamma must be > 0, got " << gamma;
    throw DomainError(os.str());
  }
}

void ModelParams::require_kernel_regime() const {
  validate();
  if (!(hurst > 0.5)) {
    std::ostringstream os;
    os << "kernel representation requires 1/2 < H < 1, got H = " << hurst;
    throw DomainError(os.str());
  }
}

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty()) throw UsageError("time grid must contain at least one point");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i])) throw UsageError("time grid contains a non-finite time");
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      std::ostringstream os;
      os << "time grid must be strictly increasing (index " << i << ")";
      throw UsageError(os.str());
    }
  }
}

TimeGrid TimeGrid::uniform(double t0, double t1, std::size_t steps) {
  if (steps == 0 || !(t1 > t0)) throw UsageError("uniform grid needs t1 > t0 and steps >= 1");
  std::vector<double> t(steps + 1);
  const double h = (t1 - t0) / static_cast<double>(steps);
  for (std::size_t i = 0; i <= steps; ++i) t[i] = t0 + h * static_cast<double>(i);
  t.back() = t1;
  return TimeGrid(std::move(t));
}

bool TimeGrid::is_uniform(double rel_tol) const {
  if (times_.size() < 3) return true;
  const double h = (times_.back() - times_.front()) / static_cast<double>(times_.size() - 1);
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (std::abs((times_[i] - times_[i - 1]) - h) > rel_tol * h) return false;
  }
  return true;
}

std::optional<std::size_t> TimeGrid::index_of(double t) const {
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  std::optional<std::size_t> best;
  double best_d = tol;
  for (auto cand : {it, it == times_.begin() ? it : std::prev(it)}) {
    if (cand == times_.end()) continue;
    const double d = std::abs(*cand - t);
    if (d <= best_d) {
      best_d = d;
      best = static_cast<std::size_t>(cand - times_.begin());
    }
  }
  return best;
}

TimeGrid TimeGrid::refined(std::size_t factor) const {
  if (factor == 0) throw UsageError("refinement factor must be >= 1");
  if (factor == 1 || times_.size() < 2) return *this;
  std::vector<double> t;
  t.reserve((times_.size() - 1) * factor + 1);
  for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
    const double h = (times_[i + 1] - times_[i]) / static_cast<double>(factor);
    for (std::size_t j = 0; j < factor; ++j) t.push_back(times_[i] + h * static_cast<double>(j));
  }
  t.push_back(times_.back());
  return TimeGrid(std::move(t));
}

std::string_view to_string(ProcessTag tag) {
  switch (tag) {
    case ProcessTag::FBM: return "fbm";
    case ProcessTag::XD: return "xd";
    case ProcessTag::Y: return "y";
    case ProcessTag::FOU1: return "fou1";
    case ProcessTag::FOU2: return "fou2";
    case ProcessTag::OU: return "ou";
  }
  return "unknown";
}

std::optional<ProcessTag> parse_process_tag(std::string_view name) {
  for (auto tag : {ProcessTag::FBM, ProcessTag::XD, ProcessTag::Y, ProcessTag::FOU1,
                   ProcessTag::FOU2, ProcessTag::OU}) {
    if (to_string(tag) == name) return tag;
  }
  return std::nullopt;
}

Ensemble::Ensemble(ModelParams params, TimeGrid grid, std::uint64_t seed, ProcessTag tag,
                   std::size_t count)
    : params_(params), grid_(std::move(grid)), seed_(seed), tag_(tag), count_(count) {
  if (count_ == 0) throw UsageError("an ensemble needs at least one path");
  values_.assign(count_ * grid_.size(), 0.0);
}

SamplePath Ensemble::sample_path(std::size_t i) const {
  auto p = path(i);
  return SamplePath{grid_, std::vector<double>(p.begin(), p.end())};
}

std::vector<double> Ensemble::column(std::size_t k) const {
  std::vector<double> out(count_);
  for (std::size_t i = 0; i < count_; ++i) out[i] = values_[i * width() + k];
  return out;
}

void Ensemble::reset(TimeGrid grid, std::vector<double> values, ProcessTag tag) {
  if (values.size() != count_ * grid.size()) throw UsageError("ensemble reset: size mismatch");
  grid_ = std::move(grid);
  values_ = std::move(values);
  tag_ = tag;
}

double CovMatrix::max_diagonal() const {
  return entries.size() == 0 ? 0.0 : entries.diagonal().maxCoeff();
}

double CovMatrix::min_eigenvalue() const {
  if (entries.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(entries, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace fou
