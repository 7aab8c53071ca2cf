#include "fou/fbm.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <sstream>

#include "fou/errors.hpp"

namespace fou {

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

double pow2h(double x, double hurst) { return x == 0.0 ? 0.0 : std::pow(x, 2.0 * hurst); }

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

}  // namespace

double fbm_cov(const ModelParams& params, double s, double t) {
  if (s < 0.0 || t < 0.0) {
    std::ostringstream os;
    os << "fbm_cov is defined for nonnegative times only (s = " << s << ", t = " << t << ")";
    throw DomainError(os.str());
  }
  const double lo = std::min(s, t);
  const double hi = std::max(s, t);
  if (hi == 0.0) return 0.0;
  const double h2 = 2.0 * params.hurst;
  // 1 - (1 - lo/hi)^2H without cancellation
  const double tail = -std::expm1(h2 * std::log1p(-lo / hi));
  return 0.5 * (pow2h(lo, params.hurst) + pow2h(hi, params.hurst) * tail);
}

double fbm_increment_cov(const ModelParams& params, double t1, double t2, double s1, double s2) {
  if (t1 < 0.0 || t2 < 0.0 || s1 < 0.0 || s2 < 0.0) {
    throw DomainError("fbm_increment_cov: times must be nonnegative");
  }
  if (t2 < t1 || s2 < s1) throw DomainError("fbm_increment_cov: windows must satisfy t2 >= t1, s2 >= s1");
  if (t1 == t2 || s1 == s2) return 0.0;
  const double h = params.hurst;
  return 0.5 * ((pow2h(std::abs(t2 - s1), h) - pow2h(std::abs(t1 - s1), h)) -
                pow2h(std::abs(t2 - s2), h) + pow2h(std::abs(t1 - s2), h));
}

double fgn_autocov(const ModelParams& params, std::size_t n) {
  const double h = params.hurst;
  const double x = static_cast<double>(n);
  // same operation order as fbm_increment_cov(n, n + 1, 0, 1)
  return 0.5 * ((pow2h(x + 1.0, h) - pow2h(x, h)) - pow2h(x, h) + pow2h(std::abs(x - 1.0), h));
}

CovMatrix build_cov_matrix(const ModelParams& params, const TimeGrid& grid) {
  params.validate();
  if (grid.empty()) throw UsageError("build_cov_matrix: empty grid");
  if (grid.front() < 0.0) throw DomainError("build_cov_matrix: grid times must be >= 0");
  const auto n = static_cast<Eigen::Index>(grid.size());
  CovMatrix cm{grid, Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = fbm_cov(params, grid[static_cast<std::size_t>(i)],
                               grid[static_cast<std::size_t>(j)]);
      cm.entries(i, j) = v;
      cm.entries(j, i) = v;
    }
  }
  const double lam = cm.min_eigenvalue();
  if (lam < -1e-8 * cm.max_diagonal()) {
    std::ostringstream os;
    os << "FBM Gram matrix is not positive semidefinite (min eigenvalue " << lam << ")";
    throw NumericalError(os.str(), lam);
  }
  return cm;
}

GaussianFactor GaussianFactor::factorize(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols()) throw UsageError("covariance matrix must be square");
  const double max_diag = cov.size() == 0 ? 0.0 : cov.diagonal().maxCoeff();
  if (cov.size() == 0) return GaussianFactor(Eigen::MatrixXd(0, 0), 0.0);
  if (!(max_diag > 0.0)) throw NumericalError("covariance matrix has no positive diagonal entry", 0.0);
  const Eigen::Index n = cov.rows();
  for (double rel = 1e-12; rel <= 1e-8 * (1.0 + 1e-9); rel *= 10.0) {
    const double jitter = rel * max_diag;
    Eigen::MatrixXd work = cov;
    work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd lower = llt.matrixL();
      if (lower.allFinite()) return GaussianFactor(std::move(lower), jitter);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
  const double lam = es.eigenvalues().minCoeff();
  std::ostringstream os;
  os << "Cholesky factorization failed after jitter up to 1e-8 x max diagonal (n = " << n
     << ", most negative eigenvalue " << lam << ")";
  throw NumericalError(os.str(), lam);
}

void GaussianFactor::sample(PathStream& stream, std::span<double> out) const {
  const auto n = lower_.rows();
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = stream.normal();
  Eigen::Map<Eigen::VectorXd> o(out.data(), n);
  o.noalias() = lower_.triangularView<Eigen::Lower>() * z;
}

GridSampler::GridSampler(const TimeGrid& grid, const CovFunction& cov,
                         const std::function<bool(double)>& pinned)
    : grid_(grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(pinned && pinned(grid[i]))) free_index_.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(free_index_.size());
  Eigen::MatrixXd c(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = cov(grid[free_index_[static_cast<std::size_t>(i)]],
                           grid[free_index_[static_cast<std::size_t>(j)]]);
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  factor_ = std::make_unique<GaussianFactor>(GaussianFactor::factorize(c));
}

void GridSampler::sample(PathStream& stream, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (free_index_.empty()) return;
  std::vector<double> tmp(free_index_.size());
  factor_->sample(stream, tmp);
  for (std::size_t k = 0; k < free_index_.size(); ++k) out[free_index_[k]] = tmp[k];
}

Ensemble sample_fbm_cholesky(const ModelParams& params, const TimeGrid& grid, std::uint64_t seed,
                             std::size_t count) {
  params.validate();
  if (grid.empty()) throw UsageError("sample_fbm_cholesky: empty grid");
  if (grid.front() < 0.0) {
    throw DomainError("sample_fbm_cholesky: grid times must be >= 0 (use sample_two_sided_fbm)");
  }
  GridSampler sampler(grid, [&](double s, double t) { return fbm_cov(params, s, t); },
                      [](double t) { return t == 0.0; });
  Ensemble ens(params, grid, seed, ProcessTag::FBM, count);
  for_each_path(count, seed, [&](std::size_t i, PathStream& rng) { sampler.sample(rng, ens.path(i)); });
  return ens;
}

struct CirculantFgn::Plan {
  fftw_plan plan = nullptr;
  std::size_t m = 0;
};

CirculantFgn::CirculantFgn(const ModelParams& params, std::size_t n) : n_(n) {
  params.validate();
  if (!is_power_of_two(n)) {
    std::ostringstream os;
    os << "circulant sampler requires n to be a power of two >= 2, got " << n;
    throw UsageError(os.str());
  }
  const std::size_t m = 2 * n;
  fftw_complex* in = fftw_alloc_complex(m);
  fftw_complex* out = fftw_alloc_complex(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t lag = k <= n ? k : m - k;
    in[k][0] = fgn_autocov(params, lag);
    in[k][1] = 0.0;
  }
  plan_ = std::make_unique<Plan>();
  plan_->m = m;
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_plan eig = fftw_plan_dft_1d(static_cast<int>(m), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(eig);
    fftw_destroy_plan(eig);
    plan_->plan = fftw_plan_dft_1d(static_cast<int>(m), in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  sqrt_lambda_.resize(m);
  double lam_max = 0.0;
  min_eigenvalue_ = out[0][0];
  for (std::size_t k = 0; k < m; ++k) {
    lam_max = std::max(lam_max, out[k][0]);
    min_eigenvalue_ = std::min(min_eigenvalue_, out[k][0]);
  }
  // rounding-level negatives are zero eigenvalues
  const double floor_tol = 1e-12 * lam_max;
  valid_ = min_eigenvalue_ >= -floor_tol;
  for (std::size_t k = 0; k < m; ++k) {
    const double lam = std::max(out[k][0], 0.0);
    sqrt_lambda_[k] = std::sqrt(lam / static_cast<double>(m));
  }
  fftw_free(in);
  fftw_free(out);
}

CirculantFgn::~CirculantFgn() {
  if (plan_ && plan_->plan) {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_->plan);
  }
}

void CirculantFgn::sample(PathStream& stream, std::span<double> out) const {
  if (!valid_) throw NumericalError("circulant embedding has a negative eigenvalue", min_eigenvalue_);
  if (out.size() < n_) throw UsageError("CirculantFgn::sample: output too short");
  const std::size_t m = plan_->m;
  fftw_complex* in = fftw_alloc_complex(m);
  fftw_complex* res = fftw_alloc_complex(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double a = stream.normal();
    const double b = stream.normal();
    in[k][0] = sqrt_lambda_[k] * a;
    in[k][1] = sqrt_lambda_[k] * b;
  }
  fftw_execute_dft(plan_->plan, in, res);
  for (std::size_t k = 0; k < n_; ++k) out[k] = res[k][0];
  fftw_free(in);
  fftw_free(res);
}

Ensemble sample_fgn_circulant(const ModelParams& params, std::size_t n, double dt, std::uint64_t seed,
                              std::size_t count) {
  params.validate();
  if (!(dt > 0.0)) throw DomainError("sample_fgn_circulant: dt must be > 0");
  CirculantFgn fgn(params, n);
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = dt * static_cast<double>(k + 1);
  TimeGrid grid(std::move(t));
  if (!fgn.valid()) {
    Ensemble ens = sample_fbm_cholesky(params, grid, seed, count);
    std::ostringstream os;
    os << "circulant embedding had negative eigenvalue " << fgn.min_eigenvalue()
       << "; fell back to Cholesky";
    ens.add_warning(os.str());
    return ens;
  }
  const double scale = std::pow(dt, params.hurst);
  Ensemble ens(params, grid, seed, ProcessTag::FBM, count);
  for_each_path(count, seed, [&](std::size_t i, PathStream& rng) {
    auto row = ens.path(i);
    fgn.sample(rng, row);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      acc += row[k];
      row[k] = scale * acc;
    }
  });
  return ens;
}

double two_sided_fbm_cov(const ModelParams& params, double s, double t,
                         TwoSidedConstruction construction) {
  if (construction == TwoSidedConstruction::IndependentHalves) {
    if ((s < 0.0 && t > 0.0) || (s > 0.0 && t < 0.0)) return 0.0;
    return fbm_cov(params, std::abs(s), std::abs(t));
  }
  const double h = params.hurst;
  return 0.5 * (pow2h(std::abs(s), h) + pow2h(std::abs(t), h) - pow2h(std::abs(t - s), h));
}

Ensemble sample_two_sided_fbm(const ModelParams& params, const TimeGrid& grid, std::uint64_t seed,
                              std::size_t count, TwoSidedConstruction construction) {
  params.validate();
  if (grid.empty()) throw UsageError("sample_two_sided_fbm: empty grid");
  GridSampler sampler(
      grid, [&](double s, double t) { return two_sided_fbm_cov(params, s, t, construction); },
      [](double t) { return t == 0.0; });
  Ensemble ens(params, grid, seed, ProcessTag::FBM, count);
  for_each_path(count, seed, [&](std::size_t i, PathStream& rng) { sampler.sample(rng, ens.path(i)); });
  return ens;
}

}  // namespace fou
