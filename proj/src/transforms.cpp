#include "fou/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "fou/errors.hpp"

namespace fou {

namespace {

constexpr double kMaxLog = 700.0;

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 2;
  while (p < n) p <<= 1;
  return p;
}

void require_starts_at_zero(const TimeGrid& grid, const char* who) {
  if (grid.empty() || grid.front() != 0.0) {
    std::ostringstream os;
    os << who << ": grid must start at t = 0";
    throw UsageError(os.str());
  }
}

void require_refinement(std::size_t refinement) {
  if (refinement == 0) throw UsageError("refinement factor must be >= 1");
}

// Weights of int_0^1 e^{-x (1 - th)} f(th) dth for f linear between f(0) and f(1):
// {int_0^1 e^{-x v} v dv, int_0^1 e^{-x v} (1 - v) dv}.
std::pair<double, double> exp_trapezoid_weights(double x) {
  if (x < 1e-3) {
    return {0.5 - x / 3.0 + x * x / 8.0, 0.5 - x / 6.0 + x * x / 24.0};
  }
  const double mass = -std::expm1(-x) / x;
  const double w0 = (1.0 - std::exp(-x) * (1.0 + x)) / (x * x);
  return {w0, mass - w0};
}

// Variation of constants with int e^{-r (t - s)} W_s ds integrated by the
// trapezoid rule with the exponential weight kept exact (W linear per step):
// U_{k+1} = e^{-r h} U_k + (W_{k+1} - W_k) (1 - e^{-r h}) / (r h).
// Unlike the plain trapezoid it stays accurate when r h is large.
void langevin_recursion(std::span<const double> times, std::span<const double> w, double rate,
                        double x0, std::span<double> out) {
  out[0] = x0 + w[0];
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double x = rate * (times[k + 1] - times[k]);
    const double gain = x < 1e-8 ? 1.0 - 0.5 * x : -std::expm1(-x) / x;
    out[k + 1] = std::exp(-x) * out[k] + (w[k + 1] - w[k]) * gain;
  }
}

// J_k = int_{t_0}^{t_k} e^{-rate (t_k - u)} x_u du with the same weighting.
std::vector<double> discounted_integral(std::span<const double> t, std::span<const double> x,
                                        double rate) {
  std::vector<double> j(t.size(), 0.0);
  for (std::size_t k = 1; k < t.size(); ++k) {
    const double h = t[k] - t[k - 1];
    const auto [w0, w1] = exp_trapezoid_weights(rate * h);
    j[k] = std::exp(-rate * h) * j[k - 1] + h * (w0 * x[k - 1] + w1 * x[k]);
  }
  return j;
}

}  // namespace

double TimeChange::log_value(double t) const { return std::log(hurst / alpha) + alpha * t / hurst; }

double TimeChange::operator()(double t) const {
  const double la = log_value(t);
  if (la > kMaxLog) {
    std::ostringstream os;
    os << "time change a(t) overflows at t = " << t;
    throw DomainError(os.str());
  }
  return std::exp(la);
}

double doob_gram_entry(const ModelParams& params, double s, double t) {
  const TimeChange a(params);
  const double lo = std::min(s, t);
  const double hi = std::max(s, t);
  (void)a(hi);  // overflow check on the transformed grid
  const double la_lo = a.log_value(lo);
  const double la_hi = a.log_value(hi);
  const double h2 = 2.0 * params.hurst;
  const double tail = -std::expm1(h2 * std::log1p(-std::exp(la_lo - la_hi)));
  const double base = -params.alpha * (s + t);
  return 0.5 * (std::exp(h2 * la_lo + base) + std::exp(h2 * la_hi + base) * tail);
}

GridSampler make_doob_sampler(const ModelParams& params, const TimeGrid& grid) {
  params.validate();
  for (double t : grid.times()) (void)TimeChange(params)(t);
  return GridSampler(grid, [params](double s, double t) { return doob_gram_entry(params, s, t); });
}

Ensemble doob_transform(const ModelParams& params, const TimeGrid& grid, std::uint64_t seed,
                        std::size_t count) {
  const GridSampler sampler = make_doob_sampler(params, grid);
  Ensemble ens(params, grid, seed, ProcessTag::XD, count);
  for_each_path(count, seed, [&](std::size_t i, PathStream& rng) { sampler.sample(rng, ens.path(i)); });
  return ens;
}

Ensemble ou_process(double alpha, const TimeGrid& grid, std::uint64_t seed, std::size_t count) {
  const ModelParams p{0.5, alpha, 1.0};
  Ensemble ens = doob_transform(p, grid, seed, count);
  std::vector<double> v = ens.values();
  ens.reset(grid, std::move(v), ProcessTag::OU);
  return ens;
}

Ensemble y_process(const ModelParams& params, const TimeGrid& grid, std::uint64_t seed,
                   std::size_t count, std::size_t refinement) {
  require_starts_at_zero(grid, "y_process");
  require_refinement(refinement);
  const TimeGrid fine = grid.refined(refinement);
  const GridSampler sampler = make_doob_sampler(params, fine);
  const auto times = fine.times();
  const double alpha = params.alpha;
  Ensemble ens(params, grid, seed, ProcessTag::Y, count);
  for_each_path(count, seed, [&](std::size_t i, PathStream& rng) {
    std::vector<double> x(fine.size());
    sampler.sample(rng, x);
    auto row = ens.path(i);
    double integral = 0.0;
    row[0] = 0.0;
    for (std::size_t k = 1; k < fine.size(); ++k) {
      integral += 0.5 * (times[k] - times[k - 1]) * (x[k - 1] + x[k]);
      if (k % refinement == 0) row[k / refinement] = x[k] - x[0] + alpha * integral;
    }
  });
  return ens;
}

Ensemble rescale_y(const Ensemble& y) {
  if (y.tag() != ProcessTag::Y) {
    std::ostringstream os;
    os << "rescale_y expects a Y ensemble, got '" << to_string(y.tag()) << "'";
    throw UsageError(os.str());
  }
  const double alpha = y.params().alpha;
  const double scale = std::pow(alpha, y.params().hurst);
  std::vector<double> t(y.grid().size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = alpha * y.grid()[k];
  std::vector<double> v = y.values();
  for (double& x : v) x *= scale;
  Ensemble out = y;
  out.reset(TimeGrid(std::move(t)), std::move(v), ProcessTag::Y);
  return out;
}

SamplePath langevin_solve(const SamplePath& driver, double rate, double x0) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    std::ostringstream os;
    os << "langevin_solve: rate must be > 0, got " << rate;
    throw DomainError(os.str());
  }
  if (driver.values.size() != driver.grid.size() || driver.values.empty()) {
    throw UsageError("langevin_solve: driver values must match its grid");
  }
  if (driver.values.front() != 0.0) throw UsageError("langevin_solve: driver must start at 0");
  SamplePath out{driver.grid, std::vector<double>(driver.values.size())};
  langevin_recursion(driver.grid.times(), driver.values, rate, x0, out.values);
  return out;
}

double fou1_truncation_bound(const ModelParams& params, double cutoff) {
  // Var int_{-inf}^0 e^{alpha s} dZhat_s = Gamma(2H+1) / (2 alpha^{2H}); the part
  // below the cutoff is e^{alpha cutoff} times a copy of it.
  const double sd = std::sqrt(std::tgamma(2.0 * params.hurst + 1.0) / 2.0) *
                    std::pow(params.alpha, -params.hurst);
  return std::exp(params.alpha * cutoff) * sd;
}

double fou2_truncation_bound(const ModelParams& params, double cutoff) {
  // The discarded part is e^{gamma cutoff} U_cutoff, and
  // sd(U) <= gamma int_0^inf e^{-gamma r} sd(Y_r) dr <= H^H (2 + 1/gamma).
  const double h = params.hurst;
  const double sd = std::pow(h, h) * (2.0 + 1.0 / params.gamma);
  return std::exp(params.gamma * cutoff) * sd;
}

namespace {

double resolve_cutoff(const TruncationPolicy& policy, double rate, double sd_scale,
                      double (*bound)(const ModelParams&, double), const ModelParams& params) {
  if (!(policy.tolerance > 0.0) || !std::isfinite(policy.tolerance)) {
    throw ConfigError("truncation tolerance must be a positive finite number");
  }
  double cutoff = 0.0;
  if (policy.lower_cutoff) {
    cutoff = *policy.lower_cutoff;
    if (!(cutoff < 0.0)) throw ConfigError("truncation lower_cutoff must be < 0");
    if (bound(params, cutoff) > policy.tolerance) {
      std::ostringstream os;
      os << "lower_cutoff " << cutoff << " leaves a tail bound of " << bound(params, cutoff)
         << " > tolerance " << policy.tolerance;
      throw ConfigError(os.str());
    }
  } else {
    cutoff = std::min(-1.0 / rate, (std::log(policy.tolerance) - std::log(sd_scale)) / rate);
  }
  if (-cutoff * rate > kMaxLog) {
    std::ostringstream os;
    os << "truncation tolerance " << policy.tolerance << " is unreachable in floating point";
    throw ConfigError(os.str());
  }
  return cutoff;
}

}  // namespace

double resolve_fou1_cutoff(const ModelParams& params, const TruncationPolicy& policy) {
  params.validate();
  return resolve_cutoff(policy, params.alpha, fou1_truncation_bound(params, 0.0),
                        &fou1_truncation_bound, params);
}

double resolve_fou2_cutoff(const ModelParams& params, const TruncationPolicy& policy) {
  params.validate();
  return resolve_cutoff(policy, params.gamma, fou2_truncation_bound(params, 0.0),
                        &fou2_truncation_bound, params);
}

std::vector<double> stretched_past_grid(double cutoff, double step, double rate, double hurst) {
  if (!(cutoff < 0.0) || !(step > 0.0) || !(rate > 0.0)) {
    throw UsageError("stretched_past_grid: needs cutoff < 0, step > 0, rate > 0");
  }
  const double c = rate / (hurst + 0.5);
  const double r_max = -std::expm1(c * cutoff) / c;
  std::vector<double> u;
  for (std::size_t j = 0;; ++j) {
    const double r = step * static_cast<double>(j);
    if (r >= r_max) break;
    const double uj = std::log1p(-c * r) / c;
    if (uj - cutoff <= 1e-9 * step) break;
    u.push_back(uj);
  }
  u.push_back(cutoff);
  std::reverse(u.begin(), u.end());
  return u;
}

Ensemble fou1_path(const ModelParams& params, const TimeGrid& grid, std::uint64_t seed,
                   std::size_t count, Fou1Init init, const TruncationPolicy& trunc,
                   std::size_t refinement) {
  params.validate();
  require_starts_at_zero(grid, "fou1_path");
  require_refinement(refinement);
  const TimeGrid fine = grid.refined(refinement);
  const double alpha = params.alpha;

  // Driver grid: [past ...] + fine; user point j sits at offset + j * refinement.
  std::vector<double> times;
  std::size_t offset = 0;
  const bool uniform = fine.size() >= 2 && fine.is_uniform();
  const double h = fine.size() >= 2 ? fine[1] - fine[0] : 1.0;
  if (init == Fou1Init::StationaryTruncated) {
    const double cutoff = resolve_fou1_cutoff(params, trunc);
    if (uniform) {
      offset = static_cast<std::size_t>(std::ceil(-cutoff / h - 1e-9));
      for (std::size_t k = offset; k > 0; --k) times.push_back(-h * static_cast<double>(k));
    } else {
      auto past = stretched_past_grid(cutoff, h, alpha, params.hurst);
      past.pop_back();  // drop 0, it comes with `fine`
      times = past;
      offset = past.size();
    }
  }
  times.insert(times.end(), fine.times().begin(), fine.times().end());
  const TimeGrid driver_grid(times);
  const std::size_t n = driver_grid.size();

  // Two-sided FBM with stationary increments; reduces to Z on [0, inf) when offset == 0.
  std::unique_ptr<CirculantFgn> fgn;
  std::unique_ptr<GridSampler> chol;
  if (uniform && n >= 2) {
    fgn = std::make_unique<CirculantFgn>(params, next_power_of_two(n - 1));
    if (!fgn->valid()) fgn.reset();
  }
  if (!fgn) {
    chol = std::make_unique<GridSampler>(
        driver_grid,
        [&](double s, double t) {
          return two_sided_fbm_cov(params, s, t, TwoSidedConstruction::StationaryIncrements);
        },
        [](double t) { return t == 0.0; });
  }
  const double scale = std::pow(h, params.hurst);

  Ensemble ens(params, grid, seed, ProcessTag::FOU1, count);
  for_each_path(count, seed, [&](std::size_t i, PathStream& rng) {
    std::vector<double> w(n, 0.0);
    if (fgn) {
      std::vector<double> g(fgn->size());
      fgn->sample(rng, g);
      for (std::size_t k = 0; k + 1 < n; ++k) w[k + 1] = w[k] + scale * g[k];
    } else {
      chol->sample(rng, w);
      const double w0 = w[0];
      for (double& v : w) v -= w0;
    }
    std::vector<double> u(n);
    langevin_recursion(driver_grid.times(), w, alpha, 0.0, u);
    auto row = ens.path(i);
    for (std::size_t j = 0; j < grid.size(); ++j) row[j] = u[offset + j * refinement];
    if (init == Fou1Init::Zero) row[0] = 0.0;
  });
  if (chol && uniform) ens.add_warning("circulant embedding invalid; used Cholesky");
  return ens;
}

Fou2Layout fou2_layout(const ModelParams& params, const TimeGrid& grid,
                       const TruncationPolicy& trunc, std::size_t refinement) {
  params.validate();
  require_starts_at_zero(grid, "fou2_path");
  require_refinement(refinement);
  const TimeGrid fine = grid.refined(refinement);
  const double h = fine.size() >= 2 ? fine[1] - fine[0] : 1.0;
  const double cutoff = resolve_fou2_cutoff(params, trunc);
  std::vector<double> times = stretched_past_grid(cutoff, h, params.gamma, params.hurst);
  times.pop_back();
  Fou2Layout layout;
  layout.zero_index = times.size();
  times.insert(times.end(), fine.times().begin(), fine.times().end());
  layout.full = TimeGrid(std::move(times));
  for (std::size_t j = 0; j < grid.size(); ++j) {
    layout.user_index.push_back(layout.zero_index + j * refinement);
  }
  return layout;
}

std::vector<double> fou2_from_doob_sample(const ModelParams& params, const TimeGrid& full,
                                          std::size_t zero_index, std::span<const double> x,
                                          Fou2Method method) {
  const auto t = full.times();
  const std::size_t n = t.size();
  if (x.size() != n || zero_index >= n || t[zero_index] != 0.0) {
    throw UsageError("fou2_from_doob_sample: sample does not match the layout");
  }
  const double gamma = params.gamma;
  const double hurst = params.hurst;
  const double cutoff = t[0];
  std::vector<double> u(n - zero_index);

  if (method == Fou2Method::LangevinOnY) {
    // xi = int_L^0 e^{(g-1)s} dZ_{a_s} = X_0 - e^{g L} X_L - (g-1) int_L^0 e^{g s} X_s ds
    const double xi = x[zero_index] - std::exp(gamma * cutoff) * x[0] -
                      (gamma - 1.0) * discounted_integral(t.first(zero_index + 1),
                                                          x.first(zero_index + 1), gamma)
                                          .back();
    // Y^(1)_t = X_t - X_0 + int_0^t X_s ds
    std::vector<double> y(n - zero_index, 0.0);
    for (std::size_t k = zero_index + 1; k < n; ++k) {
      const std::size_t j = k - zero_index;
      y[j] = y[j - 1] + (x[k] - x[k - 1]) + 0.5 * (t[k] - t[k - 1]) * (x[k] + x[k - 1]);
    }
    langevin_recursion(t.subspan(zero_index), y, gamma, xi, u);
    return u;
  }

  // Partial integration of H^{-b} e^{-g t} int_{a(L)}^{a(t)} s^b dZ_s, b = (g-1)H:
  // U_t = X_t - e^{-g (t-L)} X_L - (b/H) int_L^t e^{-g (t-u)} X_u du.
  const double beta = (gamma - 1.0) * hurst;
  const std::vector<double> j = discounted_integral(t, x, gamma);
  for (std::size_t k = zero_index; k < n; ++k) {
    u[k - zero_index] = x[k] - std::exp(-gamma * (t[k] - cutoff)) * x[0] - beta / hurst * j[k];
  }
  return u;
}

Ensemble fou2_path(const ModelParams& params, const TimeGrid& grid, std::uint64_t seed,
                   std::size_t count, Fou2Method method, const TruncationPolicy& trunc,
                   std::size_t refinement) {
  const Fou2Layout layout = fou2_layout(params, grid, trunc, refinement);
  const ModelParams unit{params.hurst, 1.0, params.gamma};
  const GridSampler sampler = make_doob_sampler(unit, layout.full);
  Ensemble ens(params, grid, seed, ProcessTag::FOU2, count);
  for_each_path(count, seed, [&](std::size_t i, PathStream& rng) {
    std::vector<double> x(layout.full.size());
    sampler.sample(rng, x);
    const auto u = fou2_from_doob_sample(params, layout.full, layout.zero_index, x, method);
    auto row = ens.path(i);
    for (std::size_t j = 0; j < grid.size(); ++j) row[j] = u[layout.user_index[j] - layout.zero_index];
  });
  return ens;
}

}  // namespace fou
