#include <doctest.h>

#include <cmath>

#include "fou/analytics.hpp"
#include "fou/errors.hpp"
#include "fou/estimation.hpp"
#include "fou/transforms.hpp"

using namespace fou;

namespace {
bool within(const CovEstimate& c, double target, double k = 5.0) {
  return std::abs(c.value - target) < k * c.std_error;
}
}  // namespace

TEST_CASE("time change") {
  const TimeChange a(0.5, 1.0);
  CHECK(a(0.3) == doctest::Approx(std::exp(0.6) / 2.0).epsilon(1e-14));
  const TimeChange b(0.75, 2.0);
  CHECK(b(1.0) > b(0.5));
  CHECK(b(-50.0) > 0.0);
  CHECK_THROWS_AS(b(400.0), DomainError);
}

TEST_CASE("Doob Gram entry equals the stationary covariance") {
  for (double h : {0.3, 0.5, 0.75}) {
    const ModelParams p{h, 1.3, 1.0};
    for (double tau : {0.0, 0.5, 3.0, 20.0}) {
      CHECK(doob_gram_entry(p, 1.0, 1.0 + tau) == doctest::Approx(xd_cov(p, 1.0, 1.0 + tau)).epsilon(1e-10));
      CHECK(doob_gram_entry(p, -5.0, -5.0 + tau) == doctest::Approx(doob_gram_entry(p, 2.0, 2.0 + tau)).epsilon(1e-10));
    }
  }
}

TEST_CASE("Doob transform") {
  SUBCASE("H = 1/2 gives OU covariance") {
    const ModelParams p{0.5, 1.0, 1.0};
    const auto e = doob_transform(p, TimeGrid({0.0, 0.5, 1.0, 2.0}), 1, 10000);
    CHECK(within(empirical_cov(e, 0.0, 1.0), 0.5 * std::exp(-1.0)));
    CHECK(within(empirical_cov(e, 0.5, 2.0), 0.5 * std::exp(-1.5)));
  }
  SUBCASE("variance and stationarity at H = 0.75") {
    const ModelParams p{0.75, 1.0, 1.0};
    const auto e = doob_transform(p, TimeGrid::uniform(-1.0, 3.0, 8), 2, 10000);
    CHECK(within(empirical_cov(e, 0.0, 0.0), 0.6495190528383290));
    CHECK(stationarity_test(e, 1.0, {0.0, 1.0, 2.0}).pass);
    CHECK(e.tag() == ProcessTag::XD);
  }
  CHECK_THROWS_AS(doob_transform({0.75, 1.0, 1.0}, TimeGrid({0.0, 600.0}), 1, 1), DomainError);
}

TEST_CASE("y process") {
  SUBCASE("Brownian at H = 1/2") {
    const auto e = y_process({0.5, 2.0, 1.0}, TimeGrid::uniform(0.0, 2.0, 4), 3, 10000);
    CHECK(within(empirical_cov(e, 1.0, 2.0), 1.0));
    CHECK(within(empirical_cov(e, 0.5, 0.5), 0.5));
    for (std::size_t i = 0; i < e.count(); ++i) CHECK(e.path(i)[0] == 0.0);
  }
  SUBCASE("H = 0.75 matches the kernel covariance") {
    const ModelParams p{0.75, 1.0, 1.0};
    const auto e = y_process(p, TimeGrid::uniform(0.0, 2.0, 2), 4, 10000);
    CHECK(within(empirical_cov(e, 1.0, 2.0), y_cov(p, 1.0, 2.0).value));
  }
  SUBCASE("increments are stationary and positively correlated") {
    const ModelParams p{0.75, 1.0, 1.0};
    const auto e = y_process(p, TimeGrid::uniform(0.0, 4.0, 4), 5, 8000);
    std::vector<double> a;
    std::vector<double> b;
    double mean = 0.0;
    for (std::size_t i = 0; i < e.count(); ++i) {
      const auto r = e.path(i);
      a.push_back((r[2] - r[1]) * (r[1] - r[0]));
      b.push_back((r[4] - r[3]) * (r[3] - r[2]));
      mean += a.back();
    }
    mean /= static_cast<double>(a.size());
    double var = 0.0;
    for (double x : a) var += (x - mean) * (x - mean);
    const double se = std::sqrt(var / (a.size() - 1) / a.size());
    CHECK(mean > 3 * se);
    const double target = y_increment_cov(p, 1, 2, 0, 1).value;
    CHECK(std::abs(mean - target) < 5 * se);
  }
  CHECK_THROWS_AS(y_process({0.75, 1, 1}, TimeGrid({0.5, 1.0}), 1, 1), UsageError);
}

TEST_CASE("rescale_y") {
  const ModelParams p2{0.75, 2.0, 1.0};
  const auto y2 = y_process(p2, TimeGrid({0.0, 0.25, 0.5}), 6, 10000);
  const auto r = rescale_y(y2);
  CHECK(r.grid()[2] == doctest::Approx(1.0));
  const auto y1 = y_process({0.75, 1.0, 1.0}, TimeGrid({0.0, 0.5, 1.0}), 7, 10000);
  const auto a = empirical_cov(r, 1.0, 1.0);
  const auto b = empirical_cov(y1, 1.0, 1.0);
  CHECK(std::abs(a.value - b.value) < 5 * std::hypot(a.std_error, b.std_error));
  const auto c = empirical_cov(r, 0.5, 1.0);
  const auto d = empirical_cov(y1, 0.5, 1.0);
  CHECK(std::abs(c.value - d.value) < 5 * std::hypot(c.std_error, d.std_error));
  const auto y_unit = y_process({0.75, 1.0, 1.0}, TimeGrid({0.0, 1.0}), 1, 3);
  CHECK(rescale_y(y_unit).values() == y_unit.values());
  const auto x = doob_transform({0.75, 1, 1}, TimeGrid({0.0, 1.0}), 1, 2);
  CHECK_THROWS_AS(rescale_y(x), UsageError);
}

TEST_CASE("langevin_solve") {
  const TimeGrid grid = TimeGrid::uniform(0.0, 3.0, 300);
  const SamplePath zero{grid, std::vector<double>(grid.size(), 0.0)};
  const auto u = langevin_solve(zero, 0.7, 1.0);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(u.values[k] == doctest::Approx(std::exp(-0.7 * grid[k])));
  CHECK_THROWS_AS(langevin_solve(zero, 0.0, 1.0), DomainError);
  SamplePath bad = zero;
  bad.values[0] = 1.0;
  CHECK_THROWS_AS(langevin_solve(bad, 1.0, 0.0), UsageError);

  SUBCASE("linear driver is integrated exactly") {
    // W_t = t gives U_t = (1 - e^{-r t}) / r.
    SamplePath lin{grid, std::vector<double>(grid.times().begin(), grid.times().end())};
    const auto v = langevin_solve(lin, 2.0, 0.0);
    CHECK(v.values.back() == doctest::Approx((1 - std::exp(-6.0)) / 2.0).epsilon(1e-12));
  }
  SUBCASE("Brownian driver with stationary start is OU") {
    const double alpha = 1.5;
    const ModelParams bm{0.5, 1.0, 1.0};
    const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 64);
    const auto w = sample_fbm_cholesky(bm, g, 8, 8000);
    Ensemble out(bm, g, 8, ProcessTag::OU, w.count());
    for (std::size_t i = 0; i < w.count(); ++i) {
      PathStream s(99, i);
      const double x0 = s.normal() / std::sqrt(2 * alpha);
      const auto u = langevin_solve(w.sample_path(i), alpha, x0);
      std::copy(u.values.begin(), u.values.end(), out.path(i).begin());
    }
    CHECK(within(empirical_cov(out, 0.0, 1.0), ou_cov(alpha, 0.0, 1.0)));
    CHECK(within(empirical_cov(out, 0.5, 1.0), ou_cov(alpha, 0.5, 1.0)));
  }
}

TEST_CASE("langevin residual shrinks at second order") {
  auto residual = [](std::size_t n) {
    const TimeGrid g = TimeGrid::uniform(0.0, 2.0, n);
    SamplePath d{g, {}};
    for (double t : g.times()) d.values.push_back(std::sin(3 * t) + t * t);
    const auto u = langevin_solve(d, 1.2, 0.3);
    double integral = 0.0;
    for (std::size_t k = 1; k < g.size(); ++k) integral += 0.5 * (g[k] - g[k - 1]) * (u.values[k] + u.values[k - 1]);
    return std::abs(u.values.back() - 0.3 + 1.2 * integral - d.values.back());
  };
  const double r64 = residual(64);
  const double r128 = residual(128);
  CHECK(r64 < 1e-2);
  CHECK(r64 / r128 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("truncation cutoffs") {
  const ModelParams p{0.75, 1.0, 1.0};
  const double l1 = resolve_fou1_cutoff(p, {});
  CHECK(fou1_truncation_bound(p, l1) == doctest::Approx(1e-8));
  const double l2 = resolve_fou2_cutoff(p, {});
  CHECK(fou2_truncation_bound(p, l2) == doctest::Approx(1e-8));
  CHECK_THROWS_AS(resolve_fou1_cutoff(p, {std::nullopt, 1e-320}), ConfigError);
  CHECK_THROWS_AS(resolve_fou1_cutoff(p, {std::nullopt, 0.0}), ConfigError);
  CHECK_THROWS_AS(resolve_fou2_cutoff(p, {-1.0, 1e-8}), ConfigError);
  CHECK(resolve_fou2_cutoff(p, {-40.0, 1e-8}) == -40.0);
}

TEST_CASE("stretched past grid") {
  const auto g = stretched_past_grid(-20.0, 0.01, 1.0, 0.75);
  CHECK(g.front() == -20.0);
  CHECK(g.back() == 0.0);
  CHECK(std::is_sorted(g.begin(), g.end()));
  CHECK(g[g.size() - 1] - g[g.size() - 2] == doctest::Approx(0.01).epsilon(0.02));
  CHECK(g.size() < 200);
  const auto fine = stretched_past_grid(-20.0, 0.005, 1.0, 0.75);
  for (double u : g) {
    if (u == -20.0) continue;
    CHECK(std::any_of(fine.begin(), fine.end(), [&](double v) { return std::abs(u - v) < 1e-12; }));
  }
}

TEST_CASE("fOU of the first kind") {
  SUBCASE("zero init starts at 0 and is not stationary") {
    const ModelParams p{0.75, 1.0, 1.0};
    const auto e = fou1_path(p, TimeGrid::uniform(0.0, 3.0, 6), 1, 4000, Fou1Init::Zero);
    for (std::size_t i = 0; i < e.count(); ++i) CHECK(e.path(i)[0] == 0.0);
    CHECK_FALSE(stationarity_test(e, 0.5, {0.0, 1.0, 2.0}).pass);
  }
  SUBCASE("stationary H = 1/2 has variance 1/(2 alpha)") {
    const ModelParams p{0.5, 2.0, 1.0};
    const auto e = fou1_path(p, TimeGrid::uniform(0.0, 1.0, 4), 2, 10000, Fou1Init::StationaryTruncated);
    CHECK(within(empirical_cov(e, 0.0, 0.0), 0.25));
    CHECK(within(empirical_cov(e, 1.0, 1.0), 0.25));
    CHECK(within(empirical_cov(e, 0.0, 1.0), ou_cov(2.0, 0.0, 1.0)));
  }
  SUBCASE("stationary H = 0.75 variance matches quadrature") {
    const ModelParams p{0.75, 1.0, 1.0};
    const auto e = fou1_path(p, TimeGrid::uniform(0.0, 2.0, 4), 3, 10000, Fou1Init::StationaryTruncated);
    const double v = fou1_stationary_variance(p).value;
    CHECK(within(empirical_cov(e, 0.0, 0.0), v));
    CHECK(within(empirical_cov(e, 2.0, 2.0), v));
    CHECK(stationarity_test(e, 0.5, {0.0, 1.0, 1.5}).pass);
  }
  SUBCASE("non-uniform grid uses the Cholesky driver") {
    const ModelParams p{0.75, 1.0, 1.0};
    const auto e = fou1_path(p, TimeGrid({0.0, 0.3, 1.0}), 4, 6000, Fou1Init::StationaryTruncated, {}, 4);
    CHECK(within(empirical_cov(e, 1.0, 1.0), fou1_stationary_variance(p).value));
  }
  SUBCASE("seeded regeneration is bit-identical") {
    const ModelParams p{0.75, 1.0, 1.0};
    const auto a = fou1_path(p, TimeGrid::uniform(0.0, 1.0, 4), 5, 3, Fou1Init::StationaryTruncated);
    const auto b = fou1_path(p, TimeGrid::uniform(0.0, 1.0, 4), 5, 3, Fou1Init::StationaryTruncated);
    CHECK(a.values() == b.values());
  }
}

TEST_CASE("fOU of the second kind") {
  SUBCASE("H = 1/2 with gamma = 1 is classical OU") {
    const ModelParams p{0.5, 1.0, 1.0};
    const auto e = fou2_path(p, TimeGrid::uniform(0.0, 1.0, 2), 1, 8000, Fou2Method::DirectTransform);
    CHECK(within(empirical_cov(e, 0.0, 0.0), 0.5));
    CHECK(within(empirical_cov(e, 0.0, 1.0), ou_cov(1.0, 0.0, 1.0)));
  }
  SUBCASE("variance matches the kernel representation") {
    const ModelParams p{0.75, 1.0, 2.0};
    const auto e = fou2_path(p, TimeGrid::uniform(0.0, 1.0, 2), 2, 8000, Fou2Method::LangevinOnY, {}, 4);
    CHECK(within(empirical_cov(e, 1.0, 1.0), ud_cov(p, 1.0, 1.0).value));
    CHECK(within(empirical_cov(e, 0.0, 1.0), ud_cov(p, 0.0, 1.0).value));
  }
  SUBCASE("both constructions agree pathwise on a shared sample") {
    const ModelParams p{0.75, 1.0, 1.0};
    const TimeGrid grid = TimeGrid::uniform(0.0, 2.0, 8);
    const auto a = fou2_path(p, grid, 3, 4, Fou2Method::LangevinOnY);
    const auto b = fou2_path(p, grid, 3, 4, Fou2Method::DirectTransform);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    const double h = 0.25 / 8;
    CHECK(worst < 10 * std::pow(h, 0.75));
  }
  SUBCASE("direct transform is exact at gamma = 1") {
    const ModelParams p{0.75, 1.0, 1.0};
    const auto layout = fou2_layout(p, TimeGrid::uniform(0.0, 1.0, 2), {}, 2);
    std::vector<double> x(layout.full.size());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::sin(static_cast<double>(k));
    const auto u = fou2_from_doob_sample(p, layout.full, layout.zero_index, x, Fou2Method::DirectTransform);
    const double cutoff = layout.full[0];
    for (std::size_t k = layout.zero_index; k < x.size(); ++k) {
      CHECK(u[k - layout.zero_index] ==
            doctest::Approx(x[k] - std::exp(-(layout.full[k] - cutoff)) * x[0]).epsilon(1e-14));
    }
  }
}
