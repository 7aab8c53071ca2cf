#include <doctest.h>

#include <cmath>
#include <limits>

#include "fou/analytics.hpp"
#include "fou/errors.hpp"
#include "fou/estimation.hpp"
#include "fou/fbm.hpp"
#include "fou/transforms.hpp"

using namespace fou;

TEST_CASE("z_score and linear_fit") {
  CHECK(z_score(1.5, 0.5, 1.0) == doctest::Approx(1.0));
  CHECK(std::isnan(z_score(1.0, 0.0, 1.0)));
  const std::vector<double> x{0, 1, 2, 3};
  const std::vector<double> y{1, 3, 5, 7};
  const auto f = linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(f.lo == 0.0);
  CHECK(f.hi == 3.0);
}

TEST_CASE("empirical_cov") {
  const auto e = sample_fbm_cholesky({0.5, 1, 1}, TimeGrid({1.0, 2.0}), 1, 10000);
  const auto c = empirical_cov(e, 1.0, 2.0);
  CHECK(std::abs(c.value - 1.0) < 5 * c.std_error);
  CHECK(c.count == 10000);
  CHECK_THROWS_AS(empirical_cov(e, 1.5, 2.0), UsageError);
  const auto one = sample_fbm_cholesky({0.5, 1, 1}, TimeGrid({1.0}), 1, 1);
  CHECK_THROWS_AS(empirical_cov(one, 1.0, 1.0), UsageError);

  const ModelParams p{0.75, 1.0, 1.0};
  const auto x = doob_transform(p, TimeGrid({0.0, 1.0}), 2, 10000);
  const auto cx = empirical_cov(x, 0.0, 1.0);
  CHECK(std::abs(cx.value - xd_cov(p, 0.0, 1.0)) < 5 * cx.std_error);
}

TEST_CASE("standard error scales as one over root N") {
  const ModelParams p{0.5, 1.0, 1.0};
  const TimeGrid g({1.0});
  const double s3 = empirical_cov(sample_fbm_cholesky(p, g, 3, 1000), 1, 1).std_error;
  const double s4 = empirical_cov(sample_fbm_cholesky(p, g, 3, 10000), 1, 1).std_error;
  const double s5 = empirical_cov(sample_fbm_cholesky(p, g, 3, 100000), 1, 1).std_error;
  CHECK(s3 / s4 == doctest::Approx(std::sqrt(10.0)).epsilon(0.2));
  CHECK(s4 / s5 == doctest::Approx(std::sqrt(10.0)).epsilon(0.2));
}

TEST_CASE("stationarity_test") {
  const TimeGrid g = TimeGrid::uniform(0.0, 3.0, 6);
  SUBCASE("OU passes") {
    const auto e = ou_process(1.0, g, 4, 4000);
    const auto r = stationarity_test(e, 1.0, {0.0, 1.0, 2.0});
    CHECK(r.pass);
    CHECK(r.estimates.size() == 3);
  }
  SUBCASE("zero-init fOU-1 fails") {
    const auto e = fou1_path({0.75, 1.0, 1.0}, g, 5, 4000, Fou1Init::Zero);
    const auto r = stationarity_test(e, 0.5, {0.0, 1.0, 2.0});
    CHECK_FALSE(r.pass);
    CHECK(r.max_abs_z > 3.0);
  }
}

TEST_CASE("range_dependence_diagnostic") {
  auto fgn = [](double h) {
    std::vector<double> r;
    for (std::size_t n = 0; n < 256; ++n) r.push_back(fgn_autocov({h, 1, 1}, n));
    return r;
  };
  SUBCASE("long-range fGN") {
    const auto rep = range_dependence_diagnostic(fgn(0.75));
    CHECK(rep.classification == RangeClass::LongRange);
    CHECK(rep.power.slope == doctest::Approx(-0.5).epsilon(0.15));
  }
  SUBCASE("short-range fGN") {
    CHECK(range_dependence_diagnostic(fgn(0.25)).classification == RangeClass::ShortRange);
  }
  SUBCASE("exponentially decaying rho_y") {
    const ModelParams p{0.75, 1.0, 1.0};
    std::vector<double> r;
    for (std::size_t n = 0; n < 40; ++n) r.push_back(rho_y(p, n).value);
    const auto rep = range_dependence_diagnostic(r);
    CHECK(rep.classification == RangeClass::ShortRange);
    CHECK(-rep.exponential.slope == doctest::Approx(1.0 / 3.0).epsilon(0.1));
  }
  CHECK(to_string(RangeClass::LongRange) == "long-range");
  CHECK_THROWS_AS(range_dependence_diagnostic(std::vector<double>(8, 1.0)), UsageError);
  std::vector<double> bad(20, 1.0);
  bad[3] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(range_dependence_diagnostic(bad), UsageError);
}

TEST_CASE("decay_rate_fit") {
  auto curve = [](double h) {
    std::vector<double> tau;
    std::vector<double> v;
    for (double t = 5.0; t <= 15.0 + 1e-9; t += 0.5) {
      tau.push_back(t);
      v.push_back(xd_cov({h, 1.0, 1.0}, 0.0, t));
    }
    return std::pair{tau, v};
  };
  const auto [t75, v75] = curve(0.75);
  CHECK(decay_rate_fit(t75, v75, 5, 15).slope == doctest::Approx(-1.0 / 3.0).epsilon(0.05));
  const auto [t25, v25] = curve(0.25);
  CHECK(decay_rate_fit(t25, v25, 5, 15).slope == doctest::Approx(-1.0).epsilon(0.05));
  std::vector<double> neg = v75;
  neg[2] = -1.0;
  CHECK_THROWS_AS(decay_rate_fit(t75, neg, 5, 15), UsageError);
  // Points outside the window are ignored.
  CHECK_NOTHROW(decay_rate_fit(t75, neg, 7, 15));
}

TEST_CASE("holder_exponent") {
  const std::vector<std::size_t> scales{1, 2, 4, 8, 16, 32};
  const TimeGrid g = TimeGrid::uniform(0.0, 1.0, 1024);
  SamplePath line{g, {}};
  for (double t : g.times()) line.values.push_back(3.0 * t);
  CHECK(holder_exponent(line, scales).slope == doctest::Approx(1.0));
  CHECK_THROWS_AS(holder_exponent(line, {1, 2, 4}), UsageError);

  const auto f = sample_fgn_circulant({0.75, 1, 1}, 4096, 1.0 / 4096, 6, 1);
  const auto s = holder_exponent(f.sample_path(0), scales).slope;
  CHECK(s >= 0.6);
  CHECK(s <= 0.85);

  const auto y = y_process({0.75, 1, 1}, TimeGrid::uniform(0.0, 1.0, 1024), 7, 1, 1);
  const auto sy = holder_exponent(y.sample_path(0), scales).slope;
  CHECK(sy >= 0.6);
  CHECK(sy <= 0.85);
}

TEST_CASE("ks and normality") {
  PathStream a(1, 0);
  PathStream b(2, 0);
  std::vector<double> x(4000);
  std::vector<double> y(4000);
  for (auto& v : x) v = a.normal();
  for (auto& v : y) v = b.normal();
  CHECK(ks_two_sample(x, y).p_value > 0.01);
  std::vector<double> shifted = y;
  for (auto& v : shifted) v += 0.3;
  CHECK(ks_two_sample(x, shifted).p_value < 1e-6);

  CHECK(normality_test(x).pass);
  std::vector<double> skewed = x;
  for (auto& v : skewed) v = v * v;
  const auto n = normality_test(skewed);
  CHECK_FALSE(n.pass);
  CHECK(n.skew_z > 3.0);
  CHECK_THROWS_AS(normality_test(std::vector<double>(4, 0.0)), UsageError);
}

TEST_CASE("weak convergence, quadrature mode") {
  WeakConvergenceConfig cfg;
  cfg.a_values = {4, 16, 64, 256};
  cfg.probes = {{1.0, 2.0}};
  const auto r = weak_convergence_experiment({0.75, 1.0, 1.0}, cfg);
  CHECK(r.passed());
  CHECK(r.failures() == 0);
  bool saw_decreasing = false;
  for (const auto& c : r.checks) {
    if (c.metric.rfind("error_decreasing", 0) == 0) saw_decreasing = true;
  }
  CHECK(saw_decreasing);

  cfg.a_values = {4, 256, 16};
  CHECK_THROWS_AS(weak_convergence_experiment({0.75, 1.0, 1.0}, cfg), UsageError);
}

TEST_CASE("weak convergence, Monte Carlo mode") {
  WeakConvergenceConfig cfg;
  cfg.mode = ConvergenceMode::MonteCarlo;
  cfg.probes = {{1.0, 2.0}, {0.5, 1.0}};
  cfg.paths = 3000;
  SUBCASE("Brownian case") {
    cfg.a_values = {1, 4};
    CHECK(weak_convergence_experiment({0.5, 1.0, 1.0}, cfg).passed());
  }
  SUBCASE("H = 0.75 against quadrature") {
    cfg.a_values = {16};
    CHECK(weak_convergence_experiment({0.75, 1.0, 1.0}, cfg).passed());
  }
  SUBCASE("budget") {
    cfg.a_values = {4, 100000};
    try {
      (void)weak_convergence_experiment({0.75, 1.0, 1.0}, cfg);
      FAIL("expected BudgetError");
    } catch (const BudgetError& e) {
      CHECK(std::string(e.what()).find("100000") != std::string::npos);
    }
  }
}

TEST_CASE("reports are seed-deterministic") {
  WeakConvergenceConfig cfg;
  cfg.mode = ConvergenceMode::MonteCarlo;
  cfg.probes = {{1.0, 2.0}};
  cfg.a_values = {2};
  cfg.paths = 500;
  cfg.seed = 9;
  const auto a = weak_convergence_experiment({0.75, 1.0, 1.0}, cfg);
  const auto b = weak_convergence_experiment({0.75, 1.0, 1.0}, cfg);
  REQUIRE(a.checks.size() == b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) CHECK(a.checks[i].estimate == b.checks[i].estimate);
}
