#include "fou/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "fou/errors.hpp"

namespace fou {

namespace {

// Gauss-Kronrod 7/15 nodes and weights (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const Integrand& f, double a, double b) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, 7> f1{};
  std::array<double, 7> f2{};
  const double fc = f(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  for (int j = 0; j < 3; ++j) {
    const int jtw = 2 * j + 1;
    const double dx = half * kXgk[jtw];
    const double v1 = f(center - dx);
    const double v2 = f(center + dx);
    f1[jtw] = v1;
    f2[jtw] = v2;
    resg += kWg[j] * (v1 + v2);
    resk += kWgk[jtw] * (v1 + v2);
    resabs += kWgk[jtw] * (std::abs(v1) + std::abs(v2));
  }
  for (int j = 0; j < 4; ++j) {
    const int jtwm1 = 2 * j;
    const double dx = half * kXgk[jtwm1];
    const double v1 = f(center - dx);
    const double v2 = f(center + dx);
    f1[jtwm1] = v1;
    f2[jtwm1] = v2;
    resk += kWgk[jtwm1] * (v1 + v2);
    resabs += kWgk[jtwm1] * (std::abs(v1) + std::abs(v2));
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(f1[j] - reskh) + std::abs(f2[j] - reskh));
  }
  const double scale = std::abs(half);
  resasc *= scale;
  resabs *= scale;
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * resabs, err);
  }
  return {a, b, resk * half, err};
}

// int_c^e f with x = c + w^p on the left half and x = e - w^p on the right half.
QuadResult integrate_graded(const Integrand& f, double c, double e, double p,
                            const QuadratureConfig& cfg) {
  if (p <= 1.0) return integrate(f, c, e, cfg);
  const double m = 0.5 * (c + e);
  const double wmax = std::pow(m - c, 1.0 / p);
  const Integrand left = [&](double w) { return f(c + std::pow(w, p)) * p * std::pow(w, p - 1.0); };
  const Integrand right = [&](double w) { return f(e - std::pow(w, p)) * p * std::pow(w, p - 1.0); };
  const QuadratureConfig half = [&] {
    QuadratureConfig h = cfg;
    h.abs_tol *= 0.5;
    return h;
  }();
  return integrate(left, 0.0, wmax, half) + integrate(right, 0.0, std::pow(e - m, 1.0 / p), half);
}

}  // namespace

double QuadratureConfig::substitution_exponent(double hurst) {
  if (!(hurst > 0.5 && hurst < 1.0)) {
    throw DomainError("substitution exponent needs 1/2 < H < 1");
  }
  return 1.0 / (2.0 * hurst - 1.0);
}

void QuadratureConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !std::isfinite(rel_tol) || !std::isfinite(abs_tol)) {
    throw UsageError("quadrature tolerances must be positive and finite");
  }
  if (max_subdivisions == 0) throw UsageError("quadrature needs max_subdivisions >= 1");
}

QuadratureConfig QuadratureConfig::scaled(double factor) const {
  QuadratureConfig c = *this;
  c.rel_tol *= factor;
  c.abs_tol *= factor;
  return c;
}

QuadResult integrate(const Integrand& f, double a, double b, const QuadratureConfig& cfg) {
  cfg.validate();
  if (a == b) return {};
  if (a > b) {
    QuadResult r = integrate(f, b, a, cfg);
    r.value = -r.value;
    return r;
  }
  std::size_t evaluations = 0;
  const Integrand counted = [&](double x) {
    ++evaluations;
    return f(x);
  };
  std::priority_queue<Segment> heap;
  Segment first = gk15(counted, a, b);
  double value = first.value;
  double error = first.error;
  heap.push(first);
  std::size_t subdivisions = 1;
  auto tolerance = [&] { return std::max(cfg.rel_tol * std::abs(value), cfg.abs_tol); };
  while (error > tolerance()) {
    if (subdivisions >= cfg.max_subdivisions) break;
    const Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    heap.pop();
    const Segment l = gk15(counted, worst.a, mid);
    const Segment r = gk15(counted, mid, worst.b);
    value += l.value + r.value - worst.value;
    error += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
    ++subdivisions;
  }
  // Re-sum to drop the drift of the incremental updates.
  value = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  if (!std::isfinite(value)) {
    throw QuadratureError("quadrature produced a non-finite value", value, error);
  }
  if (error > std::max(cfg.rel_tol * std::abs(value), cfg.abs_tol)) {
    std::ostringstream os;
    os.precision(6);
    os << "quadrature on [" << a << ", " << b << "] stopped at error " << error
       << " for estimate " << value;
    throw QuadratureError(os.str(), value, error);
  }
  return {value, error, evaluations};
}

QuadResult integrate_power_left(const Integrand& g, double a, double b, double q,
                                const QuadratureConfig& cfg) {
  if (!(q > -1.0)) throw DomainError("endpoint exponent must be > -1");
  if (q >= 0.0) return integrate([&](double x) { return g(x) * std::pow(x - a, q); }, a, b, cfg);
  const double p = 1.0 / (q + 1.0);
  return integrate([&](double w) { return p * g(a + std::pow(w, p)); }, 0.0,
                   std::pow(b - a, 1.0 / p), cfg);
}

QuadResult integrate_power_right(const Integrand& g, double a, double b, double q,
                                 const QuadratureConfig& cfg) {
  if (!(q > -1.0)) throw DomainError("endpoint exponent must be > -1");
  if (q >= 0.0) return integrate([&](double x) { return g(x) * std::pow(b - x, q); }, a, b, cfg);
  const double p = 1.0 / (q + 1.0);
  return integrate([&](double w) { return p * g(b - std::pow(w, p)); }, 0.0,
                   std::pow(b - a, 1.0 / p), cfg);
}

QuadResult integrate_power_distance(const Integrand& g, double d0, double d1, double q,
                                    const QuadratureConfig& cfg) {
  if (!(q > -1.0)) throw DomainError("endpoint exponent must be > -1");
  if (d0 < 0.0 || d1 < d0) throw UsageError("distance range must satisfy 0 <= d0 <= d1");
  if (q >= 0.0) return integrate([&](double d) { return g(d) * std::pow(d, q); }, d0, d1, cfg);
  const double p = 1.0 / (q + 1.0);
  return integrate([&](double w) { return p * g(std::pow(w, p)); }, std::pow(d0, 1.0 / p),
                   std::pow(d1, 1.0 / p), cfg);
}

QuadResult integrate_diagonal_singular(const Integrand2& g, double a1, double b1, double a2,
                                       double b2, double q, const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(b1 >= a1) || !(b2 >= a2)) throw UsageError("integration windows must be ordered");
  if (a1 == b1 || a2 == b2) return {};

  const QuadratureConfig inner_cfg = cfg.scaled(0.1);
  double max_inner_error = 0.0;
  std::size_t inner_evaluations = 0;
  const Integrand inner = [&](double u) {
    QuadResult r;
    if (u > a2) {
      const double lo = u - std::min(u, b2);
      r += integrate_power_distance([&](double d) { return g(u, u - d); }, lo, u - a2, q, inner_cfg);
    }
    if (u < b2) {
      const double lo = std::max(u, a2) - u;
      r += integrate_power_distance([&](double d) { return g(u, u + d); }, lo, b2 - u, q, inner_cfg);
    }
    max_inner_error = std::max(max_inner_error, r.error);
    inner_evaluations += r.evaluations;
    return r.value;
  };

  std::vector<double> breaks{a1, b1};
  for (double x : {a2, b2}) {
    if (x > a1 && x < b1) breaks.push_back(x);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  // The inner result behaves like |u - edge|^{q+1} near the window edges.
  const double grade = q < 0.0 ? 1.0 / (q + 1.0) : 1.0;
  QuadratureConfig piece_cfg = cfg;
  piece_cfg.abs_tol = cfg.abs_tol / static_cast<double>(breaks.size() - 1);
  QuadResult total;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    total += integrate_graded(inner, breaks[i], breaks[i + 1], grade, piece_cfg);
  }
  total.error += (b1 - a1) * max_inner_error;
  total.evaluations += inner_evaluations;
  return total;
}

}  // namespace fou
