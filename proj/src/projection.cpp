#include "branchhull/projection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace branchhull {

namespace {

constexpr int kGridPoints = 64;
constexpr int kMaxPolishIters = 200;
constexpr double kFloor = 1e-300;

double curve_objective(double u, double a, double b, double c) {
  const double du = u - a;
  const double dv = c / u - b;
  return du * du + dv * dv;
}

double quartic_slope(double u, double a, double b, double c) {
  return (4.0 * u - 3.0 * a) * u * u + b * c;
}

// Root of the quartic in [lo, hi] given g(lo) < 0 < g(hi). Newton steps are
// accepted only while they stay strictly inside the current bracket;
// otherwise the bracket is bisected (geometrically when it spans decades).
double polish_root(double lo, double hi, double a, double b, double c) {
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxPolishIters; ++it) {
    const double g = hull_quartic(u, a, b, c);
    if (g == 0.0) return u;
    if (g < 0.0)
      lo = u;
    else
      hi = u;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;

    const double slope = quartic_slope(u, a, b, c);
    double next = slope != 0.0 ? u - g / slope : lo;
    if (!(next > lo && next < hi)) {
      next = hi > 8.0 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    }
    if (std::abs(next - u) <= 2.0 * std::numeric_limits<double>::epsilon() * u) {
      u = next;
      break;
    }
    u = next;
  }
  return u;
}

}  // namespace

double hull_quartic(double u, double a, double b, double c) {
  return u * u * u * (u - a) + c * (b * u - c);
}

HullConstraint HullConstraint::from_measurement(double y, double s) {
  if (s != -1.0 && s != 0.0 && s != 1.0)
    throw std::invalid_argument("sign must be -1, 0 or +1");
  HullConstraint k;
  k.c = std::abs(y);
  k.sigma = s;
  k.tau = (y > 0.0) - (y < 0.0);
  k.degenerate = (y == 0.0);
  if (!k.degenerate && s == 0.0)
    throw std::invalid_argument(
        "a nonzero measurement needs a nonzero sign to select a branch");
  return k;
}

Point2 project_hull(double a, double b, double c) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw std::invalid_argument("project_hull: level c must be positive");
  if (!std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("project_hull: input must be finite");
  if (a > 0.0 && b > 0.0 && a * b >= c) return {a, b};

  const double root_c = std::sqrt(c);
  double lo = std::max(1e-3 * root_c, kFloor);
  while (hull_quartic(lo, a, b, c) >= 0.0 && lo > kFloor) lo *= 0.5;
  double hi = std::max({a, root_c, c / std::max(b, 1e-12)});
  while (hull_quartic(hi, a, b, c) <= 0.0) hi *= 2.0;

  // Coarse log grid; every sign change brackets a critical point.
  std::array<double, kGridPoints> grid;
  const double log_lo = std::log(lo);
  const double step = (std::log(hi) - log_lo) / (kGridPoints - 1);
  for (int i = 0; i < kGridPoints; ++i) grid[i] = std::exp(log_lo + i * step);
  grid.front() = lo;
  grid.back() = hi;

  double best_u = 0.0;
  double best_obj = std::numeric_limits<double>::infinity();
  double g_prev = hull_quartic(grid[0], a, b, c);
  for (int i = 1; i < kGridPoints; ++i) {
    const double g = hull_quartic(grid[i], a, b, c);
    if (g_prev < 0.0 && g >= 0.0) {
      const double u =
          g == 0.0 ? grid[i] : polish_root(grid[i - 1], grid[i], a, b, c);
      const double obj = curve_objective(u, a, b, c);
      if (obj < best_obj) {
        best_obj = obj;
        best_u = u;
      }
    }
    g_prev = g;
  }
  return {best_u, c / best_u};
}

Point2 project_halfplane(double a, double b, double sigma) {
  if (sigma != 1.0 && sigma != -1.0)
    throw std::invalid_argument("project_halfplane: sigma must be +1 or -1");
  if (sigma * a >= 0.0) return {a, b};
  return {0.0, b};
}

Point2 project_constraint(double p, double q, const HullConstraint& k) {
  if (k.degenerate) {
    if (k.sigma == 0.0) return {p, q};
    return project_halfplane(p, q, k.sigma);
  }
  const double flip = k.sigma * k.tau;
  const Point2 uv = project_hull(k.sigma * p, flip * q, k.c);
  return {k.sigma * uv.u, flip * uv.v};
}

}  // namespace branchhull
