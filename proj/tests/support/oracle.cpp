#include "oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace branchhull::testing {

namespace {

// Row l in normalised coordinates: u = sigma b^T h, v = flip c^T m.
struct Row {
  Vector a;  // gradient of u in (h, m)
  Vector b;  // gradient of v in (h, m)
  double c = 0.0;
  bool sign_only = false;
  bool vacuous = false;
};

std::vector<Row> normalise(const ProblemInstance& inst) {
  const int K = inst.K();
  const int N = inst.N();
  std::vector<Row> rows;
  for (int l = 0; l < inst.L(); ++l) {
    const double sigma = inst.s[l];
    const double y = inst.y[l];
    const double tau = (y > 0) - (y < 0);
    Row r;
    r.a = Vector::Zero(K + N);
    r.b = Vector::Zero(K + N);
    r.a.head(K) = sigma * inst.B.row(l).transpose();
    r.b.tail(N) = sigma * tau * inst.C.row(l).transpose();
    r.c = std::abs(y);
    r.sign_only = (y == 0.0);
    r.vacuous = r.sign_only && sigma == 0.0;
    rows.push_back(r);
  }
  return rows;
}

bool strictly_feasible(const std::vector<Row>& rows, const Vector& x) {
  for (const Row& r : rows) {
    if (r.vacuous) continue;
    const double u = r.a.dot(x);
    if (!(u > 0.0)) return false;
    if (!r.sign_only && !(u * r.b.dot(x) - r.c > 0.0)) return false;
  }
  return true;
}

// Best strictly feasible point of a regular grid of `n` points per axis on
// the box centre +- half; returns false when there is none.
bool grid_search(const std::vector<Row>& rows, const Vector& centre,
                 double half, int n, Vector& best) {
  const int d = static_cast<int>(centre.size());
  std::vector<int> idx(d, 0);
  double best_obj = std::numeric_limits<double>::infinity();
  Vector x(d);
  for (;;) {
    for (int k = 0; k < d; ++k)
      x[k] = centre[k] - half + 2.0 * half * idx[k] / (n - 1);
    const double obj = x.squaredNorm();
    if (obj < best_obj && strictly_feasible(rows, x)) {
      best_obj = obj;
      best = x;
    }
    int k = 0;
    while (k < d && ++idx[k] == n) idx[k++] = 0;
    if (k == d) break;
  }
  return std::isfinite(best_obj);
}

double barrier_value(const std::vector<Row>& rows, const Vector& x, double t) {
  double f = t * x.squaredNorm();
  for (const Row& r : rows) {
    if (r.vacuous) continue;
    const double u = r.a.dot(x);
    if (!(u > 0.0)) return std::numeric_limits<double>::infinity();
    if (r.sign_only) {
      f -= std::log(u);
      continue;
    }
    const double D = u * r.b.dot(x) - r.c;
    if (!(D > 0.0)) return std::numeric_limits<double>::infinity();
    f -= std::log(D);
  }
  return f;
}

// Damped Newton on t |x|^2 - sum log(u v - c) (or -log u for sign rows).
void centre(const std::vector<Row>& rows, Vector& x, double t) {
  const int d = static_cast<int>(x.size());
  for (int it = 0; it < 200; ++it) {
    Vector g = 2.0 * t * x;
    Matrix H = 2.0 * t * Matrix::Identity(d, d);
    for (const Row& r : rows) {
      if (r.vacuous) continue;
      const double u = r.a.dot(x);
      if (r.sign_only) {
        g -= r.a / u;
        H += r.a * r.a.transpose() / (u * u);
        continue;
      }
      const double v = r.b.dot(x);
      const double D = u * v - r.c;
      const Vector gD = v * r.a + u * r.b;
      g -= gD / D;
      H += gD * gD.transpose() / (D * D) -
           (r.a * r.b.transpose() + r.b * r.a.transpose()) / D;
    }
    const Vector step = -H.ldlt().solve(g);
    const double decrement = -g.dot(step);
    if (decrement <= 1e-14) return;
    const double f0 = barrier_value(rows, x, t);
    double alpha = 1.0;
    for (int ls = 0; ls < 60; ++ls) {
      if (barrier_value(rows, x + alpha * step, t) <=
          f0 - 0.25 * alpha * decrement)
        break;
      alpha *= 0.5;
    }
    x += alpha * step;
  }
}

}  // namespace

SolverResult solve_bh_oracle(const ProblemInstance& inst,
                             const OracleGrid& grid) {
  inst.validate();
  const int K = inst.K();
  const int N = inst.N();
  if (K + N > 4)
    throw std::invalid_argument("solve_bh_oracle: needs K + N <= 4");
  const std::vector<Row> rows = normalise(inst);
  const int d = K + N;
  const int n = grid.points_per_axis;

  Vector x(d);
  double half = 1.0;
  bool found = false;
  for (int expand = 0; expand < 24 && !found; ++expand, half *= 2.0)
    found = grid_search(rows, Vector::Zero(d), half, n, x);
  if (!found)
    throw std::runtime_error("solve_bh_oracle: no strictly feasible grid point");
  half /= 2.0;
  for (int round = 0; round < grid.refinement_rounds; ++round) {
    half = 2.0 * (2.0 * half / (n - 1));
    Vector refined = x;
    if (grid_search(rows, x, half, n, refined)) x = refined;
  }

  double nu = 0.0;
  for (const Row& r : rows)
    if (!r.vacuous) nu += r.sign_only ? 1.0 : 2.0;
  double t = 1.0;
  int outer = 0;
  for (; outer < 60; ++outer) {
    centre(rows, x, t);
    if (nu / t <= grid.gap_tol * std::max(1.0, x.squaredNorm())) break;
    t *= 8.0;
  }

  SolverResult res;
  res.h_star = x.head(K);
  res.m_star = x.tail(N);
  res.objective = x.squaredNorm();
  res.status = SolverStatus::kConverged;
  res.iters = outer;
  return res;
}

Point2 project_hull_oracle(double a, double b, double c) {
  if (a > 0.0 && b > 0.0 && a * b >= c) return {a, b};
  auto objective = [&](double u) {
    return (u - a) * (u - a) + (c / u - b) * (c / u - b);
  };
  // The curve point (sqrt c, sqrt c) bounds the distance, so the foot lies
  // in u in [c / (|b| + R), |a| + R].
  const double R = std::abs(a) + std::abs(b) + 2.0 * std::sqrt(c);
  const double lo = 0.5 * c / (std::abs(b) + R);
  const double hi = 2.0 * (std::abs(a) + R);
  constexpr int kPoints = 20000;
  const double step = std::log(hi / lo) / (kPoints - 1);
  int best = 0;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kPoints; ++i) {
    const double obj = objective(lo * std::exp(step * i));
    if (obj < best_obj) {
      best_obj = obj;
      best = i;
    }
  }
  double x0 = lo * std::exp(step * std::max(best - 1, 0));
  double x3 = lo * std::exp(step * std::min(best + 1, kPoints - 1));
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = x3 - phi * (x3 - x0);
  double x2 = x0 + phi * (x3 - x0);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < 200 && x3 - x0 > 1e-15 * x3; ++it) {
    if (f1 < f2) {
      x3 = x2;
      x2 = x1;
      f2 = f1;
      x1 = x3 - phi * (x3 - x0);
      f1 = objective(x1);
    } else {
      x0 = x1;
      x1 = x2;
      f1 = f2;
      x2 = x0 + phi * (x3 - x0);
      f2 = objective(x2);
    }
  }
  const double u = f1 < f2 ? x1 : x2;
  return {u, c / u};
}

}  // namespace branchhull::testing
