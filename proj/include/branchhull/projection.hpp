#ifndef BRANCHHULL_PROJECTION_HPP_
#define BRANCHHULL_PROJECTION_HPP_

namespace branchhull {

struct Point2 {
  double u = 0.0;
  double v = 0.0;
};

/// Per-measurement feasible set {(p, q) : tau p q >= c, sigma p >= 0}.
///
/// In the normalized coordinates u = sigma p, v = sigma tau q the set is
/// {uv >= c, u >= 0}, the convex hull of one hyperbola branch. When the
/// measurement is zero (`degenerate`) only the halfplane sigma p >= 0 is left.
struct HullConstraint {
  double c = 0.0;
  double sigma = 1.0;
  double tau = 1.0;
  bool degenerate = false;

  /// Builds the constraint for measurement y with known sign s of b^T h.
  /// Throws std::invalid_argument for s = 0 with y != 0: both hyperbola
  /// branches would be admissible and the set is not convex.
  static HullConstraint from_measurement(double y, double s);
};

/// Euclidean projection of (a, b) onto {(u, v) : uv >= c, u >= 0}, c > 0.
///
/// Points outside the set land on the curve uv = c at the positive root of
/// u^4 - a u^3 + b c u - c^2 with the smallest distance to (a, b); roots are
/// bracketed on a 64-point log grid and polished by safeguarded Newton.
/// Throws std::invalid_argument for c <= 0 or non-finite input.
Point2 project_hull(double a, double b, double c);

/// Projection onto {(p, q) : sigma p >= 0}, sigma in {-1, +1}.
Point2 project_halfplane(double a, double b, double sigma);

/// Projection of (p, q) onto the set described by `k`.
Point2 project_constraint(double p, double q, const HullConstraint& k);

/// u^4 - a u^3 + b c u - c^2, the stationarity condition of the hull
/// projection along the curve.
double hull_quartic(double u, double a, double b, double c);

}  // namespace branchhull

#endif  // BRANCHHULL_PROJECTION_HPP_
