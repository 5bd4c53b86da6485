#ifndef BRANCHHULL_CORE_HPP_
#define BRANCHHULL_CORE_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "branchhull/random.hpp"

namespace branchhull {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sign with sign(0) = 0.
inline double sign_of(double x) { return (x > 0.0) - (x < 0.0); }

enum class NoiseKind { kNone, kUniformSymmetric, kOneSidedUniform };

/// Multiplicative noise model for y = (Bh) o (Cm) o (1 + xi).
///
/// `alpha` is the half-width of the sampling interval. `epsilon` is filled in
/// by the generator with the realized sup-norm of xi and never exceeds alpha.
struct NoiseModel {
  NoiseKind kind = NoiseKind::kNone;
  double alpha = 0.0;
  double epsilon = 0.0;

  static NoiseModel none() { return {}; }
  static NoiseModel uniform(double alpha) {
    return {NoiseKind::kUniformSymmetric, alpha, 0.0};
  }
  static NoiseModel one_sided(double alpha) {
    return {NoiseKind::kOneSidedUniform, alpha, 0.0};
  }
};

const char* to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

enum class TargetKind { kStandardBasis, kGaussian };

const char* to_string(TargetKind kind);
TargetKind target_kind_from_string(const std::string& name);

/// Observable data of one recovery problem. Row l of B is b_l^T, row l of C
/// is c_l^T, and s holds the known signs of Bh (entries in {-1, 0, +1}).
struct ProblemInstance {
  Matrix B;
  Matrix C;
  Vector y;
  Vector s;
  std::uint64_t seed = 0;
  NoiseModel noise;

  int L() const { return static_cast<int>(B.rows()); }
  int K() const { return static_cast<int>(B.cols()); }
  int N() const { return static_cast<int>(C.cols()); }

  /// Throws std::invalid_argument when the shapes disagree or a sign entry
  /// is outside {-1, 0, +1}.
  void validate() const;
};

/// Hidden quantities behind a generated instance.
struct GroundTruth {
  Vector h;
  Vector m;
  Vector xi;
  Vector y_hat;
};

/// Representative of the scaling class of (h, m) with equal norms.
struct BalancedSignal {
  Vector h;
  Vector m;
};

/// Builds an instance from explicit data. y = (B h) o (C m) o (1 + xi),
/// s = sign(B h). The generator routes through this after sampling.
std::pair<ProblemInstance, GroundTruth> make_instance(Matrix B, Matrix C,
                                                      Vector h, Vector m,
                                                      Vector xi);

/// Samples an instance from the Gaussian model.
///
/// Draw order from the seeded stream: B column-major, C column-major, h, m,
/// xi. Rows with b_l^T h = 0 or c_l^T m = 0 are redrawn afterwards (B row
/// then C row, in row order) until nondegenerate.
std::pair<ProblemInstance, GroundTruth> generate_instance(int K, int N, int L,
                                                          NoiseModel noise,
                                                          TargetKind target,
                                                          std::uint64_t seed);

/// Rescales (h, m) to (h sqrt(|m|/|h|), m sqrt(|h|/|m|)).
BalancedSignal balance(const Vector& h, const Vector& m);

struct RecoveryError {
  double absolute = 0.0;
  double relative = 0.0;
  double theorem2_bound = 0.0;
};

/// Error of a recovered pair against the balanced ground truth, together
/// with the noisy-case bound 4 sqrt(eps) sqrt(|h||m|), eps = |xi|_inf.
RecoveryError recovery_error(const Vector& h_star, const Vector& m_star,
                             const GroundTruth& truth);

/// 4 sqrt(eps) sqrt(h_norm m_norm).
double noise_error_bound(double epsilon, double h_norm, double m_norm);

/// True iff every row satisfies sign(y) (b^T h)(c^T m) >= |y| - tol and
/// s (b^T h) >= -tol.
bool check_feasible(const ProblemInstance& instance, const Vector& h,
                    const Vector& m, double tol);

/// Largest violation over all rows of the two constraints above (>= 0).
double max_violation(const ProblemInstance& instance, const Vector& h,
                     const Vector& m);

}  // namespace branchhull

#endif  // BRANCHHULL_CORE_HPP_
