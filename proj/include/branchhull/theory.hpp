#ifndef BRANCHHULL_THEORY_HPP_
#define BRANCHHULL_THEORY_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "branchhull/core.hpp"

namespace branchhull {

// ---------------------------------------------------------------------------
// Closed-form probabilities
// ---------------------------------------------------------------------------

/// P(Bin(tosses, 1/2) >= heads), from exact integer binomials.
double binomial_tail_at_least(int heads, int tosses);

/// Probability that m random hemispheres of S^{n-1}, drawn from any
/// negation-symmetric law in general position, cover the sphere:
/// 1 - 2^{-(m-1)} sum_{k<n} C(m-1, k), i.e. P(at least n heads in m-1 tosses).
/// Requires n >= 1 and m >= 1.
double wendel_probability(int n, int m);

/// 1 - exp(-(m - 2n)^2 / (2m)), a lower bound on P(Bin(m, 1/2) >= n).
/// Requires 0 <= n <= m/2 and m >= 1.
double hoeffding_tail_bound(int n, int m);

/// 1 - exp(-[L - (2N + 2K - 3)]^2 / (2(L - 1))) when L > 2N + 2K - 3, else 0.
double theorem1_probability(int K, int N, int L);

/// All three bounds for one (L, K, N). The coverage event needs
/// n = N + K - 2 heads among L - 1 tosses, so
///   wendel_exact    = wendel_probability(n, L)        (exact tail)
///   hoeffding_bound = hoeffding_tail_bound(n, L - 1)  (0 if n > (L-1)/2)
/// and hoeffding_bound coincides with theorem1_bound.
struct TheoryBound {
  int L = 0;
  int K = 0;
  int N = 0;
  double theorem1_bound = 0.0;
  double wendel_exact = 0.0;
  double hoeffding_bound = 0.0;
};

TheoryBound theory_bound(int L, int K, int N);

// ---------------------------------------------------------------------------
// Noise shift
// ---------------------------------------------------------------------------

/// s_shift = max(1 + max xi, 1); eta = (1 - s_shift + xi) / s_shift.
/// eta lies in [-1, 0] and s_shift (1 + eta) = 1 + xi.
struct ShiftedNoise {
  double s_shift = 1.0;
  Vector eta;
};

/// Throws std::invalid_argument if any xi < -1 or xi is empty/non-finite.
ShiftedNoise shift_noise(const Vector& xi);

// ---------------------------------------------------------------------------
// Hemisphere coverage
// ---------------------------------------------------------------------------

/// Thrown when the min-norm-point iteration can neither certify coverage
/// nor separation within its iteration cap.
class IndeterminateCoverage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MinNormPoint {
  Vector point;
  double norm = 0.0;
  /// Wolfe gap |x|^2 - min_i <x, a_i>; bounds |x|^2 - |x*|^2.
  double gap = 0.0;
  int iters = 0;
  /// Decided verdict, empty when the cap was reached first.
  std::optional<bool> covered;
};

inline constexpr double kCoverageNormTol = 1e-7;
inline constexpr double kCoverageGapTol = 1e-10;
inline constexpr int kCoverageMaxIters = 100000;

/// Min-norm point of conv{columns of A} by away-step conditional gradient
/// with exact line search. Stops as soon as the norm drops to
/// kCoverageNormTol (covered) or the iterate separates every column by a
/// margin above kCoverageNormTol (not covered), which certifies that the
/// min-norm point is farther than kCoverageNormTol from the origin.
MinNormPoint min_norm_point(const Matrix& vectors,
                            int max_iters = kCoverageMaxIters);

/// True iff the closed hemispheres {d : <a_i, d> >= 0} centred at the columns
/// of `vectors` cover the unit sphere, i.e. 0 lies in their convex hull.
/// Columns must be unit vectors (within 1e-9).
/// Throws IndeterminateCoverage when no verdict is reached.
bool hemisphere_coverage(const Matrix& vectors);

enum class CoverDistribution { kUniform, kNormalizedRatio };

const char* to_string(CoverDistribution d);
CoverDistribution cover_distribution_from_string(const std::string& s);

struct CoverageEstimate {
  double rate = 0.0;
  double ci_halfwidth = 0.0;
  int trials = 0;
  int covered = 0;
  int indeterminate = 0;
};

/// Monte-Carlo coverage rate of m random hemispheres of S^{n-1}.
/// kNormalizedRatio draws each centre as the normalisation of
/// (c~/c_1, b~/b_1) with c~ in R^{ceil(n/2)}, b~ in R^{floor(n/2)} and all
/// entries standard normal. Trial t uses derive_seed({seed, t}).
/// Requires trials >= 100; throws std::runtime_error when more than 1% of
/// the trials are indeterminate.
CoverageEstimate mc_sphere_covering(int n, int m, int trials,
                                    std::uint64_t seed,
                                    CoverDistribution distribution);

// ---------------------------------------------------------------------------
// Product-sphere counting validators
// ---------------------------------------------------------------------------

/// Ramp lower bound of 1{z <= 0}: 1 below -0.1, -z/0.1 on [-0.1, 0], 0 above.
double ramp_weight(double z);

/// f(x, y) = sum_l 1{b_l^T x <= 0} 1{c_l^T y <= 0}.
int indicator_count(const Matrix& B, const Matrix& C, const Vector& x,
                    const Vector& y);

/// g(x, y) = sum_l w(b_l^T x) w(c_l^T y).
double relaxed_count(const Matrix& B, const Matrix& C, const Vector& x,
                     const Vector& y);

struct CountEstimate {
  /// Upper estimates of min f and min g over S^{K-1} x S^{N-1}.
  double min_sampled_count = 0.0;
  double relaxed_min = 0.0;
  /// f >= g held at every evaluated pair.
  bool pointwise_ok = true;
  int evaluations = 0;
};

/// Samples `samples` uniform pairs on S^{K-1} x S^{N-1}, then refines the
/// best pair of each of f and g by random local search on the spheres.
/// Requires samples >= 1000 and matching row counts.
CountEstimate lemma6_count(const Matrix& B, const Matrix& C, int samples,
                           std::uint64_t seed);

/// Existence of indices satisfying the two sign patterns for direction
/// (dh, dm) in R^{K-1} x R^{N-1}:
///   first:  sign(b_l1) b~_l^T dh <= 0 and sign(c_l1) c~_l^T dm <= 0
///   second: sign(b_k1) b~_k^T dh >= 0 and sign(c_k1) c~_k^T dm <= 0
struct DirectionConditions {
  bool first = false;
  bool second = false;
};

DirectionConditions direction_conditions(const Matrix& B, const Matrix& C,
                                         const Vector& dh, const Vector& dm);

struct Lemma5Report {
  bool holds = false;
  /// Every sampled direction satisfied both patterns.
  bool sampled_ok = false;
  int failed_directions = 0;
  /// Necessary conditions: hemispheres centred at
  /// (-sign(b_l1) b~_l, -sign(c_l1) c~_l) and (sign(b_l1) b~_l, -sign(c_l1) c~_l)
  /// cover S^{K+N-3}. Empty when the coverage test was indeterminate.
  std::optional<bool> first_covered;
  std::optional<bool> second_covered;
};

/// Sampled check of both sign patterns over `directions` random directions,
/// plus the two certified necessary coverage conditions. Requires K, N >= 2.
Lemma5Report lemma5_conditions(const Matrix& B, const Matrix& C,
                               int directions, std::uint64_t seed);

}  // namespace branchhull

#endif  // BRANCHHULL_THEORY_HPP_
