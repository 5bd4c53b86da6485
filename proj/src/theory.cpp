#include "branchhull/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "branchhull/parallel.hpp"
#include "branchhull/random.hpp"

namespace branchhull {

namespace {

using BigInt = boost::multiprecision::cpp_int;

// numerator / 2^exponent, correctly rounded to within a few ulps.
double ratio_to_double(const BigInt& numerator, int exponent) {
  if (numerator == 0) return 0.0;
  const int bits = static_cast<int>(boost::multiprecision::msb(numerator)) + 1;
  const int shift = std::max(0, bits - 63);
  const auto top = static_cast<std::uint64_t>(numerator >> shift);
  return std::ldexp(static_cast<double>(top), shift - exponent);
}

// sum_{k=lo}^{hi} C(tosses, k).
BigInt binomial_sum(int tosses, int lo, int hi) {
  BigInt sum = 0;
  BigInt c = 1;  // C(tosses, k)
  for (int k = 0; k <= std::min(hi, tosses); ++k) {
    if (k >= lo) sum += c;
    c = c * (tosses - k) / (k + 1);
  }
  return sum;
}

Vector random_unit(Rng& rng, int n) {
  Vector x(n);
  double norm = 0.0;
  do {
    for (int i = 0; i < n; ++i) x[i] = rng.gaussian();
    norm = x.norm();
  } while (norm == 0.0);
  return x / norm;
}

Vector perturb_on_sphere(Rng& rng, const Vector& x, double radius) {
  Vector z = x;
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] += radius * rng.gaussian();
  const double norm = z.norm();
  return norm > 0.0 ? Vector(z / norm) : x;
}

}  // namespace

double binomial_tail_at_least(int heads, int tosses) {
  if (tosses < 0) throw std::invalid_argument("tosses must be >= 0");
  if (heads <= 0) return 1.0;
  if (heads > tosses) return 0.0;
  return ratio_to_double(binomial_sum(tosses, heads, tosses), tosses);
}

double wendel_probability(int n, int m) {
  if (n < 1 || m < 1)
    throw std::invalid_argument("wendel_probability: need n >= 1 and m >= 1");
  // 1 - 2^{-(m-1)} sum_{k<n} C(m-1, k), kept exact as an integer numerator.
  const int tosses = m - 1;
  const BigInt total = BigInt(1) << tosses;
  const BigInt below = binomial_sum(tosses, 0, n - 1);
  return ratio_to_double(total - below, tosses);
}

double hoeffding_tail_bound(int n, int m) {
  if (m < 1 || n < 0)
    throw std::invalid_argument("hoeffding_tail_bound: need m >= 1, n >= 0");
  if (2 * n > m)
    throw std::invalid_argument("hoeffding_tail_bound: need n <= m/2");
  const double gap = static_cast<double>(m - 2 * n);
  return -std::expm1(-gap * gap / (2.0 * m));
}

double theorem1_probability(int K, int N, int L) {
  const long threshold = 2L * N + 2L * K - 3;
  if (L <= threshold || L < 2) return 0.0;
  const double gap = static_cast<double>(L - threshold);
  return -std::expm1(-gap * gap / (2.0 * (L - 1)));
}

TheoryBound theory_bound(int L, int K, int N) {
  if (L < 1 || K < 1 || N < 1)
    throw std::invalid_argument("theory_bound: dimensions must be positive");
  TheoryBound t;
  t.L = L;
  t.K = K;
  t.N = N;
  t.theorem1_bound = theorem1_probability(K, N, L);
  const int heads = N + K - 2;
  const int tosses = L - 1;
  t.wendel_exact = binomial_tail_at_least(heads, tosses);
  t.hoeffding_bound =
      (tosses >= 1 && 2 * heads <= tosses) ? hoeffding_tail_bound(heads, tosses)
                                           : 0.0;
  return t;
}

ShiftedNoise shift_noise(const Vector& xi) {
  if (xi.size() == 0) throw std::invalid_argument("shift_noise: empty noise");
  for (Eigen::Index l = 0; l < xi.size(); ++l) {
    if (!std::isfinite(xi[l]))
      throw std::invalid_argument("shift_noise: non-finite noise");
    if (xi[l] < -1.0)
      throw std::invalid_argument("shift_noise: noise below -1 flips a sign");
  }
  ShiftedNoise out;
  out.s_shift = std::max(1.0 + xi.maxCoeff(), 1.0);
  out.eta.resize(xi.size());
  for (Eigen::Index l = 0; l < xi.size(); ++l) {
    // Written as (1 + xi) / s - 1 so that s (1 + eta) reproduces 1 + xi.
    const double eta = (1.0 + xi[l]) / out.s_shift - 1.0;
    out.eta[l] = std::clamp(eta, -1.0, 0.0);
  }
  return out;
}

// ---------------------------------------------------------------------------

MinNormPoint min_norm_point(const Matrix& A, int max_iters) {
  const Eigen::Index m = A.cols();
  if (m == 0) throw std::invalid_argument("min_norm_point: no vectors");
  std::vector<double> weight(m, 0.0);
  weight[0] = 1.0;
  Vector x = A.col(0);

  MinNormPoint out;
  for (int it = 0; it <= max_iters; ++it) {
    if (it > 0 && it % 128 == 0) {
      // Refresh the iterate from its weights to stop drift.
      x.setZero();
      for (Eigen::Index i = 0; i < m; ++i)
        if (weight[i] > 0.0) x += weight[i] * A.col(i);
    }
    const Vector inner = A.transpose() * x;
    Eigen::Index s = 0;
    const double min_inner = inner.minCoeff(&s);
    const double xx = x.squaredNorm();
    const double norm = std::sqrt(xx);

    out.iters = it;
    out.norm = norm;
    out.gap = xx - min_inner;
    if (norm <= kCoverageNormTol) {
      out.covered = true;
      break;
    }
    // min_i <x, a_i> / |x| lower-bounds the distance from 0 to the hull.
    if (min_inner > kCoverageNormTol * norm &&
        (out.gap <= kCoverageGapTol || min_inner > 2.0 * kCoverageNormTol * norm)) {
      out.covered = false;
      break;
    }
    if (it == max_iters) break;

    Eigen::Index v = -1;
    double max_active = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (weight[i] > 0.0 && inner[i] > max_active) {
        max_active = inner[i];
        v = i;
      }
    }

    const double fw_gap = xx - min_inner;
    const double away_gap = max_active - xx;
    if (fw_gap >= away_gap) {
      const Vector d = A.col(s) - x;
      const double dd = d.squaredNorm();
      if (dd == 0.0) break;
      const double gamma = std::clamp(-x.dot(d) / dd, 0.0, 1.0);
      for (double& w : weight) w *= (1.0 - gamma);
      weight[s] += gamma;
      x += gamma * d;
    } else {
      const Vector d = x - A.col(v);
      const double dd = d.squaredNorm();
      if (dd == 0.0) break;
      const double wv = weight[v];
      const double gamma_max = wv / (1.0 - wv);
      const double gamma = std::clamp(-x.dot(d) / dd, 0.0, gamma_max);
      for (double& w : weight) w *= (1.0 + gamma);
      weight[v] -= gamma;
      if (gamma >= gamma_max || weight[v] < 0.0) weight[v] = 0.0;
      x += gamma * d;
    }
  }
  out.point = x;
  return out;
}

bool hemisphere_coverage(const Matrix& vectors) {
  if (vectors.cols() == 0 || vectors.rows() == 0)
    throw std::invalid_argument("hemisphere_coverage: no vectors");
  for (Eigen::Index i = 0; i < vectors.cols(); ++i) {
    if (std::abs(vectors.col(i).norm() - 1.0) > 1e-9)
      throw std::invalid_argument("hemisphere_coverage: vectors must be unit");
  }
  const MinNormPoint r = min_norm_point(vectors);
  if (!r.covered)
    throw IndeterminateCoverage("hemisphere_coverage: no verdict after " +
                                std::to_string(r.iters) + " iterations");
  return *r.covered;
}

const char* to_string(CoverDistribution d) {
  return d == CoverDistribution::kUniform ? "uniform" : "normalized-ratio";
}

CoverDistribution cover_distribution_from_string(const std::string& s) {
  if (s == "uniform") return CoverDistribution::kUniform;
  if (s == "normalized-ratio") return CoverDistribution::kNormalizedRatio;
  throw std::invalid_argument("unknown distribution '" + s + "'");
}

CoverageEstimate mc_sphere_covering(int n, int m, int trials,
                                    std::uint64_t seed,
                                    CoverDistribution distribution) {
  if (n < 1 || m < 1)
    throw std::invalid_argument("mc_sphere_covering: need n >= 1, m >= 1");
  if (trials < 100)
    throw std::invalid_argument("mc_sphere_covering: need trials >= 100");

  const int n_c = (n + 1) / 2;
  std::vector<signed char> outcome(trials, 0);  // 1 covered, 0 not, -1 unknown
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(t)}));
    Matrix A(n, m);
    for (int j = 0; j < m; ++j) {
      if (distribution == CoverDistribution::kUniform) {
        A.col(j) = random_unit(rng, n);
        continue;
      }
      Vector z(n);
      double norm = 0.0;
      do {
        const double c1 = rng.gaussian();
        for (int i = 0; i < n_c; ++i) z[i] = rng.gaussian() / c1;
        if (n > n_c) {
          const double b1 = rng.gaussian();
          for (int i = n_c; i < n; ++i) z[i] = rng.gaussian() / b1;
        }
        norm = z.norm();
      } while (!(norm > 0.0) || !std::isfinite(norm));
      A.col(j) = z / norm;
    }
    try {
      outcome[t] = hemisphere_coverage(A) ? 1 : 0;
    } catch (const IndeterminateCoverage&) {
      outcome[t] = -1;
    }
  });

  CoverageEstimate est;
  for (signed char o : outcome) {
    if (o < 0)
      ++est.indeterminate;
    else
      est.covered += o;
  }
  if (est.indeterminate * 100 > trials)
    throw std::runtime_error("mc_sphere_covering: " +
                             std::to_string(est.indeterminate) +
                             " indeterminate samples exceed 1% of trials");
  est.trials = trials - est.indeterminate;
  est.rate = static_cast<double>(est.covered) / est.trials;
  est.ci_halfwidth = 1.96 * std::sqrt(est.rate * (1.0 - est.rate) / est.trials);
  return est;
}

// ---------------------------------------------------------------------------

double ramp_weight(double z) {
  if (z < -0.1) return 1.0;
  if (z <= 0.0) return -z / 0.1;
  return 0.0;
}

int indicator_count(const Matrix& B, const Matrix& C, const Vector& x,
                    const Vector& y) {
  const Vector bx = B * x;
  const Vector cy = C * y;
  int count = 0;
  for (Eigen::Index l = 0; l < bx.size(); ++l)
    count += (bx[l] <= 0.0 && cy[l] <= 0.0);
  return count;
}

double relaxed_count(const Matrix& B, const Matrix& C, const Vector& x,
                     const Vector& y) {
  const Vector bx = B * x;
  const Vector cy = C * y;
  double sum = 0.0;
  for (Eigen::Index l = 0; l < bx.size(); ++l)
    sum += ramp_weight(bx[l]) * ramp_weight(cy[l]);
  return sum;
}

CountEstimate lemma6_count(const Matrix& B, const Matrix& C, int samples,
                           std::uint64_t seed) {
  if (samples < 1000)
    throw std::invalid_argument("lemma6_count: need samples >= 1000");
  if (B.rows() != C.rows() || B.rows() < 1 || B.cols() < 1 || C.cols() < 1)
    throw std::invalid_argument("lemma6_count: B and C need matching rows");
  const int K = static_cast<int>(B.cols());
  const int N = static_cast<int>(C.cols());
  Rng rng(seed);

  CountEstimate est;
  Vector fx, fy, gx, gy;
  double best_f = std::numeric_limits<double>::infinity();
  double best_g = std::numeric_limits<double>::infinity();
  auto evaluate = [&](const Vector& x, const Vector& y, double& f, double& g) {
    f = indicator_count(B, C, x, y);
    g = relaxed_count(B, C, x, y);
    if (f < g) est.pointwise_ok = false;
    ++est.evaluations;
  };

  for (int i = 0; i < samples; ++i) {
    const Vector x = random_unit(rng, K);
    const Vector y = random_unit(rng, N);
    double f, g;
    evaluate(x, y, f, g);
    if (f < best_f) {
      best_f = f;
      fx = x;
      fy = y;
    }
    if (g < best_g) {
      best_g = g;
      gx = x;
      gy = y;
    }
  }

  // Random local search; ties are accepted so plateaus of f can be crossed.
  static constexpr double kRadii[] = {0.5, 0.2, 0.1, 0.05, 0.02, 0.005};
  const int budget = std::max(2000, samples / 2);
  auto descend = [&](Vector& x, Vector& y, double& best, bool on_f) {
    for (int i = 0; i < budget; ++i) {
      const double r = kRadii[rng.next_u64() % std::size(kRadii)];
      const Vector xn = perturb_on_sphere(rng, x, r);
      const Vector yn = perturb_on_sphere(rng, y, r);
      double f, g;
      evaluate(xn, yn, f, g);
      const double value = on_f ? f : g;
      if (value <= best) {
        best = value;
        x = xn;
        y = yn;
      }
    }
  };
  descend(fx, fy, best_f, true);
  descend(gx, gy, best_g, false);

  est.min_sampled_count = best_f;
  est.relaxed_min = best_g;
  return est;
}

DirectionConditions direction_conditions(const Matrix& B, const Matrix& C,
                                         const Vector& dh, const Vector& dm) {
  const Eigen::Index K = B.cols();
  const Eigen::Index N = C.cols();
  if (dh.size() != K - 1 || dm.size() != N - 1)
    throw std::invalid_argument("direction_conditions: direction size");
  DirectionConditions out;
  for (Eigen::Index l = 0; l < B.rows(); ++l) {
    const double bh =
        sign_of(B(l, 0)) * B.row(l).tail(K - 1).dot(dh.transpose());
    const double cm =
        sign_of(C(l, 0)) * C.row(l).tail(N - 1).dot(dm.transpose());
    if (cm > 0.0) continue;
    if (bh <= 0.0) out.first = true;
    if (bh >= 0.0) out.second = true;
    if (out.first && out.second) break;
  }
  return out;
}

Lemma5Report lemma5_conditions(const Matrix& B, const Matrix& C,
                               int directions, std::uint64_t seed) {
  if (B.rows() != C.rows() || B.rows() < 1)
    throw std::invalid_argument("lemma5_conditions: B and C need matching rows");
  const int K = static_cast<int>(B.cols());
  const int N = static_cast<int>(C.cols());
  if (K < 2 || N < 2)
    throw std::invalid_argument("lemma5_conditions: need K, N >= 2");
  if (directions < 1)
    throw std::invalid_argument("lemma5_conditions: need directions >= 1");
  const int L = static_cast<int>(B.rows());

  Lemma5Report rep;
  Rng rng(seed);
  for (int i = 0; i < directions; ++i) {
    const Vector dh = random_unit(rng, K - 1);
    const Vector dm = random_unit(rng, N - 1);
    const DirectionConditions dc = direction_conditions(B, C, dh, dm);
    if (!dc.first || !dc.second) ++rep.failed_directions;
  }
  rep.sampled_ok = rep.failed_directions == 0;

  auto coverage = [&](double b_sign) -> std::optional<bool> {
    Matrix A(K + N - 2, L);
    for (int l = 0; l < L; ++l) {
      A.col(l).head(K - 1) =
          (b_sign * sign_of(B(l, 0))) * B.row(l).tail(K - 1).transpose();
      A.col(l).tail(N - 1) = -sign_of(C(l, 0)) * C.row(l).tail(N - 1).transpose();
      const double norm = A.col(l).norm();
      if (!(norm > 0.0)) return std::nullopt;
      A.col(l) /= norm;
    }
    try {
      return hemisphere_coverage(A);
    } catch (const IndeterminateCoverage&) {
      return std::nullopt;
    }
  };
  rep.first_covered = coverage(-1.0);
  rep.second_covered = coverage(1.0);

  rep.holds = rep.sampled_ok && rep.first_covered.value_or(true) &&
              rep.second_covered.value_or(true);
  return rep;
}

}  // namespace branchhull
