#include "branchhull/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace branchhull {

const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kNone:
      return "none";
    case NoiseKind::kUniformSymmetric:
      return "uniform";
    case NoiseKind::kOneSidedUniform:
      return "one-sided";
  }
  return "none";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "none") return NoiseKind::kNone;
  if (name == "uniform") return NoiseKind::kUniformSymmetric;
  if (name == "one-sided") return NoiseKind::kOneSidedUniform;
  throw std::invalid_argument("unknown noise kind '" + name + "'");
}

const char* to_string(TargetKind kind) {
  return kind == TargetKind::kStandardBasis ? "standard-basis" : "gaussian";
}

TargetKind target_kind_from_string(const std::string& name) {
  if (name == "standard-basis") return TargetKind::kStandardBasis;
  if (name == "gaussian") return TargetKind::kGaussian;
  throw std::invalid_argument("unknown target kind '" + name + "'");
}

void ProblemInstance::validate() const {
  const auto rows = B.rows();
  if (rows < 1 || B.cols() < 1 || C.cols() < 1)
    throw std::invalid_argument("instance dimensions must be positive");
  if (C.rows() != rows || y.size() != rows || s.size() != rows)
    throw std::invalid_argument(
        "B, C, y and s must share the measurement dimension L");
  for (Eigen::Index l = 0; l < rows; ++l) {
    if (s[l] != -1.0 && s[l] != 0.0 && s[l] != 1.0)
      throw std::invalid_argument("sign vector entries must be -1, 0 or +1");
    if (!std::isfinite(y[l]))
      throw std::invalid_argument("measurements must be finite");
  }
  if (!B.allFinite() || !C.allFinite())
    throw std::invalid_argument("subspace matrices must be finite");
}

std::pair<ProblemInstance, GroundTruth> make_instance(Matrix B, Matrix C,
                                                      Vector h, Vector m,
                                                      Vector xi) {
  if (B.rows() != C.rows() || B.cols() != h.size() || C.cols() != m.size() ||
      xi.size() != B.rows())
    throw std::invalid_argument("make_instance: inconsistent dimensions");
  const Vector w = B * h;
  const Vector x = C * m;

  GroundTruth truth;
  truth.y_hat = w.cwiseProduct(x);
  ProblemInstance instance;
  instance.y = truth.y_hat.cwiseProduct((1.0 + xi.array()).matrix());
  instance.s = w.unaryExpr([](double v) { return sign_of(v); });
  instance.B = std::move(B);
  instance.C = std::move(C);
  instance.noise.epsilon = xi.size() ? xi.lpNorm<Eigen::Infinity>() : 0.0;
  truth.h = std::move(h);
  truth.m = std::move(m);
  truth.xi = std::move(xi);
  return {std::move(instance), std::move(truth)};
}

namespace {

void fill_gaussian(Rng& rng, Matrix& a) {
  // Eigen storage is column-major, so linear order is the documented order.
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.gaussian();
}

Vector gaussian_target(Rng& rng, int dim) {
  Vector v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = rng.gaussian();
  } while (v.isZero(0.0));
  return v;
}

}  // namespace

std::pair<ProblemInstance, GroundTruth> generate_instance(int K, int N, int L,
                                                          NoiseModel noise,
                                                          TargetKind target,
                                                          std::uint64_t seed) {
  if (K < 1 || N < 1 || L < 1)
    throw std::invalid_argument("generate_instance: K, N, L must be >= 1");
  if (!(noise.alpha >= 0.0))
    throw std::invalid_argument("generate_instance: noise alpha must be >= 0");

  Rng rng(seed);
  Matrix B(L, K);
  Matrix C(L, N);
  fill_gaussian(rng, B);
  fill_gaussian(rng, C);

  Vector h, m;
  if (target == TargetKind::kStandardBasis) {
    h = Vector::Unit(K, 0);
    m = Vector::Unit(N, 0);
  } else {
    h = gaussian_target(rng, K);
    m = gaussian_target(rng, N);
  }

  auto draw_xi = [&]() {
    switch (noise.kind) {
      case NoiseKind::kUniformSymmetric:
        return rng.uniform(-noise.alpha, noise.alpha);
      case NoiseKind::kOneSidedUniform:
        return rng.uniform(-noise.alpha, 0.0);
      case NoiseKind::kNone:
        break;
    }
    return 0.0;
  };
  Vector xi(L);
  for (int l = 0; l < L; ++l) xi[l] = draw_xi();

  for (int l = 0; l < L; ++l) {
    while (B.row(l).dot(h) == 0.0 || C.row(l).dot(m) == 0.0) {
      for (int k = 0; k < K; ++k) B(l, k) = rng.gaussian();
      for (int n = 0; n < N; ++n) C(l, n) = rng.gaussian();
    }
    // xi = -1 would zero the measurement.
    while (1.0 + xi[l] == 0.0) xi[l] = draw_xi();
  }

  auto [instance, truth] =
      make_instance(std::move(B), std::move(C), std::move(h), std::move(m),
                    std::move(xi));
  instance.seed = seed;
  instance.noise.kind = noise.kind;
  instance.noise.alpha = noise.alpha;
  return {std::move(instance), std::move(truth)};
}

BalancedSignal balance(const Vector& h, const Vector& m) {
  const double nh = h.norm();
  const double nm = m.norm();
  if (nh == 0.0 || nm == 0.0)
    throw std::invalid_argument("balance: input vectors must be nonzero");
  if (nh == nm) return {h, m};
  return {h * std::sqrt(nm / nh), m * std::sqrt(nh / nm)};
}

double noise_error_bound(double epsilon, double h_norm, double m_norm) {
  return 4.0 * std::sqrt(epsilon) * std::sqrt(h_norm * m_norm);
}

RecoveryError recovery_error(const Vector& h_star, const Vector& m_star,
                             const GroundTruth& truth) {
  const BalancedSignal target = balance(truth.h, truth.m);
  if (h_star.size() != target.h.size() || m_star.size() != target.m.size())
    throw std::invalid_argument("recovery_error: dimension mismatch");
  RecoveryError err;
  err.absolute = std::sqrt((h_star - target.h).squaredNorm() +
                           (m_star - target.m).squaredNorm());
  err.relative = err.absolute / std::sqrt(target.h.squaredNorm() +
                                          target.m.squaredNorm());
  const double eps = truth.xi.size() ? truth.xi.lpNorm<Eigen::Infinity>() : 0.0;
  err.theorem2_bound = noise_error_bound(eps, truth.h.norm(), truth.m.norm());
  return err;
}

double max_violation(const ProblemInstance& instance, const Vector& h,
                     const Vector& m) {
  const Vector p = instance.B * h;
  const Vector q = instance.C * m;
  double worst = 0.0;
  for (int l = 0; l < instance.L(); ++l) {
    const double y = instance.y[l];
    worst = std::max(worst, std::abs(y) - sign_of(y) * p[l] * q[l]);
    worst = std::max(worst, -instance.s[l] * p[l]);
  }
  return worst;
}

bool check_feasible(const ProblemInstance& instance, const Vector& h,
                    const Vector& m, double tol) {
  return max_violation(instance, h, m) <= tol;
}

}  // namespace branchhull
