#include "branchhull/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "branchhull/projection.hpp"
#include "branchhull/random.hpp"

namespace branchhull {

namespace {

constexpr int kRhoCheckPeriod = 25;
constexpr int kMaxRhoUpdates = 30;
constexpr double kRhoImbalance = 10.0;
constexpr int kDivergenceWindow = 1000;
constexpr double kDriftStability = 1e-4;
constexpr double kDriftPersistence = 0.999;
constexpr double kDriftFloor = 1e-6;
constexpr double kCertificateTol = 1e-6;

double soft_threshold(double x, double kappa) {
  if (x > kappa) return x - kappa;
  if (x < -kappa) return x + kappa;
  return 0.0;
}

// Shared loop for both programs. `robust` is null for the plain program.
SolverResult run_splitting(const ProblemInstance& inst,
                           const SolverOptions& opts,
                           const RbhOptions* robust) {
  inst.validate();
  opts.validate();
  const int L = inst.L();
  const int K = inst.K();
  const int N = inst.N();
  const Matrix& B = inst.B;
  const Matrix& C = inst.C;

  std::vector<HullConstraint> rows(L);
  for (int l = 0; l < L; ++l)
    rows[l] = HullConstraint::from_measurement(inst.y[l], inst.s[l]);

  double rho = opts.rho;
  const Matrix BtB = B.transpose() * B;
  const Matrix CtC = C.transpose() * C;
  Eigen::LLT<Matrix> chol_h;
  Eigen::LLT<Matrix> chol_m;
  auto factor = [&] {
    chol_h.compute(rho * BtB + 2.0 * Matrix::Identity(K, K));
    chol_m.compute(rho * CtC + 2.0 * Matrix::Identity(N, N));
  };
  factor();

  Vector h = Vector::Zero(K);
  Vector m = Vector::Zero(N);
  Vector e = robust ? Vector::Zero(L) : Vector();
  Vector u = Vector::Zero(L);  // scaled duals, lambda = rho u
  Vector v = Vector::Zero(L);
  if (opts.dual_seed) {
    Rng rng(*opts.dual_seed);
    for (int l = 0; l < L; ++l) u[l] = rng.gaussian();
    for (int l = 0; l < L; ++l) v[l] = rng.gaussian();
  }
  Vector p(L), q(L);
  for (int l = 0; l < L; ++l) {
    const Point2 z = project_constraint(u[l], v[l], rows[l]);
    p[l] = z.u;
    q[l] = z.v;
  }

  const double alpha = opts.over_relaxation;
  const double lambda = robust ? robust->lambda : 0.0;
  const double n_primal = std::sqrt(2.0 * L);
  const double n_dual = std::sqrt(static_cast<double>(K + N + (robust ? L : 0)));
  const double a_norm = std::max(B.norm(), C.norm()) + (robust ? 1.0 : 0.0);

  SolverResult res;
  Vector Bh(L), Cm(L), p_old(L), q_old(L);
  int rho_updates = 0;
  int growth_streak = 0;
  double streak_start_residual = 0.0;
  Vector du = Vector::Zero(L), dv = Vector::Zero(L);
  Vector du_prev = du, dv_prev = dv;
  double max_inner_increase = 0.0;

  int it = 0;
  for (it = 1; it <= opts.max_iters; ++it) {
    h = chol_h.solve(rho * (B.transpose() * (p - u)));

    if (robust) {
      const Vector target = q - v;
      const double kappa = lambda / rho;
      auto block_objective = [&](const Vector& mm, const Vector& ee) {
        return mm.squaredNorm() + lambda * ee.lpNorm<1>() +
               0.5 * rho * (C * mm + ee - target).squaredNorm();
      };
      double obj_prev = block_objective(m, e);
      for (int j = 0; j < robust->inner_alternations; ++j) {
        const Vector m_new = chol_m.solve(rho * (C.transpose() * (target - e)));
        const Vector resid = target - C * m_new;
        Vector e_new(L);
        for (int l = 0; l < L; ++l) e_new[l] = soft_threshold(resid[l], kappa);
        const double change =
            std::max((m_new - m).lpNorm<Eigen::Infinity>(),
                     (e_new - e).lpNorm<Eigen::Infinity>());
        m = m_new;
        e = e_new;
        const double obj = block_objective(m, e);
        max_inner_increase = std::max(max_inner_increase, obj - obj_prev);
        obj_prev = obj;
        if (change <= robust->inner_tol) break;
      }
      Cm = C * m + e;
    } else {
      m = chol_m.solve(rho * (C.transpose() * (q - v)));
      Cm = C * m;
    }
    Bh = B * h;

    p_old = p;
    q_old = q;
    const Vector Bh_hat = alpha * Bh + (1.0 - alpha) * p_old;
    const Vector Cm_hat = alpha * Cm + (1.0 - alpha) * q_old;
    for (int l = 0; l < L; ++l) {
      const Point2 z =
          project_constraint(Bh_hat[l] + u[l], Cm_hat[l] + v[l], rows[l]);
      p[l] = z.u;
      q[l] = z.v;
    }
    du = Bh_hat - p;
    dv = Cm_hat - q;
    u += du;
    v += dv;

    const double r_primal =
        std::sqrt((Bh - p).squaredNorm() + (Cm - q).squaredNorm());
    const Vector dp = p - p_old;
    const Vector dq = q - q_old;
    double dual_sq =
        (B.transpose() * dp).squaredNorm() + (C.transpose() * dq).squaredNorm();
    if (robust) dual_sq += dq.squaredNorm();
    const double r_dual = rho * std::sqrt(dual_sq);

    double at_u_sq =
        (B.transpose() * u).squaredNorm() + (C.transpose() * v).squaredNorm();
    if (robust) at_u_sq += v.squaredNorm();
    const double scale =
        std::max(std::sqrt(Bh.squaredNorm() + Cm.squaredNorm()),
                 std::sqrt(p.squaredNorm() + q.squaredNorm()));
    const double eps_primal = n_primal * opts.tol_primal + opts.tol_rel * scale;
    const double eps_dual =
        n_dual * opts.tol_dual + opts.tol_rel * rho * std::sqrt(at_u_sq);

    res.primal_residual = r_primal;
    res.dual_residual = r_dual;

    if (r_primal <= eps_primal && r_dual <= eps_dual) {
      const double violation = robust ? rbh_violation(inst, h, m, e)
                                      : max_violation(inst, h, m);
      if (violation <= 10.0 * opts.tol_primal) {
        res.status = SolverStatus::kConverged;
        break;
      }
    }

    // With inconsistent constraints the scaled duals drift by an almost
    // constant increment d every iteration, the primal residual stays flat,
    // and d certifies infeasibility: A^T d = 0. Slowly converging instances
    // can also show a steady increment, but one that A^T does not annihilate.
    const double step_norm = std::sqrt(du.squaredNorm() + dv.squaredNorm());
    const double step_change = std::sqrt((du - du_prev).squaredNorm() +
                                         (dv - dv_prev).squaredNorm());
    bool drifting = r_primal > eps_primal &&
                    r_primal > kDriftFloor * (1.0 + scale) &&
                    step_change <= kDriftStability * step_norm &&
                    (growth_streak == 0 ||
                     r_primal >= kDriftPersistence * streak_start_residual);
    if (drifting) {
      double pullback = (B.transpose() * du).squaredNorm() +
                        (C.transpose() * dv).squaredNorm();
      if (robust) pullback += dv.squaredNorm();
      drifting = std::sqrt(pullback) <= kCertificateTol * a_norm * step_norm;
    }
    if (!drifting) {
      growth_streak = 0;
    } else if (growth_streak++ == 0) {
      streak_start_residual = r_primal;
    }
    du_prev = du;
    dv_prev = dv;
    if (growth_streak >= kDivergenceWindow) {
      res.status = SolverStatus::kInfeasibleDetected;
      break;
    }

    if (opts.adaptive_rho && rho_updates < kMaxRhoUpdates &&
        it % kRhoCheckPeriod == 0) {
      double scale = 1.0;
      if (r_primal > kRhoImbalance * r_dual)
        scale = 2.0;
      else if (r_dual > kRhoImbalance * r_primal)
        scale = 0.5;
      if (scale != 1.0) {
        rho *= scale;
        u /= scale;
        v /= scale;
        factor();
        ++rho_updates;
      }
    }
  }

  res.iters = std::min(it, opts.max_iters);
  res.h_star = std::move(h);
  res.m_star = std::move(m);
  res.objective = res.h_star.squaredNorm() + res.m_star.squaredNorm();
  if (robust) {
    res.objective += lambda * e.lpNorm<1>();
    res.e_star = std::move(e);
  }
  res.dual_p = rho * u;
  res.dual_q = rho * v;
  res.rho_final = rho;
  res.rho_updates = rho_updates;
  res.max_inner_increase = max_inner_increase;
  return res;
}

}  // namespace

void SolverOptions::validate() const {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(tol_primal > 0.0) || !(tol_dual > 0.0) || !(tol_rel >= 0.0))
    throw std::invalid_argument("tolerances must be positive");
  if (!(over_relaxation >= 1.0 && over_relaxation <= 1.9))
    throw std::invalid_argument("over_relaxation must lie in [1.0, 1.9]");
}

void RbhOptions::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (inner_alternations < 1)
    throw std::invalid_argument("inner_alternations must be >= 1");
  if (!(inner_tol > 0.0))
    throw std::invalid_argument("inner_tol must be positive");
  inner.validate();
}

const char* to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::kConverged:
      return "converged";
    case SolverStatus::kMaxIters:
      return "max-iters";
    case SolverStatus::kInfeasibleDetected:
      return "infeasible-detected";
  }
  return "max-iters";
}

SolverResult solve_bh(const ProblemInstance& instance,
                      const SolverOptions& opts) {
  return run_splitting(instance, opts, nullptr);
}

SolverResult solve_rbh(const ProblemInstance& instance,
                       const RbhOptions& opts) {
  opts.validate();
  return run_splitting(instance, opts.inner, &opts);
}

KktResiduals kkt_residuals(const ProblemInstance& instance,
                           const SolverResult& result) {
  KktResiduals k;
  k.feasibility =
      result.e_star.size()
          ? rbh_violation(instance, result.h_star, result.m_star, result.e_star)
          : max_violation(instance, result.h_star, result.m_star);
  if (result.dual_p.size() == instance.L() &&
      result.dual_q.size() == instance.L()) {
    const Vector gh =
        2.0 * result.h_star + instance.B.transpose() * result.dual_p;
    const Vector gm =
        2.0 * result.m_star + instance.C.transpose() * result.dual_q;
    k.stationarity = std::sqrt(gh.squaredNorm() + gm.squaredNorm());
  }
  return k;
}

double rbh_violation(const ProblemInstance& instance, const Vector& h,
                     const Vector& m, const Vector& e) {
  const Vector p = instance.B * h;
  const Vector q = instance.C * m + e;
  double worst = 0.0;
  for (int l = 0; l < instance.L(); ++l) {
    const double y = instance.y[l];
    worst = std::max(worst, std::abs(y) - sign_of(y) * p[l] * q[l]);
    worst = std::max(worst, -instance.s[l] * p[l]);
  }
  return worst;
}

}  // namespace branchhull
