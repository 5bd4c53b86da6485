#ifndef BRANCHHULL_SOLVER_HPP_
#define BRANCHHULL_SOLVER_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "branchhull/core.hpp"

namespace branchhull {

/// Parameters of the operator-splitting solver.
///
/// Stopping uses absolute + relative tolerances in the usual splitting form:
///   |r_primal| <= sqrt(2L) tol_primal + tol_rel max(|(Bh, Cm)|, |(p, q)|)
///   |r_dual|   <= sqrt(n) tol_dual + tol_rel |A^T lambda|
/// and additionally requires the recovered (h, m) to violate no constraint
/// by more than 10 tol_primal.
struct SolverOptions {
  double rho = 1.0;
  int max_iters = 50000;
  double tol_primal = 1e-9;
  double tol_dual = 1e-9;
  double tol_rel = 1e-9;
  double over_relaxation = 1.6;
  bool adaptive_rho = true;
  /// Seeds a random start for the scaled duals; zero duals otherwise.
  std::optional<std::uint64_t> dual_seed;

  void validate() const;
};

enum class SolverStatus { kConverged, kMaxIters, kInfeasibleDetected };

const char* to_string(SolverStatus status);

struct SolverResult {
  Vector h_star;
  Vector m_star;
  /// Slack of the robust program; empty for the plain program.
  Vector e_star;
  SolverStatus status = SolverStatus::kMaxIters;
  int iters = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  /// |h|^2 + |m|^2, plus lambda |e|_1 for the robust program.
  double objective = 0.0;
  /// Unscaled multipliers of the couplings Bh = p and Cm (+ e) = q.
  Vector dual_p;
  Vector dual_q;
  double rho_final = 0.0;
  int rho_updates = 0;
  /// Largest increase of the inner (m, e) block objective across one
  /// alternation sweep (robust program only; 0 when monotone).
  double max_inner_increase = 0.0;
};

/// Minimizes |h|^2 + |m|^2 subject to sign(y_l) (b_l^T h)(c_l^T m) >= |y_l|
/// and s_l b_l^T h >= 0 for every l.
///
/// Splits p = Bh, q = Cm; the (h, m) step reuses one Cholesky factor of
/// 2I + rho B^T B (resp. C) per value of rho, and the (p, q) step projects
/// each row pair onto its hull constraint.
SolverResult solve_bh(const ProblemInstance& instance,
                      const SolverOptions& opts = {});

struct RbhOptions {
  double lambda = 1.0;
  SolverOptions inner;
  int inner_alternations = 50;
  double inner_tol = 1e-10;

  void validate() const;
};

/// Minimizes |h|^2 + |m|^2 + lambda |e|_1 subject to
/// sign(y_l) (c_l^T m + e_l)(b_l^T h) >= |y_l| and s_l b_l^T h >= 0.
///
/// Same splitting with q = Cm + e. The (m, e) block is minimized by
/// alternating a linear solve in m with soft-thresholding in e.
SolverResult solve_rbh(const ProblemInstance& instance,
                       const RbhOptions& opts = {});

struct KktResiduals {
  double feasibility = 0.0;
  double stationarity = 0.0;
};

/// Constraint violation of (h*, m*) and the norm of
/// (2h* + B^T dual_p, 2m* + C^T dual_q).
KktResiduals kkt_residuals(const ProblemInstance& instance,
                           const SolverResult& result);

/// Largest violation of the robust program's constraints at (h, m, e).
double rbh_violation(const ProblemInstance& instance, const Vector& h,
                     const Vector& m, const Vector& e);

}  // namespace branchhull

#endif  // BRANCHHULL_SOLVER_HPP_
