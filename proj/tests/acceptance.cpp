// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "branchhull/core.hpp"
#include "branchhull/experiments.hpp"
#include "branchhull/projection.hpp"
#include "branchhull/random.hpp"
#include "branchhull/solver.hpp"
#include "branchhull/theory.hpp"
#include "support/generators.hpp"
#include "support/oracle.hpp"

namespace {

using namespace branchhull;
using testing::feasible_point;
using testing::hull_case;
using testing::uniform_int;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

bool inside(double u, double v, double c) { return u >= 0.0 && u * v >= c; }

double dist2(double a, double b, Point2 p) {
  return (p.u - a) * (p.u - a) + (p.v - b) * (p.v - b);
}

Outcome scalar_optima() {
  double worst = 0.0;
  for (double y : {1.0, 2.0, 4.0}) {
    ProblemInstance inst;
    inst.B = Matrix::Ones(1, 1);
    inst.C = Matrix::Ones(1, 1);
    inst.y = Vector::Constant(1, y);
    inst.s = Vector::Ones(1);
    const SolverResult r = solve_bh(inst);
    if (r.status != SolverStatus::kConverged) return {false, "not converged"};
    worst = std::max({worst, std::abs(r.h_star[0] - std::sqrt(y)),
                      std::abs(r.m_star[0] - std::sqrt(y))});
  }
  return {worst <= 1e-6, fmt("max deviation %.3g", worst)};
}

Outcome oracle_equivalence() {
  const std::pair<int, int> shapes[] = {{1, 1}, {1, 2}, {2, 1}, {2, 2},
                                        {1, 3}, {3, 1}};
  Rng meta(2024);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto [K, N] = shapes[t % 6];
    const int L = uniform_int(meta, K + N, 4 * (K + N) + 4);
    const NoiseModel noise = t % 2 ? NoiseModel::uniform(0.2) : NoiseModel::none();
    const std::uint64_t seed = derive_seed({2024, static_cast<std::uint64_t>(t)});
    const auto [inst, truth] =
        generate_instance(K, N, L, noise, TargetKind::kGaussian, seed);
    const SolverResult r = solve_bh(inst);
    const SolverResult o = testing::solve_bh_oracle(inst);
    if (r.status != SolverStatus::kConverged) return {false, fmt("trial %g not converged", t)};
    worst = std::max(worst, std::abs(r.objective - o.objective) /
                                std::max(1e-12, std::abs(o.objective)));
  }
  return {worst <= 1e-4, fmt("max relative objective gap %.3g", worst)};
}

Outcome projection_suite() {
  Rng rng(31337);
  int failures = 0;
  double worst_vi = 0.0, worst_root = 0.0, worst_oracle = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const auto [a, b, c] = hull_case(rng);
    const Point2 p = project_hull(a, b, c);
    bool ok = inside(p.u, p.v, c * (1.0 - 1e-12));

    const Point2 again = project_hull(p.u, p.v, c);
    ok &= std::abs(again.u - p.u) <= 1e-10 * (1.0 + std::abs(p.u)) &&
          std::abs(again.v - p.v) <= 1e-10 * (1.0 + std::abs(p.v));

    const double xn = std::hypot(a, b);
    for (int j = 0; j < 3; ++j) {
      const Point2 z = feasible_point(rng, c);
      const double vi = ((a - p.u) * (z.u - p.u) + (b - p.v) * (z.v - p.v)) /
                        ((1.0 + xn) * (1.0 + std::hypot(z.u, z.v)));
      worst_vi = std::max(worst_vi, vi);
      ok &= vi <= 1e-8;
    }

    const auto [a2, b2, c2] = hull_case(rng);
    (void)c2;
    const Point2 p2 = project_hull(a2, b2, c);
    ok &= std::hypot(p.u - p2.u, p.v - p2.v) <= std::hypot(a - a2, b - b2) + 1e-10;

    if (!inside(a, b, c)) {
      const double root = std::abs(hull_quartic(p.u, a, b, c)) /
                          std::max(1.0, std::pow(p.u, 4));
      worst_root = std::max(worst_root, root);
      ok &= root <= 1e-8;
    }

    const Point2 o = testing::project_hull_oracle(a, b, c);
    const double fo = dist2(a, b, o);
    const double gap = std::abs(dist2(a, b, p) - fo) / std::max(1.0, fo);
    worst_oracle = std::max(worst_oracle, gap);
    ok &= gap <= 1e-6;
    failures += ok ? 0 : 1;
  }
  return {failures == 0, fmt("failures %g, max VI %.3g, max root %.3g", failures,
                             worst_vi, worst_root) +
                             fmt(", max oracle gap %.3g", worst_oracle)};
}

Outcome phase_transition() {
  const ResultTable table = phase_diagram(desk_phase_grid(1));
  double worst_high = 1.0, worst_low = 0.0;
  for (const CellSummary& cell : summarize(table)) {
    const int n = cell.K + cell.N;
    if (cell.L >= 2.5 * n) worst_high = std::min(worst_high, cell.success_rate);
    if (cell.L <= 1.2 * n) worst_low = std::max(worst_low, cell.success_rate);
  }
  return {worst_high >= 0.9 && worst_low <= 0.1,
          fmt("min rate for L >= 2.5(K+N): %.2f, max rate for L <= 1.2(K+N): %.2f",
              worst_high, worst_low)};
}

Outcome theorem1_check() {
  ExperimentGrid grid;
  grid.dims = {{5, 5}};
  grid.Ls = {60};
  grid.trials = 50;
  grid.base_seed = 5;
  const ResultTable table = phase_diagram(grid);
  int successes = 0;
  for (const ResultRow& row : table.rows) successes += row.success ? 1 : 0;
  return {successes >= 49, fmt("%g/50 successes, bound %.10f", successes,
                               theorem1_probability(5, 5, 60))};
}

Outcome theorem2_check() {
  ExperimentGrid grid;
  grid.dims = {{20, 20}};
  grid.Ls = {100};
  grid.alphas = {0.1, 0.25, 0.5, 1.0};
  grid.trials = 10;
  grid.base_seed = 6;
  int violations = 0;
  double worst_ratio = 0.0;
  for (const ResultRow& row : noise_sweep(grid).rows) {
    violations += row.abs_error <= row.theorem2_bound + 1e-4 ? 0 : 1;
    worst_ratio = std::max(worst_ratio, row.abs_error / row.theorem2_bound);
  }
  grid.alphas = {0.0};
  double noiseless = 0.0;
  for (const ResultRow& row : noise_sweep(grid).rows) {
    noiseless = std::max(noiseless, row.abs_error);
  }
  return {violations == 0 && noiseless < 1e-5,
          fmt("%g bound violations, max error/bound %.3f, max alpha=0 error %.3g",
              violations, worst_ratio, noiseless)};
}

Outcome wendel_mc() {
  bool ok = true;
  std::string detail;
  for (auto [n, m] : {std::pair{2, 3}, std::pair{3, 8}}) {
    const CoverageEstimate est =
        mc_sphere_covering(n, m, 10000, 7, CoverDistribution::kUniform);
    const double exact = wendel_probability(n, m);
    ok &= std::abs(est.rate - exact) <= 0.02;
    if (!detail.empty()) detail += "; ";
    detail += fmt("(%g,%g): ", n, m) + fmt("%.4f vs %.4f", est.rate, exact);
  }
  return {ok, detail};
}

Outcome hoeffding_dominance() {
  int checked = 0, violations = 0;
  for (int m = 2; m <= 100; ++m) {
    for (int n = 1; 2 * n <= m; ++n) {
      ++checked;
      violations += hoeffding_tail_bound(n, m) <= binomial_tail_at_least(n, m) ? 0 : 1;
    }
  }
  return {violations == 0, fmt("%g pairs, %g violations", checked, violations)};
}

Outcome noise_shift() {
  Rng rng(99);
  int failures = 0;
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const int L = uniform_int(rng, 1, 64);
    Vector xi(L), y_hat(L);
    for (int l = 0; l < L; ++l) {
      const double r = rng.uniform01();
      xi[l] = r < 0.05 ? -1.0 : (r < 0.5 ? rng.uniform(-1.0, 0.0) : rng.uniform(0.0, 3.0));
      y_hat[l] = rng.gaussian();
    }
    const ShiftedNoise sh = shift_noise(xi);
    const Vector lhs = sh.s_shift * y_hat.cwiseProduct(Vector::Ones(L) + sh.eta);
    const Vector rhs = y_hat.cwiseProduct(Vector::Ones(L) + xi);
    const double rel = (lhs - rhs).norm() / std::max(rhs.norm(), 1e-300);
    worst = std::max(worst, rel);
    const bool in_box = sh.eta.minCoeff() >= -1.0 && sh.eta.maxCoeff() <= 0.0;
    failures += in_box && rel <= 1e-14 ? 0 : 1;
  }
  return {failures == 0, fmt("%g failures, max relative mismatch %.3g", failures, worst)};
}

Outcome rbh_collapse() {
  Rng meta(10);
  double worst_e = 0.0, worst_gap = 0.0;
  RbhOptions opts;
  opts.lambda = 1e8;
  for (int t = 0; t < 20; ++t) {
    const int K = uniform_int(meta, 2, 6);
    const int N = uniform_int(meta, 2, 6);
    const int L = 3 * (K + N);
    const std::uint64_t seed = derive_seed({10, static_cast<std::uint64_t>(t)});
    const auto [inst, truth] = generate_instance(K, N, L, NoiseModel::none(),
                                                 TargetKind::kGaussian, seed);
    const SolverResult bh = solve_bh(inst);
    const SolverResult rbh = solve_rbh(inst, opts);
    worst_e = std::max(worst_e, rbh.e_star.lpNorm<Eigen::Infinity>());
    const double gap = std::sqrt((rbh.h_star - bh.h_star).squaredNorm() +
                                 (rbh.m_star - bh.m_star).squaredNorm());
    worst_gap = std::max(worst_gap, gap);
  }
  return {worst_e < 1e-6 && worst_gap <= 1e-4,
          fmt("max |e|_inf %.3g, max distance to BH %.3g", worst_e, worst_gap)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "scalar optima", 1.0, scalar_optima},
      {2, "small-instance oracle equivalence", 120.0, oracle_equivalence},
      {3, "projection property suite", 30.0, projection_suite},
      {4, "phase transition (desk grid)", 900.0, phase_transition},
      {5, "probability bound, K=N=5, L=60", 120.0, theorem1_check},
      {6, "noise error bound, K=N=20, L=100", 600.0, theorem2_check},
      {7, "hemisphere coverage Monte Carlo", 120.0, wendel_mc},
      {8, "Hoeffding dominance", 5.0, hoeffding_dominance},
      {9, "noise-shift identity", 5.0, noise_shift},
      {10, "robust program collapse", 120.0, rbh_collapse},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = out.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s criterion %d: %s | %s | %.2fs (budget %.0fs)%s\n",
                pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(), secs,
                c.budget_s, in_time ? "" : " over budget");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
