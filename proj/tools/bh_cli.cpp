#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "branchhull/core.hpp"
#include "branchhull/experiments.hpp"
#include "branchhull/instance_io.hpp"
#include "branchhull/projection.hpp"
#include "branchhull/solver.hpp"
#include "branchhull/theory.hpp"

namespace {

using branchhull::Vector;
using nlohmann::ordered_json;

ordered_json to_json(const Vector& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// Splits "a,b,c" into doubles; rejects empty fields.
std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    if (field.empty()) throw CLI::ValidationError("empty list entry in '" + text + "'");
    std::size_t used = 0;
    const double value = std::stod(field, &used);
    if (used != field.size()) throw CLI::ValidationError("bad number '" + field + "'");
    out.push_back(value);
  }
  if (out.empty()) throw CLI::ValidationError("empty list");
  return out;
}

std::vector<int> int_range(int lo, int hi, int step) {
  if (step < 1 || lo < 1 || hi < lo) {
    throw CLI::ValidationError("need 1 <= Lmin <= Lmax and Lstep >= 1");
  }
  std::vector<int> out;
  for (int v = lo; v <= hi; v += step) out.push_back(v);
  return out;
}

void print(const ordered_json& doc) { std::cout << doc.dump(2) << '\n'; }

ordered_json result_json(const branchhull::ProblemInstance& inst,
                         const std::optional<branchhull::GroundTruth>& truth,
                         const branchhull::SolverResult& r, bool robust) {
  ordered_json out;
  out["status"] = branchhull::to_string(r.status);
  out["iters"] = r.iters;
  out["objective"] = r.objective;
  out["primal_residual"] = r.primal_residual;
  out["dual_residual"] = r.dual_residual;
  out["rho_final"] = r.rho_final;
  out["rho_updates"] = r.rho_updates;
  out["h"] = to_json(r.h_star);
  out["m"] = to_json(r.m_star);
  if (robust) {
    out["e"] = to_json(r.e_star);
    out["violation"] = branchhull::rbh_violation(inst, r.h_star, r.m_star, r.e_star);
    out["max_inner_increase"] = r.max_inner_increase;
  } else {
    const auto kkt = branchhull::kkt_residuals(inst, r);
    out["violation"] = kkt.feasibility;
    out["stationarity"] = kkt.stationarity;
  }
  if (truth) {
    const auto err = branchhull::recovery_error(r.h_star, r.m_star, *truth);
    out["recovery"] = {{"absolute", err.absolute},
                       {"relative", err.relative},
                       {"theorem2_bound", err.theorem2_bound}};
  }
  return out;
}

struct SolveArgs {
  std::string instance;
  double rho = 1.0;
  int max_iters = 50000;
  std::optional<double> tol;
  bool fixed_rho = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--instance", instance, "Instance JSON file")->required();
    cmd->add_option("--rho", rho, "Initial penalty")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", max_iters, "Iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--tol", tol, "Primal, dual and relative tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--fixed-rho", fixed_rho, "Disable residual balancing");
  }

  branchhull::SolverOptions options() const {
    branchhull::SolverOptions opts;
    opts.rho = rho;
    opts.max_iters = max_iters;
    if (tol) opts.tol_primal = opts.tol_dual = opts.tol_rel = *tol;
    opts.adaptive_rho = !fixed_rho;
    return opts;
  }
};

struct SweepArgs {
  int Lmin = 10;
  int Lmax = 120;
  int Lstep = 10;
  int trials = 10;
  std::uint64_t seed = 0;
  std::string out;
  std::string plot;
  std::string summary;
  double threshold = 1e-5;
  bool no_timing = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--Lmin", Lmin, "Smallest L");
    cmd->add_option("--Lmax", Lmax, "Largest L");
    cmd->add_option("--Lstep", Lstep, "Step in L");
    cmd->add_option("--trials", trials, "Trials per cell")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Base seed");
    cmd->add_option("--out", out, "Per-trial CSV")->required();
    cmd->add_option("--plot", plot, "Gnuplot script");
    cmd->add_option("--summary", summary, "Per-cell summary CSV");
    cmd->add_option("--threshold", threshold, "Success threshold")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--no-timing", no_timing, "Write 0 for wallclock_s");
  }

  void apply(branchhull::ExperimentGrid& grid) const {
    grid.Ls = int_range(Lmin, Lmax, Lstep);
    grid.trials = trials;
    grid.base_seed = seed;
    grid.success_threshold = threshold;
  }

  void emit(const branchhull::ResultTable& table) const {
    branchhull::emit_csv(table, out, !no_timing);
    const auto cells = branchhull::summarize(table);
    if (!summary.empty()) branchhull::emit_summary_csv(cells, summary);
    if (!plot.empty()) branchhull::emit_plot_script(table, table.kind, plot);
    int successes = 0;
    for (const auto& row : table.rows) successes += row.success ? 1 : 0;
    print({{"rows", table.rows.size()},
           {"cells", cells.size()},
           {"successes", successes},
           {"out", out}});
  }
};

ordered_json coverage_json(const branchhull::CoverageEstimate& est) {
  return {{"rate", est.rate},
          {"trials", est.trials},
          {"covered", est.covered},
          {"indeterminate", est.indeterminate}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BranchHull blind deconvolution toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Sample a seeded instance");
  int gK = 10, gN = 10, gL = 70;
  std::string g_noise = "none", g_target = "gaussian", g_out;
  double g_alpha = 0.0;
  std::uint64_t g_seed = 0;
  bool g_no_truth = false;
  gen->add_option("--K", gK)->check(CLI::PositiveNumber);
  gen->add_option("--N", gN)->check(CLI::PositiveNumber);
  gen->add_option("--L", gL)->check(CLI::PositiveNumber);
  gen->add_option("--noise", g_noise, "none | uniform | one-sided")
      ->check(CLI::IsMember({"none", "uniform", "one-sided"}));
  gen->add_option("--alpha", g_alpha, "Noise half-width")->check(CLI::NonNegativeNumber);
  gen->add_option("--target", g_target, "standard-basis | gaussian")
      ->check(CLI::IsMember({"standard-basis", "gaussian"}));
  gen->add_option("--seed", g_seed);
  gen->add_option("--out", g_out, "Output file (stdout if omitted)");
  gen->add_flag("--no-truth", g_no_truth, "Omit the ground truth");

  // solve, solve-rbh
  auto* solve = app.add_subcommand("solve", "Solve BranchHull on an instance file");
  SolveArgs solve_args;
  solve_args.add_to(solve);

  auto* solve_rbh = app.add_subcommand("solve-rbh", "Solve robust BranchHull");
  SolveArgs rbh_args;
  rbh_args.add_to(solve_rbh);
  double lambda = 1.0;
  int alternations = 50;
  solve_rbh->add_option("--lambda", lambda, "l1 penalty weight")->check(CLI::PositiveNumber);
  solve_rbh->add_option("--alternations", alternations, "Inner (m, e) alternations")
      ->check(CLI::PositiveNumber);

  // project
  auto* project = app.add_subcommand("project", "Project (a, b) onto {uv >= c, u >= 0}");
  double pa = 0.0, pb = 0.0, pc = 1.0;
  project->add_option("--a", pa)->required();
  project->add_option("--b", pb)->required();
  project->add_option("--c", pc)->required()->check(CLI::NonNegativeNumber);

  // lemma
  auto* lemma = app.add_subcommand("lemma", "Probability and counting validators");
  lemma->require_subcommand(1);
  auto* wendel = lemma->add_subcommand("wendel", "Hemisphere coverage probability");
  int wn = 2, wm = 3, w_trials = 10000;
  std::uint64_t w_seed = 0;
  std::string w_dist = "uniform";
  wendel->add_option("--n", wn, "Sphere dimension + 1")->required()->check(CLI::PositiveNumber);
  wendel->add_option("--m", wm, "Number of hemispheres")->required()->check(CLI::PositiveNumber);
  wendel->add_option("--trials", w_trials, "Monte-Carlo trials, 0 to skip")
      ->check(CLI::NonNegativeNumber);
  wendel->add_option("--seed", w_seed);
  wendel->add_option("--distribution", w_dist, "uniform | normalized-ratio")
      ->check(CLI::IsMember({"uniform", "normalized-ratio"}));

  auto* hoeffding = lemma->add_subcommand("hoeffding", "Binomial tail lower bound");
  int hn = 1, hm = 2;
  hoeffding->add_option("--n", hn)->required()->check(CLI::NonNegativeNumber);
  hoeffding->add_option("--m", hm)->required()->check(CLI::PositiveNumber);

  auto* count = lemma->add_subcommand("count", "Sampled minimum of the sign count");
  int cK = 5, cN = 5, cL = 200, c_samples = 10000;
  std::uint64_t c_seed = 0;
  count->add_option("--K", cK)->required()->check(CLI::PositiveNumber);
  count->add_option("--N", cN)->required()->check(CLI::PositiveNumber);
  count->add_option("--L", cL)->required()->check(CLI::PositiveNumber);
  count->add_option("--samples", c_samples)->check(CLI::Range(1000, 1 << 30));
  count->add_option("--seed", c_seed);

  // phase, noise
  auto* phase = app.add_subcommand("phase", "Noiseless phase-transition sweep");
  SweepArgs phase_args;
  phase_args.add_to(phase);
  std::string dims_text = "5,10,15,20";
  bool full = false;
  phase->add_option("--dims", dims_text, "K = N values");
  phase->add_flag("--full", full, "Full-scale grid (overrides dims and L range)");

  auto* noise = app.add_subcommand("noise", "Uniform-noise sweep");
  SweepArgs noise_args;
  noise_args.Lmax = 200;
  noise_args.add_to(noise);
  int nK = 20, nN = 20;
  std::string alphas_text = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  noise->add_option("--K", nK)->check(CLI::PositiveNumber);
  noise->add_option("--N", nN)->check(CLI::PositiveNumber);
  noise->add_option("--alphas", alphas_text, "Comma-separated noise levels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      const auto model = branchhull::NoiseModel{
          branchhull::noise_kind_from_string(g_noise), g_alpha, 0.0};
      const auto [inst, truth] = branchhull::generate_instance(
          gK, gN, gL, model, branchhull::target_kind_from_string(g_target), g_seed);
      const std::string doc =
          branchhull::instance_to_json(inst, g_no_truth ? nullptr : &truth);
      if (g_out.empty()) {
        std::cout << doc << '\n';
      } else {
        branchhull::write_instance(g_out, inst, g_no_truth ? nullptr : &truth);
      }
    } else if (*solve) {
      const auto [inst, truth] = branchhull::read_instance(solve_args.instance);
      const auto r = branchhull::solve_bh(inst, solve_args.options());
      print(result_json(inst, truth, r, false));
    } else if (*solve_rbh) {
      const auto [inst, truth] = branchhull::read_instance(rbh_args.instance);
      branchhull::RbhOptions opts;
      opts.lambda = lambda;
      opts.inner = rbh_args.options();
      opts.inner_alternations = alternations;
      const auto r = branchhull::solve_rbh(inst, opts);
      ordered_json doc = result_json(inst, truth, r, true);
      doc["lambda"] = lambda;
      print(doc);
    } else if (*project) {
      const auto p = pc > 0.0 ? branchhull::project_hull(pa, pb, pc)
                              : branchhull::project_halfplane(pa, pb, 1.0);
      const bool moved = p.u != pa || p.v != pb;
      const double objective = (p.u - pa) * (p.u - pa) + (p.v - pb) * (p.v - pb);
      double residual = 0.0;
      if (moved && pc > 0.0) residual = std::abs(branchhull::hull_quartic(p.u, pa, pb, pc));
      print({{"u", p.u}, {"v", p.v}, {"objective", objective}, {"residual", residual}});
    } else if (*wendel) {
      ordered_json doc;
      doc["inputs"] = {{"n", wn}, {"m", wm}, {"trials", w_trials},
                       {"seed", w_seed}, {"distribution", w_dist}};
      doc["closed_form"] = branchhull::wendel_probability(wn, wm);
      if (w_trials > 0) {
        const auto est = branchhull::mc_sphere_covering(
            wn, wm, w_trials, w_seed, branchhull::cover_distribution_from_string(w_dist));
        doc["empirical"] = coverage_json(est);
        doc["ci"] = {est.rate - est.ci_halfwidth, est.rate + est.ci_halfwidth};
      } else {
        doc["empirical"] = nullptr;
        doc["ci"] = nullptr;
      }
      print(doc);
    } else if (*hoeffding) {
      const double tail = branchhull::binomial_tail_at_least(hn, hm);
      print({{"inputs", {{"n", hn}, {"m", hm}}},
             {"closed_form", branchhull::hoeffding_tail_bound(hn, hm)},
             {"empirical", {{"exact_tail", tail}}},
             {"ci", nullptr}});
    } else if (*count) {
      const auto [inst, truth] = branchhull::generate_instance(
          cK, cN, cL, branchhull::NoiseModel::none(), branchhull::TargetKind::kGaussian,
          c_seed);
      const auto est = branchhull::lemma6_count(inst.B, inst.C, c_samples, c_seed);
      print({{"inputs", {{"K", cK}, {"N", cN}, {"L", cL},
                         {"samples", c_samples}, {"seed", c_seed}}},
             {"closed_form", {{"threshold_0.2L", 0.2 * cL}}},
             {"empirical", {{"min_sampled_count", est.min_sampled_count},
                            {"relaxed_min", est.relaxed_min},
                            {"pointwise_ok", est.pointwise_ok},
                            {"evaluations", est.evaluations}}},
             {"ci", nullptr}});
    } else if (*phase) {
      branchhull::ExperimentGrid grid;
      if (full) {
        grid = branchhull::full_phase_grid(phase_args.seed);
        grid.trials = phase_args.trials;
        grid.success_threshold = phase_args.threshold;
      } else {
        grid.dims.clear();
        for (double d : parse_list(dims_text)) {
          const int k = static_cast<int>(d);
          if (k < 1 || k != d) throw CLI::ValidationError("--dims must be positive integers");
          grid.dims.emplace_back(k, k);
        }
        phase_args.apply(grid);
      }
      phase_args.emit(branchhull::phase_diagram(grid));
    } else if (*noise) {
      branchhull::ExperimentGrid grid;
      grid.dims = {{nK, nN}};
      grid.alphas = parse_list(alphas_text);
      noise_args.apply(grid);
      noise_args.emit(branchhull::noise_sweep(grid));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
