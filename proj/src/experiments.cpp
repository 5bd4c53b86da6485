#include "branchhull/experiments.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "branchhull/instance_io.hpp"
#include "branchhull/parallel.hpp"
#include "branchhull/random.hpp"
#include "branchhull/theory.hpp"

namespace branchhull {

namespace {

std::vector<int> range(int lo, int hi, int step) {
  std::vector<int> out;
  for (int v = lo; v <= hi; v += step) out.push_back(v);
  return out;
}

struct Job {
  int K, N, L;
  double alpha;
  int trial;
};

std::vector<Job> enumerate_jobs(const ExperimentGrid& grid) {
  std::vector<Job> jobs;
  jobs.reserve(grid.cell_count() * grid.trials);
  for (const auto& [K, N] : grid.dims)
    for (int L : grid.Ls)
      for (double alpha : grid.alphas)
        for (int t = 0; t < grid.trials; ++t) jobs.push_back({K, N, L, alpha, t});
  return jobs;
}

// generate -> solve -> classify for one trial.
ResultRow run_trial(const ExperimentGrid& grid, const Job& job,
                    TargetKind target) {
  ResultRow row;
  row.K = job.K;
  row.N = job.N;
  row.L = job.L;
  row.alpha = job.alpha;
  row.trial = job.trial;
  row.seed = trial_seed(grid.base_seed, job.K, job.N, job.L, job.alpha, job.trial);

  const NoiseModel noise =
      job.alpha > 0.0 ? NoiseModel::uniform(job.alpha) : NoiseModel::none();
  const auto start = std::chrono::steady_clock::now();
  const auto [inst, truth] =
      generate_instance(job.K, job.N, job.L, noise, target, row.seed);
  const SolverResult res = solve_bh(inst, grid.solver);
  row.wallclock_s = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();

  const RecoveryError err = recovery_error(res.h_star, res.m_star, truth);
  row.abs_error = err.absolute;
  row.rel_error = err.relative;
  row.epsilon = inst.noise.epsilon;
  row.theorem2_bound = err.theorem2_bound;
  row.iters = res.iters;
  row.status = res.status;
  row.success = std::isfinite(err.absolute) &&
                err.absolute < grid.success_threshold;
  return row;
}

ResultTable run_grid(const ExperimentGrid& grid, TargetKind target,
                     TableKind kind) {
  ResultTable table;
  table.kind = kind;
  const std::vector<Job> jobs = enumerate_jobs(grid);
  table.rows.resize(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    table.rows[i] = run_trial(grid, jobs[i], target);
  });
  return table;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string alpha_label(double alpha) {
  std::ostringstream os;
  os << alpha;
  return os.str();
}

}  // namespace

void ExperimentGrid::validate() const {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (!(success_threshold > 0.0))
    throw std::invalid_argument("success_threshold must be positive");
  for (const auto& [K, N] : dims)
    if (K < 1 || N < 1) throw std::invalid_argument("K and N must be >= 1");
  for (int L : Ls)
    if (L < 1) throw std::invalid_argument("L must be >= 1");
  for (double a : alphas)
    if (!(a >= 0.0) || !std::isfinite(a))
      throw std::invalid_argument("alphas must be finite and >= 0");
  solver.validate();
}

ExperimentGrid desk_phase_grid(std::uint64_t base_seed) {
  ExperimentGrid g;
  g.dims = {{5, 5}, {10, 10}, {15, 15}, {20, 20}};
  g.Ls = range(10, 120, 10);
  g.trials = 10;
  g.base_seed = base_seed;
  return g;
}

ExperimentGrid full_phase_grid(std::uint64_t base_seed) {
  ExperimentGrid g;
  for (int n : range(10, 150, 10)) g.dims.emplace_back(n, n);
  g.Ls = range(10, 850, 60);
  g.trials = 10;
  g.base_seed = base_seed;
  return g;
}

ExperimentGrid noise_grid(std::uint64_t base_seed) {
  ExperimentGrid g;
  g.dims = {{20, 20}};
  g.Ls = range(10, 200, 10);
  g.alphas.clear();
  for (int i = 0; i <= 10; ++i) g.alphas.push_back(i / 10.0);
  g.trials = 10;
  g.base_seed = base_seed;
  return g;
}

std::uint64_t trial_seed(std::uint64_t base_seed, int K, int N, int L,
                         double alpha, int trial) {
  return derive_seed({base_seed, static_cast<std::uint64_t>(K),
                      static_cast<std::uint64_t>(N),
                      static_cast<std::uint64_t>(L),
                      std::bit_cast<std::uint64_t>(alpha),
                      static_cast<std::uint64_t>(trial)});
}

const char* to_string(TableKind kind) {
  return kind == TableKind::kPhase ? "phase" : "noise";
}

TableKind table_kind_from_string(const std::string& name) {
  if (name == "phase") return TableKind::kPhase;
  if (name == "noise") return TableKind::kNoise;
  throw std::invalid_argument("unknown table kind '" + name + "'");
}

std::vector<CellSummary> summarize(const ResultTable& table) {
  std::vector<CellSummary> cells;
  for (const ResultRow& r : table.rows) {
    if (cells.empty() || cells.back().K != r.K || cells.back().N != r.N ||
        cells.back().L != r.L || cells.back().alpha != r.alpha) {
      CellSummary c;
      c.K = r.K;
      c.N = r.N;
      c.L = r.L;
      c.alpha = r.alpha;
      c.theorem1_bound = theorem1_probability(r.K, r.N, r.L);
      cells.push_back(c);
    }
    CellSummary& c = cells.back();
    ++c.trials;
    c.successes += r.success;
    c.max_rel_error = std::max(c.max_rel_error, r.rel_error);
    c.mean_rel_error += r.rel_error;
    c.within_bound += (r.abs_error <= r.theorem2_bound);
  }
  for (CellSummary& c : cells) {
    c.success_rate = static_cast<double>(c.successes) / c.trials;
    c.mean_rel_error /= c.trials;
    c.within_bound /= c.trials;
  }
  return cells;
}

ResultTable phase_diagram(const ExperimentGrid& grid) {
  grid.validate();
  for (double a : grid.alphas)
    if (a != 0.0)
      throw std::invalid_argument("phase_diagram: alphas must be {0}");
  return run_grid(grid, TargetKind::kStandardBasis, TableKind::kPhase);
}

ResultTable noise_sweep(const ExperimentGrid& grid) {
  grid.validate();
  for (double a : grid.alphas)
    if (a > 1.0) throw std::invalid_argument("noise_sweep: alphas must be <= 1");
  return run_grid(grid, TargetKind::kGaussian, TableKind::kNoise);
}

std::string table_to_csv(const ResultTable& table, bool with_timing) {
  std::string out =
      "K,N,L,alpha,trial,seed,success,abs_error,rel_error,epsilon,"
      "theorem2_bound,iters,wallclock_s,status\n";
  for (const ResultRow& r : table.rows) {
    out += std::to_string(r.K) + ',' + std::to_string(r.N) + ',' +
           std::to_string(r.L) + ',' + format_double(r.alpha) + ',' +
           std::to_string(r.trial) + ',' + std::to_string(r.seed) + ',' +
           (r.success ? "true" : "false") + ',' + format_double(r.abs_error) +
           ',' + format_double(r.rel_error) + ',' + format_double(r.epsilon) +
           ',' + format_double(r.theorem2_bound) + ',' +
           std::to_string(r.iters) + ',' +
           format_double(with_timing ? r.wallclock_s : 0.0) + ',' +
           csv_field(to_string(r.status)) + '\n';
  }
  return out;
}

std::string summary_to_csv(const std::vector<CellSummary>& cells) {
  std::string out =
      "K,N,L,alpha,trials,successes,success_rate,max_rel_error,"
      "mean_rel_error,within_bound,theorem1_bound\n";
  for (const CellSummary& c : cells) {
    out += std::to_string(c.K) + ',' + std::to_string(c.N) + ',' +
           std::to_string(c.L) + ',' + format_double(c.alpha) + ',' +
           std::to_string(c.trials) + ',' + std::to_string(c.successes) + ',' +
           format_double(c.success_rate) + ',' +
           format_double(c.max_rel_error) + ',' +
           format_double(c.mean_rel_error) + ',' +
           format_double(c.within_bound) + ',' +
           format_double(c.theorem1_bound) + '\n';
  }
  return out;
}

void emit_csv(const ResultTable& table, const std::string& path,
              bool with_timing) {
  write_text(path, table_to_csv(table, with_timing));
}

void emit_summary_csv(const std::vector<CellSummary>& cells,
                      const std::string& path) {
  write_text(path, summary_to_csv(cells));
}

std::string plot_script(const ResultTable& table, TableKind kind) {
  if (table.rows.empty())
    throw std::invalid_argument("plot_script: empty table");
  std::set<std::pair<int, int>> dims;
  bool noisy = false;
  for (const ResultRow& r : table.rows) {
    dims.emplace(r.K, r.N);
    noisy = noisy || r.alpha != 0.0;
  }
  const std::vector<CellSummary> cells = summarize(table);
  std::string out;

  if (kind == TableKind::kPhase) {
    if (noisy)
      throw std::invalid_argument("plot_script: phase plot needs alpha = 0");
    out += "# Empirical recovery rate; white = always recovered.\n";
    out += "set terminal pngcairo size 800,600\n";
    out += "set output 'phase.png'\n";
    out += "set xlabel 'K + N'\nset ylabel 'L'\n";
    out += "set cbrange [0:1]\nset palette gray\nset view map\n";
    out += "overlay(x) = 2*x  # L = 2(K + N)\n";
    out += "$rates << EOD\n";
    for (const CellSummary& c : cells)
      out += std::to_string(c.K + c.N) + ' ' + std::to_string(c.L) + ' ' +
             format_double(c.success_rate) + '\n';
    out += "EOD\n";
    out += "plot $rates using 1:2:3 with image notitle, \\\n"
           "     overlay(x) with lines lw 2 lc rgb 'red' title 'L = 2(K+N)'\n";
    return out;
  }

  if (dims.size() != 1)
    throw std::invalid_argument("plot_script: noise plot needs one (K, N)");
  std::map<double, std::vector<const CellSummary*>> by_alpha;
  for (const CellSummary& c : cells) by_alpha[c.alpha].push_back(&c);
  out += "# Maximum relative error over trials against the sampling ratio.\n";
  out += "set terminal pngcairo size 800,600\n";
  out += "set output 'noise.png'\n";
  out += "set xlabel 'L / (K + N)'\nset ylabel 'max relative error'\n";
  out += "set logscale y\nset key outside right\n";
  int index = 0;
  for (const auto& [alpha, group] : by_alpha) {
    out += "$alpha" + std::to_string(index++) + " << EOD\n";
    for (const CellSummary* c : group)
      out += format_double(static_cast<double>(c->L) / (c->K + c->N)) + ' ' +
             format_double(std::max(c->max_rel_error, 1e-16)) + '\n';
    out += "EOD\n";
  }
  out += "plot \\\n";
  index = 0;
  for (const auto& entry : by_alpha) {
    out += "  $alpha" + std::to_string(index) +
           " using 1:2 with linespoints title \"alpha=" +
           alpha_label(entry.first) + "\"";
    out += (++index < static_cast<int>(by_alpha.size())) ? ", \\\n" : "\n";
  }
  return out;
}

void emit_plot_script(const ResultTable& table, TableKind kind,
                      const std::string& path) {
  write_text(path, plot_script(table, kind));
}

}  // namespace branchhull
