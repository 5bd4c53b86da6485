#ifndef BRANCHHULL_EXPERIMENTS_HPP_
#define BRANCHHULL_EXPERIMENTS_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "branchhull/core.hpp"
#include "branchhull/solver.hpp"

namespace branchhull {

struct ExperimentGrid {
  std::vector<std::pair<int, int>> dims;  // (K, N)
  std::vector<int> Ls;
  std::vector<double> alphas{0.0};
  int trials = 10;
  std::uint64_t base_seed = 0;
  double success_threshold = 1e-5;
  /// Solver settings shared by every trial.
  SolverOptions solver;

  void validate() const;
  std::size_t cell_count() const {
    return dims.size() * Ls.size() * alphas.size();
  }
};

/// K = N in {5, 10, 15, 20}, L in {10, 20, ..., 120}, 10 trials.
ExperimentGrid desk_phase_grid(std::uint64_t base_seed = 0);
/// K = N in {10, 20, ..., 150}, L in {10, 70, ..., 850}, 10 trials.
ExperimentGrid full_phase_grid(std::uint64_t base_seed = 0);
/// K = N = 20, L in {10, 20, ..., 200}, alpha in {0, 0.1, ..., 1}, 10 trials.
ExperimentGrid noise_grid(std::uint64_t base_seed = 0);

/// derive_seed({base, K, N, L, bit pattern of alpha, trial}).
std::uint64_t trial_seed(std::uint64_t base_seed, int K, int N, int L,
                         double alpha, int trial);

struct ResultRow {
  int K = 0;
  int N = 0;
  int L = 0;
  double alpha = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  bool success = false;
  double abs_error = 0.0;
  double rel_error = 0.0;
  /// Realised |xi|_inf of the trial.
  double epsilon = 0.0;
  double theorem2_bound = 0.0;
  int iters = 0;
  double wallclock_s = 0.0;
  SolverStatus status = SolverStatus::kMaxIters;
};

enum class TableKind { kPhase, kNoise };

const char* to_string(TableKind kind);
TableKind table_kind_from_string(const std::string& name);

/// Rows in (K, N) - L - alpha - trial order, one per trial.
struct ResultTable {
  TableKind kind = TableKind::kPhase;
  std::vector<ResultRow> rows;
};

struct CellSummary {
  int K = 0;
  int N = 0;
  int L = 0;
  double alpha = 0.0;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  /// Fraction of trials with abs_error <= theorem2_bound.
  double within_bound = 0.0;
  double theorem1_bound = 0.0;
};

/// Groups consecutive rows of the same cell.
std::vector<CellSummary> summarize(const ResultTable& table);

/// Noiseless standard-basis sweep; success means
/// |(h*, m*) - (e1, e1)| < success_threshold. Requires alphas == {0}.
ResultTable phase_diagram(const ExperimentGrid& grid);

/// Uniform-noise sweep with gaussian targets, errors measured against the
/// balanced truth. Requires alphas in [0, 1].
ResultTable noise_sweep(const ExperimentGrid& grid);

/// CSV with a header row; floats at 17 significant digits. Setting
/// `with_timing` to false writes 0 for wallclock_s so files are reproducible.
std::string table_to_csv(const ResultTable& table, bool with_timing = true);
std::string summary_to_csv(const std::vector<CellSummary>& cells);

void emit_csv(const ResultTable& table, const std::string& path,
              bool with_timing = true);
void emit_summary_csv(const std::vector<CellSummary>& cells,
                      const std::string& path);

/// Gnuplot script. Phase: grayscale success-rate heatmap over (K + N, L)
/// with the line L = 2(K + N). Noise: max relative error against
/// L / (K + N), one curve per alpha. Throws std::invalid_argument for an
/// empty table or a table whose shape does not fit `kind`.
std::string plot_script(const ResultTable& table, TableKind kind);
void emit_plot_script(const ResultTable& table, TableKind kind,
                      const std::string& path);

}  // namespace branchhull

#endif  // BRANCHHULL_EXPERIMENTS_HPP_
