#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "branchhull/experiments.hpp"
#include "branchhull/instance_io.hpp"
#include "branchhull/parallel.hpp"
#include "branchhull/theory.hpp"

using namespace branchhull;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int count_of(const std::string& text, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + 1))
    ++n;
  return n;
}

ExperimentGrid small_phase() {
  ExperimentGrid g;
  g.dims = {{5, 5}, {10, 10}};
  g.Ls = {20, 60};
  g.trials = 10;
  g.base_seed = 3;
  return g;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("empty grid gives an empty table") {
  ExperimentGrid g;
  const ResultTable t = phase_diagram(g);
  CHECK(t.rows.empty());
  CHECK(summarize(t).empty());
  CHECK(table_to_csv(t) ==
        "K,N,L,alpha,trial,seed,success,abs_error,rel_error,epsilon,"
        "theorem2_bound,iters,wallclock_s,status\n");
}

TEST_CASE("phase cells far from the transition") {
  const ResultTable t = phase_diagram(small_phase());
  REQUIRE(t.rows.size() == 40);
  const auto cells = summarize(t);
  REQUIRE(cells.size() == 4);
  for (const CellSummary& c : cells) {
    CAPTURE(c.K);
    CAPTURE(c.L);
    if (c.K == 5 && c.L == 60) CHECK(c.successes == 10);
    if (c.K == 10 && c.L == 20) CHECK(c.successes == 0);
    CHECK(c.trials == 10);
  }
  // Rows come out in (dims, L, alpha, trial) order with derived seeds.
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const ResultRow& r = t.rows[i];
    CHECK(r.trial == static_cast<int>(i % 10));
    CHECK(r.seed == trial_seed(3, r.K, r.N, r.L, 0.0, r.trial));
    CHECK(r.success == (r.abs_error < 1e-5));
  }
}

TEST_CASE("trial seeds follow the documented hash") {
  CHECK(trial_seed(7, 5, 6, 40, 0.25, 3) ==
        derive_seed({7, 5, 6, 40, std::bit_cast<std::uint64_t>(0.25), 3}));
  CHECK(trial_seed(7, 5, 6, 40, 0.25, 3) != trial_seed(7, 5, 6, 40, 0.25, 4));
  CHECK(trial_seed(7, 5, 6, 40, 0.0, 3) != trial_seed(7, 6, 5, 40, 0.0, 3));
}

TEST_CASE("tables are a pure function of the grid") {
  ExperimentGrid g = small_phase();
  g.trials = 3;
  const ResultTable a = phase_diagram(g);
  const ResultTable b = phase_diagram(g);
  CHECK(table_to_csv(a, false) == table_to_csv(b, false));
  ExperimentGrid n;
  n.dims = {{3, 3}};
  n.Ls = {24};
  n.alphas = {0.0, 0.5};
  n.trials = 3;
  CHECK(table_to_csv(noise_sweep(n), false) == table_to_csv(noise_sweep(n), false));
}

TEST_CASE("parallel_for fills every slot once regardless of threads") {
  for (int threads : {1, 2, 4, 7}) {
    std::vector<int> out(1000, 0);
    std::atomic<int> calls{0};
    parallel_for(out.size(), [&](std::size_t i) {
      out[i] += static_cast<int>(i) * 3;
      ++calls;
    }, threads);
    CHECK(calls.load() == 1000);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i) * 3);
  }
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 5) throw std::runtime_error("boom");
                  }, 3),
                  std::runtime_error);
  CHECK(worker_count() >= 1);
}

TEST_CASE("grid validation") {
  ExperimentGrid g = small_phase();
  g.alphas = {0.1};
  CHECK_THROWS_AS(phase_diagram(g), std::invalid_argument);
  g.alphas = {1.5};
  CHECK_THROWS_AS(noise_sweep(g), std::invalid_argument);
  g = small_phase();
  g.trials = 0;
  CHECK_THROWS_AS(phase_diagram(g), std::invalid_argument);
  g = small_phase();
  g.dims = {{0, 3}};
  CHECK_THROWS_AS(phase_diagram(g), std::invalid_argument);
}

TEST_CASE("desk and full grids") {
  const ExperimentGrid d = desk_phase_grid();
  CHECK(d.dims.size() == 4);
  CHECK(d.Ls.front() == 10);
  CHECK(d.Ls.back() == 120);
  CHECK(d.Ls.size() == 12);
  CHECK(d.trials == 10);
  CHECK(d.success_threshold == 1e-5);
  const ExperimentGrid f = full_phase_grid();
  CHECK(f.dims.back() == std::pair<int, int>{150, 150});
  CHECK(f.Ls.back() == 850);
  CHECK(f.Ls[1] == 70);
  const ExperimentGrid n = noise_grid();
  CHECK(n.alphas.size() == 11);
  CHECK(n.Ls.back() == 200);
}

TEST_CASE("statistical: success rate rises with L and meets the probability bound") {
  ExperimentGrid g;
  g.dims = {{5, 5}};
  g.Ls = {10, 20, 30, 40, 50, 60, 70};
  g.trials = 20;
  g.base_seed = 11;
  const auto cells = summarize(phase_diagram(g));
  for (std::size_t i = 1; i < cells.size(); ++i)
    CHECK(cells[i].success_rate >= cells[i - 1].success_rate - 2.0 / g.trials);
  for (const CellSummary& c : cells)
    if (c.theorem1_bound >= 0.999 && c.trials >= 20) CHECK(c.success_rate >= 0.95);
}

TEST_CASE("statistical: noisy errors respect the error bound") {
  ExperimentGrid g;
  g.dims = {{5, 5}};
  g.Ls = {30, 50};
  g.alphas = {0.0, 0.25, 1.0};
  g.trials = 5;
  g.base_seed = 21;
  const ResultTable t = noise_sweep(g);
  CHECK(t.kind == TableKind::kNoise);
  for (const ResultRow& r : t.rows) {
    CAPTURE(r.alpha);
    CHECK(r.epsilon <= r.alpha);
    CHECK(r.abs_error <= r.theorem2_bound + 10.0 * g.success_threshold);
    CHECK(r.status == SolverStatus::kConverged);
  }
  for (const CellSummary& c : summarize(t)) {
    CHECK(c.within_bound >= (c.alpha > 0.0 ? 1.0 : 0.0));
    CHECK(c.mean_rel_error <= c.max_rel_error);
  }
}

TEST_CASE("csv output") {
  const auto dir = std::filesystem::temp_directory_path();
  ResultTable empty;
  emit_csv(empty, (dir / "bh_empty.csv").string());
  CHECK(count_of(slurp(dir / "bh_empty.csv"), "\n") == 1);

  ExperimentGrid g;
  g.dims = {{2, 2}};
  g.Ls = {12};
  g.trials = 1;
  const ResultTable one = phase_diagram(g);
  emit_csv(one, (dir / "bh_one.csv").string());
  const std::string first = slurp(dir / "bh_one.csv");
  CHECK(count_of(first, "\n") == 2);
  emit_csv(one, (dir / "bh_one.csv").string());
  CHECK(slurp(dir / "bh_one.csv") == first);
  CHECK(first.find(format_double(one.rows[0].abs_error)) != std::string::npos);

  emit_summary_csv(summarize(one), (dir / "bh_summary.csv").string());
  CHECK(slurp(dir / "bh_summary.csv").rfind("K,N,L,alpha,trials", 0) == 0);
  CHECK_THROWS_AS(emit_csv(one, (dir / "no_such_dir" / "x.csv").string()),
                  std::runtime_error);
  for (const char* f : {"bh_empty.csv", "bh_one.csv", "bh_summary.csv"})
    std::filesystem::remove(dir / f);
}

TEST_CASE("plot scripts") {
  ExperimentGrid g;
  g.dims = {{2, 2}, {3, 3}};
  g.Ls = {10, 20};
  g.trials = 1;
  const ResultTable phase = phase_diagram(g);
  const std::string p = plot_script(phase, TableKind::kPhase);
  CHECK(p.find("overlay(x) = 2*x") != std::string::npos);
  CHECK(p.find("with image") != std::string::npos);
  CHECK(p.find("palette gray") != std::string::npos);
  CHECK_THROWS_AS(plot_script(phase, TableKind::kNoise), std::invalid_argument);

  ExperimentGrid n;
  n.dims = {{2, 2}};
  n.Ls = {10, 20};
  n.alphas = {0.0, 0.5, 1.0};
  n.trials = 1;
  const ResultTable noise = noise_sweep(n);
  const std::string q = plot_script(noise, TableKind::kNoise);
  CHECK(count_of(q, "title \"alpha=") == 3);
  CHECK_THROWS_AS(plot_script(noise, TableKind::kPhase), std::invalid_argument);

  CHECK_THROWS_AS(plot_script(ResultTable{}, TableKind::kPhase), std::invalid_argument);
  CHECK(table_kind_from_string("noise") == TableKind::kNoise);
  CHECK_THROWS_AS(table_kind_from_string("heat"), std::invalid_argument);
}

}  // TEST_SUITE
