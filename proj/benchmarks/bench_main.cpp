#include <benchmark/benchmark.h>

#include "iivds/error_analysis.hpp"
#include "iivds/iivds_sim.hpp"
#include "iivds/iris_synth.hpp"

namespace {

using namespace iivds;

void BM_Similarity(benchmark::State& state) {
  const auto db = generate_database(2, 8, 0.2, 1);
  const std::vector<std::uint32_t> enrolled = {0, 1, 2, 3, 4};
  const auto id = assemble_identity(db, 0, enrolled, 4);
  const auto& probe = db.code(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(similarity(probe, id));
}
BENCHMARK(BM_Similarity);

void BM_HistogramRecord(benchmark::State& state) {
  ScoreHistogram h(ScoreKind::Imposter);
  double s = 0.0;
  for (auto _ : state) {
    h.record(s);
    s += 0.000123;
    if (s > 1.0) s = 0.0;
  }
  benchmark::DoNotOptimize(h.total());
}
BENCHMARK(BM_HistogramRecord);

void BM_FarFrr(benchmark::State& state) {
  ScoreHistogram g(ScoreKind::Genuine), i(ScoreKind::Imposter);
  for (int k = 0; k < 10000; ++k) {
    g.record(0.5 + 0.5 * k / 10000.0);
    i.record(0.5 * k / 10000.0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(far_frr(g, i));
}
BENCHMARK(BM_FarFrr);

// One terminal of the desk configuration: 50 enrollments, 50k comparisons.
void BM_RunTerminal(benchmark::State& state) {
  SimConfig cfg;
  cfg.flip_probability = 0.1963;
  const auto db = generate_database(cfg.num_identities, cfg.samples_per_identity,
                                    cfg.flip_probability, cfg.master_seed);
  const auto grammar = cfg.make_grammar();
  std::uint32_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_terminal(t++, db, grammar, cfg));
  state.SetItemsProcessed(state.iterations() * 50000);
}
BENCHMARK(BM_RunTerminal)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
