#include <benchmark/benchmark.h>

#include "mlab/hyperparams.hpp"
#include "mlab/hypocoercivity.hpp"
#include "mlab/morse.hpp"
#include "mlab/simulate.hpp"
#include "mlab/spectral.hpp"

using namespace mlab;

static void BM_AssembleKramers(benchmark::State& state) {
  const auto p = tilted_double_well(0.1);
  const auto hp = derive(0.05, 0.9);
  const int n = static_cast<int>(state.range(0));
  const auto grid = gibbs_phase_grid(p, hp.beta, n, n);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_kramers(p, hp, grid).A.nonZeros());
  state.SetComplexityN(n * n);
}
BENCHMARK(BM_AssembleKramers)->Arg(64)->Arg(150)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_KramersGap(benchmark::State& state) {
  const auto p = quadratic(0.5);
  const auto hp = derive(0.04, 2.0 / 3.0);
  const int n = static_cast<int>(state.range(0));
  const auto op = assemble_kramers(p, hp, gibbs_phase_grid(p, hp.beta, n, n));
  for (auto _ : state) benchmark::DoNotOptimize(spectral_gap(smallest_eigenvalues(op, 3)));
}
BENCHMARK(BM_KramersGap)->Arg(64)->Arg(150)->Unit(benchmark::kMillisecond);

static void BM_UnderdampedSteps(benchmark::State& state) {
  RunConfig c(tilted_double_well(0.1));
  c.hp = derive(0.05, 0.9);
  c.scheme = Scheme::sde_underdamped;
  c.dt = 0.01;
  c.x0 = {0.9456};
  c.n_traj = 1000;
  c.n_steps = 1000;
  c.record_every = 1000;
  c.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run(c).final_x.data());
  state.SetItemsProcessed(state.iterations() * 1000 * 1000);
}
BENCHMARK(BM_UnderdampedSteps)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_SgdmSteps(benchmark::State& state) {
  RunConfig c(tilted_double_well(0.1));
  c.hp = derive(0.01, 0.9);
  c.scheme = Scheme::sgdm;
  c.x0 = {0.9456};
  c.n_traj = 1000;
  c.n_steps = 1000;
  c.record_every = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(run(c).final_x.data());
  state.SetItemsProcessed(state.iterations() * 1000 * 1000);
}
BENCHMARK(BM_SgdmSteps)->Unit(benchmark::kMillisecond);

static void BM_MorseAnalyze(benchmark::State& state) {
  const auto p = separable_double_well_2d(0.03);
  for (auto _ : state) benchmark::DoNotOptimize(analyze(p).pairs.size());
}
BENCHMARK(BM_MorseAnalyze)->Unit(benchmark::kMillisecond);

static void BM_CertificateSearch(benchmark::State& state) {
  const KappaConstants k{0.22, 2.44, 24.4};
  for (auto _ : state) benchmark::DoNotOptimize(certificate_search(k, 1.0, 20.0).lambda_lower);
}
BENCHMARK(BM_CertificateSearch)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
