// Serial reference versus OpenMP replica kernels. RWDRE_THREADS sets the
// worker count of the parallel variant.

#include <benchmark/benchmark.h>

#include "rwdre/cli/models.hpp"
#include "rwdre/core/replicas.hpp"
#include "rwdre/core/rng.hpp"
#include "rwdre/mixing/covariance.hpp"
#include "rwdre/renormalization/speeds.hpp"
#include "rwdre/walker/walker.hpp"

using namespace rwdre;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel x" + std::to_string(worker_count()));
}

// Single walkers on spin-flip, T = 200.
void BM_WalkerReplicas(benchmark::State& state) {
  const Model model = make_model("spinflip", {});
  const JumpRule rule = rule_occupation_drift(StateSpace::Binary, 0.7);
  const double T = 200.0;
  const SiteRange window = walker_window(0, 0, T, 1);
  for (auto _ : state) {
    auto out = map_replicas<Site>(
        64,
        [&](std::int64_t i) {
          Replica rep = model.make(replica_seed(5, static_cast<std::uint64_t>(i)), window, T);
          return run_walker(*rep.env, *rep.clocks, rule, {0, 0.0}, T).displacement();
        },
        mode(state));
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * 64);
  label(state);
}
BENCHMARK(BM_WalkerReplicas)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// Coupled ensembles behind the speed bracket.
void BM_ExtremesBatch(benchmark::State& state) {
  const Model model = make_model("spinflip", {});
  const JumpRule rule = rule_occupation_drift(StateSpace::Binary, 0.7);
  EstimatorOptions opt;
  opt.execution = mode(state);
  for (auto _ : state) {
    auto out = sample_extremes_batch(model, rule, 50.0, 32, 7, opt);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * 32);
  label(state);
}
BENCHMARK(BM_ExtremesBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// Box covariance replicas.
void BM_BoxCovariance(benchmark::State& state) {
  const Model model = make_model("spinflip", {});
  const BoxObservable a{Box(0.0, 8.0, 0.0, 4.0), BoxObservable::Kind::BoxAverage, 0.5};
  const BoxObservable b{Box(0.0, 8.0, 6.0, 10.0), BoxObservable::Kind::BoxAverage, 0.5};
  CovarianceOptions opt;
  opt.execution = mode(state);
  for (auto _ : state) {
    auto est = estimate_box_covariance(model, a, b, 2000, 9, opt);
    benchmark::DoNotOptimize(est);
  }
  state.SetItemsProcessed(state.iterations() * 2000);
  label(state);
}
BENCHMARK(BM_BoxCovariance)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
