#include <benchmark/benchmark.h>

#include "roomimp/harness.hpp"

using namespace roomimp;

namespace {

struct Setup {
  Scenario sc = room_2d_scenario();
  MeasurementSet data;
  std::shared_ptr<const Discretization> disc;

  explicit Setup(int level) {
    data = generate_data(sc, 1);
    disc = make_discretization(refine_uniformly(sc.identification_mesh(50.0), level));
  }
};

void forward(benchmark::State& state, ForwardMethod method) {
  const Setup s(static_cast<int>(state.range(0)));
  const auto map = make_observation_map(method, s.disc, s.sc.physics_at(50.0), s.sc.source, s.data.microphones,
                                        s.sc.prior.mean_sample());
  Rng rng = make_stream(3, 0);
  for (auto _ : state) {
    const auto z = sample_prior(s.sc.prior, rng);
    benchmark::DoNotOptimize(map->observe(z));
  }
  state.counters["dofs"] = static_cast<double>(s.disc->ops.dofs());
}

void BM_DirectObserve(benchmark::State& state) { forward(state, ForwardMethod::kDirect); }
void BM_ReducedObserve(benchmark::State& state) { forward(state, ForwardMethod::kBoundaryReduced); }

void BM_ReducedSetup(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    BoundaryReducedObservation map(s.disc, s.sc.physics_at(50.0), s.sc.source, s.data.microphones,
                                   s.sc.prior.mean_sample());
    benchmark::DoNotOptimize(map.boundary_nodes());
  }
}

void BM_Assemble(benchmark::State& state) {
  const auto mesh = refine_uniformly(room_2d_scenario().identification_mesh(50.0), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_operators(mesh));
}

}  // namespace

BENCHMARK(BM_DirectObserve)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReducedObserve)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReducedSetup)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Assemble)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
