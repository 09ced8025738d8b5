#include <benchmark/benchmark.h>

#include "rtetr/rtetr.hpp"

namespace {

rtetr::PhaseSpaceGrid box(int n, int n_theta) {
  rtetr::GeometryConfig gc;
  gc.kind = rtetr::GeometryKind::Box2D;
  gc.n_cells = n;
  gc.n_theta = n_theta;
  return rtetr::build_grid(gc);
}

rtetr::Medium weak(const rtetr::PhaseSpaceGrid& g) {
  return rtetr::Medium::homogeneous(g, 0.1, 0.1, rtetr::Kernel::henyey_greenstein(g, 0.5));
}

void BM_Step(benchmark::State& state) {
  const auto g = box(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const auto m = weak(g);
  const rtetr::TransportStepper stepper(g, m, rtetr::cfl_timestep(g), rtetr::Problem::Direct);
  rtetr::Field u = rtetr::random_field(g, 1), out(g);
  for (auto _ : state) {
    stepper.step(u, out);
    std::swap(u, out);
    benchmark::DoNotOptimize(u.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_Step)->Args({32, 8})->Args({64, 16})->Args({128, 16});

void BM_StepTranspose(benchmark::State& state) {
  const auto g = box(static_cast<int>(state.range(0)), 16);
  const auto m = weak(g);
  const rtetr::TransportStepper stepper(g, m, rtetr::cfl_timestep(g), rtetr::Problem::Direct);
  rtetr::Field u = rtetr::random_field(g, 2), out(g);
  for (auto _ : state) {
    stepper.step_transpose(u, out);
    std::swap(u, out);
    benchmark::DoNotOptimize(u.values().data());
  }
}
BENCHMARK(BM_StepTranspose)->Arg(64);

void BM_Scattering(benchmark::State& state) {
  const auto g = box(64, static_cast<int>(state.range(0)));
  const auto m = weak(g);
  const rtetr::Field u = rtetr::random_field(g, 3);
  for (auto _ : state) benchmark::DoNotOptimize(rtetr::apply_scattering(g, m, u));
}
BENCHMARK(BM_Scattering)->Arg(8)->Arg(16)->Arg(32);

void BM_StationarySolve(benchmark::State& state) {
  const auto g = box(static_cast<int>(state.range(0)), 8);
  const auto m = weak(g);
  rtetr::StationarySpec spec;
  spec.source = rtetr::random_field(g, 4);
  for (auto _ : state) benchmark::DoNotOptimize(rtetr::solve_stationary_direct(g, m, spec));
}
BENCHMARK(BM_StationarySolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ApplyQ(benchmark::State& state) {
  const auto g = box(static_cast<int>(state.range(0)), 8);
  const auto m = weak(g);
  const double tau = 1.5 * g.crossing_time();
  const rtetr::Field u = rtetr::random_field(g, 5);
  for (auto _ : state) benchmark::DoNotOptimize(rtetr::apply_Q(g, m, u, tau));
}
BENCHMARK(BM_ApplyQ)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
