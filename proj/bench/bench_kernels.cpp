// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include "shilov/cr_maps.hpp"
#include "shilov/kernels.hpp"
#include "shilov/maurer_cartan.hpp"
#include "shilov/random.hpp"

using namespace shilov;

namespace {

MatrixJet random_jet(int vars, int order, int n, std::uint64_t seed) {
  Rng rng(seed);
  MatrixJet a(JetSpace::get(vars, order), n, n);
  for (auto& c : a.coeffs()) c = rng.complex_gaussian(n, n);
  return a;
}

void jet_product(benchmark::State& state, bool parallel) {
  const int vars = static_cast<int>(state.range(0));
  const MatrixJet a = random_jet(vars, 3, 8, 1), b = random_jet(vars, 3, 8, 2);
  for (auto _ : state) {
    MatrixJet c = parallel ? kernels::matrix_jet_product_parallel(a, b) : kernels::matrix_jet_product_serial(a, b);
    benchmark::DoNotOptimize(c.coeffs().data());
  }
}

void boundary(benchmark::State& state, bool parallel) {
  const auto f = whitney_map(4, 2, 2, 1);
  const auto samples = sample_boundary(f->source(), 3, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto r = parallel ? kernels::boundary_residuals_parallel(*f, samples) : kernels::boundary_residuals_serial(*f, samples);
    benchmark::DoNotOptimize(r.data());
  }
}

void structure(benchmark::State& state, bool parallel) {
  const SignatureForm F(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  ChartOptions o;
  o.gauge_seed = 7;
  const ConnectionMatrix C = connection_from_frame_field(chart_through(F, sample_boundary(F, 4, 1)[0], 3, o));
  for (auto _ : state) {
    double r = parallel ? kernels::structure_residual_parallel(C.components) : kernels::structure_residual_serial(C.components);
    benchmark::DoNotOptimize(r);
  }
}

}  // namespace

BENCHMARK_CAPTURE(jet_product, serial, false)->Arg(6)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(jet_product, parallel, true)->Arg(6)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(boundary, serial, false)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(boundary, parallel, true)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(structure, serial, false)->Args({3, 2})->Args({5, 3})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(structure, parallel, true)->Args({3, 2})->Args({5, 3})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
