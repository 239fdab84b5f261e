#include <benchmark/benchmark.h>

#include <random>

#include "gihelm/bessel.hpp"
#include "gihelm/classic_iter.hpp"
#include "gihelm/greens.hpp"
#include "gihelm/neural_field.hpp"
#include "gihelm/training.hpp"

using namespace gihelm;

namespace {

Medium lens(std::size_t n) {
  const Grid2D g{n, n, 0.02, 0.02, 0.0, 0.0};
  return gaussian_lens(g, 2.0, 2.0 * 3.141592653589793 * 6.25, g.center(), 0.2, -0.15);
}

}  // namespace

static void BM_Hankel(benchmark::State& state) {
  double x = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hankel_h0_second(x));
    x = x > 50.0 ? 0.01 : x * 1.01;
  }
}
BENCHMARK(BM_Hankel);

static void BM_BuildKernel(benchmark::State& state) {
  const Medium m = lens(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_kernel(m.grid(), m.k0(), SelfTermMode::cell_averaged));
}
BENCHMARK(BM_BuildKernel)->Arg(32)->Arg(64)->Arg(128);

static void BM_Convolve(benchmark::State& state) {
  const Medium m = lens(static_cast<std::size_t>(state.range(0)));
  const GreensKernel k = build_kernel(m.grid(), m.k0(), SelfTermMode::cell_averaged);
  std::vector<cplx> src(m.grid().size(), cplx{1.0, 0.5});
  for (auto _ : state) benchmark::DoNotOptimize(k.convolve(src));
}
BENCHMARK(BM_Convolve)->Arg(32)->Arg(64)->Arg(128);

static void BM_SolveDirect(benchmark::State& state) {
  const Medium m = lens(static_cast<std::size_t>(state.range(0)));
  const GiProblem p = make_gi_problem(m, {{0.1, 0.3}});
  for (auto _ : state) benchmark::DoNotOptimize(solve_direct(p.system));
}
BENCHMARK(BM_SolveDirect)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_GiLossGrad(benchmark::State& state) {
  const Medium m = lens(64);
  const GiProblem p = make_gi_problem(m, {{0.1, 0.3}});
  NetworkShape shape;
  shape.width = static_cast<std::size_t>(state.range(0));
  const NeuralField f = NeuralField::initialized(shape, 7);
  for (auto _ : state) benchmark::DoNotOptimize(gi_loss(f, p));
}
BENCHMARK(BM_GiLossGrad)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_PdeLossGrad(benchmark::State& state) {
  const Medium m = lens(64);
  const SourceSpec src{{0.1, 0.3}};
  const CoordinateFrame frame = CoordinateFrame::centered_on(m);
  PoolConfig pc;
  pc.n_pool = 2000;
  pc.n_raw = 10000;
  const CollocationPool pool = build_pool(m, src, frame, pc, 3);
  std::mt19937_64 rng(1);
  const CollocationPool batch = draw_batch(pool, static_cast<std::size_t>(state.range(0)), rng);
  NetworkShape shape;
  shape.width = 64;
  const NeuralField f = NeuralField::initialized(shape, 7);
  for (auto _ : state) benchmark::DoNotOptimize(pde_loss(f, batch, m.m0()));
}
BENCHMARK(BM_PdeLossGrad)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
