#include <benchmark/benchmark.h>

#include <random>

#include "blowup/elliptic.hpp"
#include "blowup/fields.hpp"
#include "blowup/fixedpoint.hpp"

using namespace blowup;

namespace {
struct Desk {
  Dynamics dyn = integrate_layers(ConstructionParams::desk(), DynamicsOptions{});
  FieldStack stack = FieldStack::recentered(dyn);
  double mid1 = 0.5 * (dyn.schedule()[0] + dyn.schedule()[1]);
};
const Desk& desk() {
  static const Desk d;
  return d;
}

double bump_lap(Vec2 x) {
  const double q = x.x * x.x + x.y * x.y, s = 1.0 - q;
  return s > 0 ? -16.0 * s * s * s + 48.0 * q * s * s : 0.0;
}
}  // namespace

static void BM_PoissonSolve(benchmark::State& state) {
  const Grid2D g = Grid2D::centered(static_cast<int>(state.range(0)), 2.0);
  const auto solver = NewtonianSolver::for_grid(g);
  const ScalarField2D f = sample(g, bump_lap);
  for (auto _ : state) benchmark::DoNotOptimize(solver->potential(f));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_PoissonSolve)->RangeMultiplier(2)->Range(128, 1024)->Unit(benchmark::kMillisecond);

static void BM_PerpGradient(benchmark::State& state) {
  const Grid2D g = Grid2D::centered(static_cast<int>(state.range(0)), 2.0);
  const auto solver = NewtonianSolver::for_grid(g);
  const ScalarField2D f = sample(g, bump_lap);
  for (auto _ : state) benchmark::DoNotOptimize(solver->perp_gradient(f));
}
BENCHMARK(BM_PerpGradient)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_ApplyT(benchmark::State& state) {
  const Desk& d = desk();
  static const PhiPotential phi = build_phi(0.5, default_phi_support(d.stack), 256);
  FixedPointConfig cfg;
  cfg.N = static_cast<int>(state.range(0));
  cfg.phi_lip_grid = 256;
  const FixedPointProblem prob(d.stack, phi, cfg);
  std::mt19937_64 rng(1);
  const TimeField a = prob.random_admissible(rng);
  const double rho_bar = 4.0 * prob.rho_B_sup() + 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(prob.apply_T(a, rho_bar));
  state.counters["slices"] = static_cast<double>(prob.size());
}
BENCHMARK(BM_ApplyT)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_FieldEval(benchmark::State& state) {
  const Desk& d = desk();
  const FieldSlice s = d.stack.slice(d.mid1);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<Vec2> pts(4096);
  for (Vec2& p : pts) p = {u(rng), u(rng)};
  for (auto _ : state)
    for (const Vec2& p : pts) benchmark::DoNotOptimize(s.eval(p));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(pts.size()));
}
BENCHMARK(BM_FieldEval);

static void BM_SliceSample(benchmark::State& state) {
  const Desk& d = desk();
  const Grid2D g = Grid2D::centered(static_cast<int>(state.range(0)), 3.0);
  for (auto _ : state) {
    const FieldSlice s = d.stack.slice(d.mid1);
    benchmark::DoNotOptimize(sample(g, [&](Vec2 x) { return s.eval(x).omega; }));
  }
}
BENCHMARK(BM_SliceSample)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
