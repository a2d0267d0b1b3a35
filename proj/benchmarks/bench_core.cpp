#include <cmath>
#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "sdlab/control.hpp"
#include "sdlab/hardy.hpp"
#include "sdlab/spaces.hpp"

using namespace sdlab;

namespace {

DiscreteOperator wwd(int n) {
    const auto pair = make_power_pair(0.5, 0.5, 0.5);
    return assemble(pair, build_mesh(n, 0.5, default_grading(0.5, 0.5)));
}

std::vector<double> sine(const DiscreteOperator& op) {
    return op.sample([](double x) { return std::sin(std::numbers::pi * x); });
}

}  // namespace

static void BM_Assemble(benchmark::State& state) {
    const auto pair = make_power_pair(0.5, 0.5, 0.5);
    const auto mesh = build_mesh(static_cast<int>(state.range(0)), 0.5, 2.0 / 1.5);
    for (auto _ : state) benchmark::DoNotOptimize(assemble(pair, mesh));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Assemble)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

static void BM_BandedSolve(benchmark::State& state) {
    const auto op = wwd(static_cast<int>(state.range(0)));
    const BandedCholesky chol(op.stiffness);
    const auto rhs = sine(op);
    std::vector<double> x(rhs.size());
    for (auto _ : state) {
        x = rhs;
        chol.solve_in_place(x);
        benchmark::DoNotOptimize(x.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BandedSolve)->RangeMultiplier(4)->Range(256, 65536)->Complexity(benchmark::oN);

static void BM_HardyConstant(benchmark::State& state) {
    const auto pair = make_power_pair(0.5, 0.5, 1.5);
    const auto op = assemble(pair, build_mesh(static_cast<int>(state.range(0)), 0.5, 4.0));
    for (auto _ : state) benchmark::DoNotOptimize(best_constant(op).cstar_h);
}
BENCHMARK(BM_HardyConstant)->RangeMultiplier(2)->Range(512, 4096)->Unit(benchmark::kMillisecond);

static void BM_HumControl(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto op = wwd(n);
    op = op.with_lambda(0.5 / best_constant(op).cstar_h);
    const auto tg = TimeGrid::make(0.5, n);
    HUMProblem p;
    p.u0 = sine(op);
    p.omega = ControlPattern::make(0.6, 0.9, 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(hum_control(op, tg, p).terminal_norm);
}
BENCHMARK(BM_HumControl)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
