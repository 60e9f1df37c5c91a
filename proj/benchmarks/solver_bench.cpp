#include <benchmark/benchmark.h>

#include <random>

#include "bci/distributed.hpp"
#include "bci/rng.hpp"
#include "bci/solver.hpp"

namespace {

bci::ShareMatrix golden_matrix() {
    bci::ShareMatrix m(4);
    const double d[4][4] = {{0, 100, 50, 20}, {20, 0, 30, 40}, {10, 40, 0, 50}, {50, 10, 60, 0}};
    for (bci::PeerId i = 0; i < 4; ++i) {
        for (bci::PeerId j = 0; j < 4; ++j) {
            if (d[i][j] != 0.0) m.record(i, j, d[i][j]);
        }
    }
    return m;
}

bci::ShareMatrix random_matrix(std::size_t n, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    bci::ShareMatrix m(n);
    for (bci::PeerId i = 0; i < n; ++i) {
        for (bci::PeerId j = 0; j < n; ++j) {
            if (i != j && bci::uniform_double(rng) < density) {
                m.record(i, j, bci::uniform_range(rng, 0.5, 100.0));
            }
        }
        const bci::PeerId next = (i + 1) % n;
        if (next != i && m.at(i, next) == 0.0) m.record(i, next, 1.0);
    }
    return m;
}

void BM_SolveGoldenLedger(benchmark::State& state) {
    const bci::ShareMatrix m = golden_matrix();
    const bci::BciParams params{0.8, bci::StoppingRule::four_decimals()};
    for (auto _ : state) {
        benchmark::DoNotOptimize(bci::solve(m, params));
    }
}
BENCHMARK(BM_SolveGoldenLedger);

void BM_PhiStep(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const bci::ShareMatrix m = random_matrix(n, 0.3, 7);
    const bci::BciVector x = bci::initial_vector(n, 0.8);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bci::phi_step(m, x, 0.8));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PhiStep)->Range(16, 1024)->Complexity();

void BM_Solve(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const bci::ShareMatrix m = random_matrix(n, 0.3, 11);
    const bci::BciParams params{0.8, bci::StoppingRule::inf_norm(1e-8)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(bci::solve(m, params));
    }
}
BENCHMARK(BM_Solve)->Arg(16)->Arg(64)->Arg(256);

void BM_SweepGoldenLedger(benchmark::State& state) {
    const bci::ShareMatrix m = golden_matrix();
    const std::vector<double> alphas{0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2};
    for (auto _ : state) {
        benchmark::DoNotOptimize(bci::sweep_alpha(m, alphas, bci::StoppingRule::four_decimals()));
    }
}
BENCHMARK(BM_SweepGoldenLedger);

void BM_DistributedRun(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const bci::ShareMatrix m = random_matrix(n, 0.3, 13);
    const bci::BciParams params{0.8, bci::StoppingRule::inf_norm(1e-8)};
    const bci::ManagerAssignment a = bci::assign_managers(n, 1, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            bci::run_distributed(m, params, a, bci::Schedule::round_robin(), 0));
    }
}
BENCHMARK(BM_DistributedRun)->Arg(8)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
