#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "ultrabrown/brownian.hpp"
#include "ultrabrown/localtime.hpp"
#include "ultrabrown/padic.hpp"
#include "ultrabrown/residue.hpp"
#include "ultrabrown/series.hpp"

using namespace ultrabrown;

static void BM_PadicMul(benchmark::State& state) {
    const auto prec = state.range(0);
    const auto a = padic::PadicScalar::from_rational(3, -17, 11, prec);
    const auto b = padic::PadicScalar::from_rational(3, 5, 7, prec);
    for (auto _ : state) benchmark::DoNotOptimize(a.mul(b));
}
BENCHMARK(BM_PadicMul)->Arg(16)->Arg(64)->Arg(256);

static void BM_PadicInv(benchmark::State& state) {
    const auto a = padic::PadicScalar::from_rational(2, 5, 3, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(a.inv());
}
BENCHMARK(BM_PadicInv)->Arg(16)->Arg(64)->Arg(256);

static void BM_ResidueMul(benchmark::State& state) {
    const padic::ResidueRing ring(2, 62);
    std::uint64_t x = 12345;
    for (auto _ : state) {
        x = ring.mul(x, 0x9e3779b97f4a7c15ULL % ring.modulus()) | 1;
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(BM_ResidueMul);

static void BM_BrownianEval(benchmark::State& state) {
    brownian::BrownianConfig cfg{.p = 2, .index_dim = 2, .state_dim = 1, .depth = std::uint32_t(state.range(0))};
    const brownian::BrownianMotion bm(cfg);
    const std::vector<std::uint64_t> t{5, 9};
    std::vector<std::uint64_t> out(1);
    for (auto _ : state) {
        bm.eval_residues(t, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_BrownianEval)->Arg(8)->Arg(16)->Arg(30);

static void BM_BrownianGrid(benchmark::State& state) {
    brownian::BrownianConfig cfg{.p = 2, .index_dim = 2, .state_dim = 1, .depth = 12};
    const brownian::BrownianMotion bm(cfg);
    const auto level = std::uint32_t(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(bm.grid(level));
    state.SetItemsProcessed(state.iterations() * std::int64_t(cfg.ball_count(level)));
}
BENCHMARK(BM_BrownianGrid)->Arg(4)->Arg(6)->Arg(8);

static void BM_CandidateDescent(benchmark::State& state) {
    brownian::BrownianConfig cfg{.p = 2, .index_dim = 2, .state_dim = 1, .depth = 14};
    std::uint64_t i = 0;
    for (auto _ : state) {
        const brownian::BrownianMotion bm(cfg.replica(i++));
        benchmark::DoNotOptimize(localtime::candidate_descent(bm, std::uint32_t(state.range(0))));
    }
}
BENCHMARK(BM_CandidateDescent)->Arg(6)->Arg(10)->Arg(13);

static void BM_SeriesEval(benchmark::State& state) {
    series::SeriesSpec spec{.basis = state.range(0) == 0 ? series::Basis::mahler : series::Basis::van_der_put,
                            .p = 2,
                            .M = 31,
                            .abs_prec = 16};
    for (std::int64_t n = 0; n <= 31; ++n) spec.valuations.push_back(n / 4);
    const auto t = padic::PadicScalar::from_integer(2, 12345, 48);
    for (auto _ : state) benchmark::DoNotOptimize(series::series_eval(spec, t));
}
BENCHMARK(BM_SeriesEval)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
