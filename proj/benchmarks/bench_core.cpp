// Micro benchmarks for the hot paths: dominance filters, totals and one
// search round.

#include "acca/dominance.hpp"
#include "acca/solver.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

using namespace acca;

namespace {

// One matchday of a four-league card: n fixtures, five bookmakers, three
// outcomes, odds near the inverse probability.
std::vector<CandidateBet> card(int fixtures, std::uint64_t seed = 1) {
    static const std::vector<std::string> books = {"B365", "BW", "GB", "IW", "LB"};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> share(0.2, 1.0), margin(0.88, 1.04);
    std::vector<CandidateBet> out;
    for (int f = 0; f < fixtures; ++f) {
        const auto m = make_match("E0", 1, "H" + std::to_string(f), "A" + std::to_string(f));
        double w[3], s = 0;
        for (double& x : w) s += x = share(rng);
        for (const auto& b : books)
            for (int k = 0; k < 3; ++k)
                out.emplace_back(m, BookmakerRef{b}, all_outcomes[k], std::max(1.01, margin(rng) * s / w[k]), w[k] / s);
    }
    return out;
}

void BM_IntraFilter(benchmark::State& state) {
    const auto c = card(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(intra_filter(c));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.size()));
}
BENCHMARK(BM_IntraFilter)->Arg(10)->Arg(40)->Arg(160);

void BM_InterFilter(benchmark::State& state) {
    const auto c = card(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(inter_filter(c));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.size()));
}
BENCHMARK(BM_InterFilter)->Arg(10)->Arg(40)->Arg(160);

void BM_AccumulatorTotals(benchmark::State& state) {
    const auto c = card(static_cast<int>(state.range(0)));
    std::vector<CandidateBet> legs;
    for (std::size_t i = 0; i < c.size(); i += 15) legs.push_back(c[i]);  // one leg per fixture
    const Accumulator acc(legs);
    for (auto _ : state) benchmark::DoNotOptimize(accumulator_totals(acc));
}
BENCHMARK(BM_AccumulatorTotals)->Arg(2)->Arg(6)->Arg(12);

void BM_HypothesisEvaluate(benchmark::State& state) {
    auto c = card(40);
    std::vector<CandidateBet> b365;
    for (const auto& x : c)
        if (x.bookmaker().code == "B365") b365.push_back(x);
    const EfficientPool pool(b365);
    Rng rng(3);
    const auto h = random_hypothesis(pool, rng, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(pool, h));
}
BENCHMARK(BM_HypothesisEvaluate)->Arg(2)->Arg(6)->Arg(12);

// One test phase plus one diffusion phase over a 50-agent population.
void BM_SearchRound(benchmark::State& state) {
    std::vector<CandidateBet> b365;
    for (const auto& x : intra_filter(card(static_cast<int>(state.range(0)))).kept)
        if (x.bookmaker().code == "B365") b365.push_back(x);
    const EfficientPool pool(b365);
    Rng rng(5);
    std::vector<Agent> agents;
    for (int i = 0; i < 50; ++i) agents.push_back(make_agent(pool, relaxed_initialization(pool, 0.25, rng)));
    for (auto _ : state) {
        test_phase(agents, rng);
        diffusion_phase(agents, pool, rng);
        benchmark::ClobberMemory();
    }
}
BENCHMARK(BM_SearchRound)->Arg(10)->Arg(40);

void BM_Search(benchmark::State& state) {
    const auto c = intra_filter(card(40)).kept;
    SolverParams p;
    p.min_exp = 1e9;  // never met: runs the full iteration budget
    p.max_iterations = static_cast<std::uint64_t>(state.range(0));
    p.max_time = 60.0;
    for (auto _ : state) benchmark::DoNotOptimize(sds_search(split_by_bookmaker(c), p));
}
BENCHMARK(BM_Search)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
