#include "acca/solver.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

using namespace acca;
using testing::bet;

namespace {

SolverParams quick(double min_exp, std::uint64_t iterations = 200) {
    SolverParams p;
    p.min_exp = min_exp;
    p.max_time = 5.0;
    p.max_iterations = iterations;
    p.population = 20;
    return p;
}

BookmakerPools one_book(std::vector<CandidateBet> c) {
    BookmakerPools pools;
    pools[c.front().bookmaker()] = std::move(c);
    return pools;
}

std::set<std::pair<double, double>> legs_of(const Accumulator& a) {
    std::set<std::pair<double, double>> s;
    for (const auto& l : a.legs()) s.emplace(l.odds(), l.prob());
    return s;
}

// Optimal vertex of max sum x*v s.t. sum x*w <= cap, 0 <= x <= 1, found by
// trying every set of full items plus at most one fractional item.
std::vector<double> lp_by_vertices(const std::vector<double>& v, const std::vector<double>& w, double cap) {
    const std::size_t n = v.size();
    std::vector<double> best_x(n, 0.0);
    double best = -1.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double used = 0.0, val = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1) {
                used += w[i];
                val += v[i];
            }
        if (used > cap) continue;
        for (std::size_t f = 0; f <= n; ++f) {
            std::vector<double> x(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) x[i] = mask >> i & 1;
            double total = val;
            if (f < n) {
                if (mask >> f & 1) continue;
                x[f] = std::min(1.0, (cap - used) / w[f]);
                total += x[f] * v[f];
            }
            if (total > best + 1e-12) {
                best = total;
                best_x = x;
            }
        }
    }
    return best_x;
}

}  // namespace

TEST_CASE("parameter validation") {
    SolverParams p;
    CHECK_NOTHROW(validate(p));
    p.p_min = 1.5;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = {};
    p.p_min = 0.0;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = {};
    p.population = 1;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = {};
    p.max_time = 0;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = {};
    p.max_legs = 0;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("efficient pool") {
    EfficientPool pool({bet(1, Outcome::Home, 2, 0.5), bet(0, Outcome::Away, 3, 0.3), bet(0, Outcome::Home, 2, 0.4),
                        bet(1, Outcome::Home, 2, 0.5)});
    CHECK(pool.size() == 3);
    CHECK(pool.match_count() == 2);
    CHECK(pool.match_id(0) == pool.match_id(1));
    CHECK(pool[0].outcome() == Outcome::Home);
    CHECK(is_feasible(pool, {0, 2}));
    CHECK_FALSE(is_feasible(pool, {0, 1}));
    CHECK_FALSE(is_feasible(pool, {}));
    CHECK_THROWS_AS(EfficientPool({bet(0, Outcome::Home, 2, 0.5, "B365"), bet(1, Outcome::Home, 2, 0.5, "BW")}),
                    std::invalid_argument);
}

TEST_CASE("hypothesis totals are bit-identical to accumulator totals") {
    std::mt19937_64 rng(5);
    const auto c = testing::random_pool(rng, 12, {"B365"});
    EfficientPool pool(c);
    for (int i = 0; i < 500; ++i) {
        const auto h = random_hypothesis(pool, rng, 1 + i % 7);
        const auto a = evaluate(pool, h);
        const auto b = accumulator_totals(to_accumulator(pool, h));
        CHECK(a.odds == b.odds);
        CHECK(a.prob == b.prob);
        CHECK(a.exp == b.exp);
        CHECK(to_hypothesis(pool, to_accumulator(pool, h)) == h);
    }
}

TEST_CASE("relaxed initialization") {
    Rng rng(1);
    SUBCASE("greedy trace example") {
        const std::vector<CandidateBet> c = {bet(0, Outcome::Home, 2, 0.8), bet(1, Outcome::Home, 3, 0.5),
                                             bet(2, Outcome::Home, 5, 0.3)};
        const auto acc = relaxed_initialization(c, 0.25, rng);
        CHECK(legs_of(acc) == std::set<std::pair<double, double>>{{2, 0.8}, {3, 0.5}});
        CHECK(accumulator_totals(acc).prob == doctest::Approx(0.4));
        // the fractional share of the third leg
        const double x3 = (-std::log(0.25) + std::log(0.8) + std::log(0.5)) / -std::log(0.3);
        CHECK(x3 == doctest::Approx(0.39).epsilon(0.01));
    }
    SUBCASE("single candidate") {
        const auto acc = relaxed_initialization({bet(0, Outcome::Home, 2, 0.5)}, 0.25, rng);
        CHECK(acc.size() == 1);
    }
    SUBCASE("same-match conflict keeps the most probable outcome") {
        const std::vector<CandidateBet> c = {bet(0, Outcome::Home, 1.5, 0.7), bet(0, Outcome::Away, 1.6, 0.6)};
        const auto acc = relaxed_initialization(c, 0.25, rng);
        REQUIRE(acc.size() == 1);
        CHECK(acc.legs()[0].prob() == 0.7);
        CHECK(validate_accumulator(acc).empty());
    }
    SUBCASE("nothing fits: best single exp") {
        const std::vector<CandidateBet> c = {bet(0, Outcome::Home, 10, 0.05), bet(1, Outcome::Home, 8, 0.1)};
        const auto acc = relaxed_initialization(c, 0.9, rng);
        REQUIRE(acc.size() == 1);
        CHECK(acc.legs()[0].odds() == 8);
    }
}

TEST_CASE("relaxation rounding matches an independent vertex enumeration") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> odds(1.1, 6.0), prob(0.1, 0.95);
    int compared = 0;
    for (int round = 0; round < 300; ++round) {
        std::vector<CandidateBet> c;
        std::vector<double> v, w;
        for (int m = 0; m < 8; ++m) {
            c.push_back(bet(m, Outcome::Home, odds(rng), prob(rng)));
            v.push_back(std::log(c.back().odds()));
            w.push_back(-std::log(c.back().prob()));
        }
        const double cap = -std::log(0.25);
        const auto x = lp_by_vertices(v, w, cap);
        // round at one half, then drop worst-ratio legs until the floor holds
        std::vector<std::size_t> kept;
        for (std::size_t i = 0; i < c.size(); ++i)
            if (x[i] >= 0.5) kept.push_back(i);
        std::sort(kept.begin(), kept.end(), [&](auto a, auto b) { return v[a] / w[a] > v[b] / w[b]; });
        auto weight = [&] {
            double s = 0;
            for (auto i : kept) s += w[i];
            return s;
        };
        while (kept.size() > 1 && weight() > cap) kept.pop_back();
        if (kept.empty() || weight() > cap) continue;
        std::set<std::pair<double, double>> expected;
        for (auto i : kept) expected.emplace(c[i].odds(), c[i].prob());
        Rng r(round);
        CHECK(legs_of(relaxed_initialization(c, 0.25, r)) == expected);
        ++compared;
    }
    CHECK(compared > 200);
}

TEST_CASE("status rule") {
    auto t = [](double o, double p) { return AccumulatorTotals{o, p, o * p}; };
    CHECK(classify(t(4, 0.5), t(5, 0.6)) == AgentStatus::Inefficient);
    CHECK(classify(t(10, 0.2), t(4, 0.6)) == AgentStatus::Inactive);
    CHECK(classify(t(4, 0.6), t(10, 0.2)) == AgentStatus::Active);
    CHECK(classify(t(4, 0.5), t(4, 0.5)) == AgentStatus::Active);
    CHECK(classify(t(4, 0.5), t(4, 0.6)) == AgentStatus::Inefficient);
}

TEST_CASE("test phase") {
    std::mt19937_64 gen(9);
    EfficientPool pool(testing::random_pool(gen, 6, {"B365"}));
    Rng rng(2);
    for (int round = 0; round < 100; ++round) {
        std::vector<Agent> pop;
        for (int i = 0; i < 2; ++i) pop.push_back(make_agent(pool, random_hypothesis(pool, rng)));
        test_phase(pop, rng);
        // two agents always compare with each other
        CHECK_FALSE((pop[0].status == AgentStatus::Inefficient && pop[1].status == AgentStatus::Inefficient));
        CHECK(pop[0].status == classify(pop[0].totals, pop[1].totals));
        CHECK(pop[1].status == classify(pop[1].totals, pop[0].totals));
    }
    std::vector<Agent> one{make_agent(pool, {0})};
    CHECK_THROWS_AS(test_phase(one, rng), std::invalid_argument);
}

TEST_CASE("diffusion phase") {
    std::mt19937_64 gen(4);
    EfficientPool pool(testing::random_pool(gen, 8, {"B365"}));
    Rng rng(3);
    SUBCASE("all active: unchanged") {
        std::vector<Agent> pop;
        for (int i = 0; i < 10; ++i) pop.push_back(make_agent(pool, random_hypothesis(pool, rng)));
        const auto before = pop;
        diffusion_phase(pop, pool, rng);
        for (std::size_t i = 0; i < pop.size(); ++i) CHECK(pop[i].legs == before[i].legs);
    }
    SUBCASE("inefficient agents get a fresh three-leg hypothesis") {
        std::vector<Agent> pop;
        for (int i = 0; i < 10; ++i) {
            pop.push_back(make_agent(pool, {static_cast<std::uint32_t>(i)}));
            pop.back().status = AgentStatus::Inefficient;
        }
        diffusion_phase(pop, pool, rng);
        for (const auto& a : pop) {
            CHECK(a.legs.size() == 3);
            CHECK(is_feasible(pool, a.legs));
        }
    }
    SUBCASE("inactive agent copies a neighbour of an active peer") {
        std::vector<Agent> pop{make_agent(pool, {0, 3, 6}), make_agent(pool, {1})};
        pop[0].status = AgentStatus::Active;
        pop[1].status = AgentStatus::Inactive;
        diffusion_phase(pop, pool, rng);
        CHECK(pop[0].legs == Hypothesis{0, 3, 6});
        REQUIRE(pop[1].legs.size() == 3);
        int shared = 0;
        for (auto x : pop[1].legs) shared += x == 0 || x == 3 || x == 6;
        CHECK(shared == 2);
        CHECK(is_feasible(pool, pop[1].legs));
    }
}

TEST_CASE("neighborhood move") {
    Rng rng(8);
    const auto a = bet(0, Outcome::Home, 2, 0.5), b = bet(1, Outcome::Home, 2, 0.5), c = bet(2, Outcome::Home, 2, 0.5);
    SUBCASE("fresh match") {
        std::set<std::vector<std::string>> seen;
        for (int i = 0; i < 100; ++i) {
            const auto r = neighborhood_move(Accumulator({a, b}), {a, b, c}, rng);
            CHECK(r.size() == 2);
            CHECK(validate_accumulator(r).empty());
            std::vector<std::string> homes;
            for (const auto& l : r.legs()) homes.push_back(l.match().home_team);
            seen.insert(homes);
        }
        CHECK(seen == std::set<std::vector<std::string>>{{"H0", "H2"}, {"H1", "H2"}});
    }
    SUBCASE("no unselected candidate") {
        CHECK(neighborhood_move(Accumulator({a, b}), {a, b}, rng) == Accumulator({a, b}));
    }
    SUBCASE("same-match swap of the only leg") {
        const auto a2 = bet(0, Outcome::Away, 3, 0.3);
        CHECK(neighborhood_move(Accumulator({a}), {a, a2}, rng) == Accumulator({a2}));
    }
}

TEST_CASE("random hypothesis") {
    std::mt19937_64 gen(12);
    Rng rng(12);
    EfficientPool two(testing::random_pool(gen, 2, {"B365"}));
    for (int i = 0; i < 50; ++i) {
        const auto h = random_hypothesis(two, rng);
        CHECK(h.size() == 2);
        CHECK(is_feasible(two, h));
    }
}

TEST_CASE("search examples") {
    SUBCASE("three strong legs") {
        const auto out = sds_search(one_book({bet(0, Outcome::Home, 2, 0.8), bet(1, Outcome::Home, 2, 0.8),
                                              bet(2, Outcome::Home, 2, 0.8)}),
                                    quick(4.0));
        REQUIRE(out.reason == StopReason::MetThreshold);
        REQUIRE(out.best);
        CHECK(out.best->totals.exp == doctest::Approx(4.096));
        CHECK(out.best->accumulator.size() == 3);
    }
    SUBCASE("unreachable threshold times out") {
        const auto out = sds_search(one_book({bet(0, Outcome::Home, 1.8, 0.5), bet(1, Outcome::Home, 2.5, 0.35),
                                              bet(2, Outcome::Away, 3.0, 0.3)}),
                                    quick(2.0, 50));
        CHECK(out.reason == StopReason::TimedOut);
        CHECK_FALSE(out.best);
        CHECK(out.iterations == 50);
    }
    SUBCASE("min_exp zero stops on the first iteration") {
        std::mt19937_64 gen(1);
        const auto out = sds_search(one_book(testing::random_pool(gen, 5, {"B365"})), quick(0.0));
        CHECK(out.reason == StopReason::MetThreshold);
        CHECK(out.iterations == 1);
    }
    SUBCASE("empty pools") {
        const auto out = sds_search({}, quick(2.0));
        CHECK(out.reason == StopReason::TimedOut);
        CHECK(out.elapsed == 0.0);
        CHECK(out.iterations == 0);
    }
    SUBCASE("wall clock budget") {
        auto p = quick(1e9);
        p.max_iterations.reset();
        p.max_time = 0.2;
        std::mt19937_64 gen(1);
        const auto out = sds_search(one_book(testing::random_pool(gen, 5, {"B365"})), p);
        CHECK(out.reason == StopReason::TimedOut);
        CHECK(out.elapsed >= 0.2);
        CHECK(out.elapsed < 1.0);
    }
}

TEST_CASE("search soundness, feasibility and determinism on random pools") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> threshold(0.8, 1.6);
    for (int round = 0; round < 60; ++round) {
        const auto c = testing::random_pool(gen, 6, {"B365", "BW"}, 0.7);
        if (c.empty()) continue;
        auto params = quick(threshold(gen), 100);
        params.seed = round;
        if (round % 3 == 0) params.max_legs = 2;

        std::size_t observed = 0;
        bool all_feasible = true;
        SearchHooks hooks;
        hooks.observe = [&](const EfficientPool& pool, std::span<const Agent> agents) {
            for (const auto& a : agents) {
                ++observed;
                all_feasible = all_feasible && is_feasible(pool, a.legs) &&
                               validate_accumulator(to_accumulator(pool, a.legs)).empty();
                const auto t = evaluate(pool, a.legs);
                all_feasible = all_feasible && t.exp == a.totals.exp;
            }
        };
        const auto pools = prepare_pools(c, FilterMode::IntraBookmaker).pools;
        const auto out = sds_search(pools, params, hooks);
        CHECK(observed > 0);
        CHECK(all_feasible);
        CHECK(out.best.has_value() == (out.reason == StopReason::MetThreshold));
        if (out.best) {
            const auto t = accumulator_totals(out.best->accumulator);
            CHECK(t.exp == out.best->totals.exp);
            CHECK(t.exp >= params.min_exp);
            CHECK(t.prob >= params.p_min);
            CHECK(validate_accumulator(out.best->accumulator).empty());
            if (params.max_legs) CHECK(out.best->accumulator.size() <= *params.max_legs);
            // never better than exhaustive enumeration
            const auto oracle = enumerate_oracle(pools.at(out.best->accumulator.bookmaker()), params.p_min);
            REQUIRE(oracle.best);
            CHECK(t.exp <= oracle.best->totals.exp);
        }
        const auto again = sds_search(pools, params);
        CHECK(again.reason == out.reason);
        CHECK(again.iterations == out.iterations);
        CHECK(again.best.has_value() == out.best.has_value());
        if (out.best) CHECK(again.best->accumulator == out.best->accumulator);
    }
}

TEST_CASE("threaded search is sound") {
    std::mt19937_64 gen(31);
    const auto c = testing::random_pool(gen, 8, {"B365", "BW", "IW"});
    auto params = quick(1.0, 100);
    params.threads = 3;
    const auto out = sds_search(prepare_pools(c, FilterMode::IntraBookmaker).pools, params);
    if (out.best) {
        CHECK(out.best->totals.exp >= 1.0);
        CHECK(out.best->totals.prob >= 0.25);
        CHECK(validate_accumulator(out.best->accumulator).empty());
    }
}

TEST_CASE("trace records") {
    std::vector<TraceRecord> rec;
    SearchHooks hooks;
    hooks.trace = [&](const TraceRecord& r) { rec.push_back(r); };
    sds_search(one_book({bet(0, Outcome::Home, 1.8, 0.5), bet(1, Outcome::Home, 2.5, 0.35)}), quick(2.0, 5), hooks);
    REQUIRE(rec.size() == 6);
    CHECK(rec.front().iteration == 0);
    CHECK(rec.back().iteration == 5);
    for (const auto& r : rec) CHECK((r.active_fraction >= 0.0 && r.active_fraction <= 1.0));
}
