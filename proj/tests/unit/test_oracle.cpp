#include "acca/solver.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>
#include <stdexcept>

using namespace acca;
using testing::bet;

TEST_CASE("oracle examples") {
    SUBCASE("three strong legs") {
        const auto r = enumerate_oracle({bet(0, Outcome::Home, 2, 0.8), bet(1, Outcome::Home, 2, 0.8),
                                         bet(2, Outcome::Home, 2, 0.8)},
                                        0.25);
        REQUIRE(r.best);
        CHECK(r.best->totals.exp == doctest::Approx(4.096));
        CHECK(r.best->accumulator.size() == 3);
        CHECK(r.enumerated == 7);
    }
    SUBCASE("single candidate") {
        const auto r = enumerate_oracle({bet(0, Outcome::Home, 2, 0.5)}, 0.25);
        REQUIRE(r.pareto_front.size() == 1);
        CHECK(r.pareto_front[0].accumulator.size() == 1);
    }
    SUBCASE("same match") {
        const auto r = enumerate_oracle({bet(0, Outcome::Home, 2, 0.5), bet(0, Outcome::Away, 3, 0.3)}, 0.25);
        CHECK(r.enumerated == 2);
        for (const auto& f : r.pareto_front) CHECK(f.accumulator.size() == 1);
    }
    SUBCASE("nothing above the floor") {
        const auto r = enumerate_oracle({bet(0, Outcome::Home, 9, 0.1)}, 0.25);
        CHECK_FALSE(r.best);
        CHECK(r.pareto_front.size() == 1);
    }
}

TEST_CASE("oracle limits") {
    std::vector<CandidateBet> big;
    for (int m = 0; m < 16; ++m)
        for (auto o : all_outcomes) big.push_back(bet(m, o, 3, 0.3));
    CHECK(oracle_subset_count(big) > oracle_subset_limit);
    CHECK_THROWS_AS(enumerate_oracle(big, 0.25), oracle_limit_exceeded);
    try {
        enumerate_oracle(big, 0.25);
    } catch (const oracle_limit_exceeded& e) {
        CHECK(std::string(e.what()) == "oracle limit exceeded");
    }
    CHECK(oracle_subset_count({bet(0, Outcome::Home, 2, 0.5), bet(0, Outcome::Draw, 3, 0.3), bet(1, Outcome::Home, 2, 0.5)}) ==
          5);
    CHECK_THROWS_AS(enumerate_oracle({bet(0, Outcome::Home, 2, 0.5)}, 0.25, 0), std::invalid_argument);
}

TEST_CASE("oracle agrees with a bitmask enumeration") {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 100; ++round) {
        const auto c = testing::random_pool(rng, 4, {"B365"}, 0.8);
        if (c.empty()) continue;
        // every subset, feasibility checked through validate_accumulator
        double best = -1.0;
        std::uint64_t feasible = 0;
        std::vector<std::pair<double, double>> points;
        for (std::uint32_t mask = 1; mask < (1u << c.size()); ++mask) {
            std::vector<CandidateBet> legs;
            for (std::size_t i = 0; i < c.size(); ++i)
                if (mask >> i & 1) legs.push_back(c[i]);
            Accumulator acc(legs);
            if (!validate_accumulator(acc).empty()) continue;
            ++feasible;
            const auto t = accumulator_totals(acc);
            points.emplace_back(t.odds, t.prob);
            if (t.prob >= 0.25) best = std::max(best, t.exp);
        }
        const auto r = enumerate_oracle(c, 0.25);
        CHECK(r.enumerated == feasible);
        CHECK(oracle_subset_count(c) == feasible);
        if (best < 0) {
            CHECK_FALSE(r.best);
        } else {
            REQUIRE(r.best);
            CHECK(r.best->totals.exp == doctest::Approx(best).epsilon(1e-12));
        }
        // front members are pairwise non-dominated and dominated by nothing
        for (const auto& f : r.pareto_front)
            for (const auto& [o, p] : points)
                CHECK_FALSE((o >= f.totals.odds * (1 + 1e-12) && p >= f.totals.prob * (1 + 1e-12)));
        std::size_t front_size = 0;
        for (const auto& [o, p] : points) {
            bool dominated = false;
            for (const auto& [o2, p2] : points)
                if (o2 >= o && p2 >= p && (o2 > o || p2 > p)) dominated = true;
            front_size += !dominated;
        }
        CHECK(r.pareto_front.size() == front_size);
    }
}
