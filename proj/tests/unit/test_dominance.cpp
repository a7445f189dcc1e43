#include "acca/dominance.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace acca;
using testing::bet;

namespace {

// Quadratic reference: keep c unless some other candidate in scope is at
// least as good on both values and strictly better on one.
std::vector<CandidateBet> brute_force(const std::vector<CandidateBet>& c, bool per_bookmaker) {
    std::vector<CandidateBet> kept;
    for (const auto& x : c) {
        bool dominated = false;
        for (const auto& y : c) {
            if (per_bookmaker && y.bookmaker() != x.bookmaker()) continue;
            if (y.odds() >= x.odds() && y.prob() >= x.prob() && (y.odds() > x.odds() || y.prob() > x.prob()))
                dominated = true;
        }
        if (!dominated) kept.push_back(x);
    }
    return kept;
}

bool contains(const std::vector<CandidateBet>& v, const CandidateBet& x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

TEST_CASE("dominance relation") {
    const auto a = bet(0, Outcome::Home, 2.0, 0.5);
    CHECK(dominates(bet(1, Outcome::Home, 2.1, 0.5), a));
    CHECK(dominates(bet(1, Outcome::Home, 2.0, 0.6), a));
    CHECK_FALSE(dominates(bet(1, Outcome::Home, 2.0, 0.5), a));
    CHECK_FALSE(dominates(bet(1, Outcome::Home, 2.5, 0.4), a));
    CHECK_FALSE(dominates(a, a));
}

TEST_CASE("intra filter small example") {
    const std::vector<CandidateBet> c = {
        bet(0, Outcome::Home, 2.0, 0.50),  // kept
        bet(0, Outcome::Draw, 3.0, 0.30),  // kept
        bet(1, Outcome::Home, 1.9, 0.45),  // dominated by the first
        bet(1, Outcome::Away, 3.0, 0.30),  // tie with the second, kept
        bet(2, Outcome::Away, 2.9, 0.30),  // dominated by both 3.0 bets
    };
    const auto r = intra_filter(c);
    CHECK(r.kept == std::vector<CandidateBet>{c[0], c[1], c[3]});
    CHECK(r.report.input_count == 5);
    CHECK(r.report.kept_count == 3);
    CHECK(r.report.reduction() == doctest::Approx(0.4));
    REQUIRE(r.report.eliminated.size() == 2);
    CHECK(r.report.eliminated[0].bet == c[2]);
    CHECK(r.report.eliminated[0].dominator == c[0]);
    // smallest dominator by (bookmaker, match, outcome)
    CHECK(r.report.eliminated[1].dominator == c[1]);
}

TEST_CASE("intra filter stays within a bookmaker, inter does not") {
    const std::vector<CandidateBet> c = {bet(0, Outcome::Home, 2.0, 0.5, "B365"), bet(0, Outcome::Home, 2.1, 0.5, "BW")};
    CHECK(intra_filter(c).kept.size() == 2);
    const auto r = inter_filter(c);
    REQUIRE(r.kept.size() == 1);
    CHECK(r.kept[0].bookmaker().code == "BW");
}

TEST_CASE("empty and single inputs") {
    CHECK(intra_filter({}).kept.empty());
    CHECK(inter_filter({}).report.reduction() == 0.0);
    const std::vector<CandidateBet> one = {bet(0, Outcome::Home, 2.0, 0.5)};
    CHECK(intra_filter(one).kept == one);
}

TEST_CASE("filters equal the quadratic reference on random pools") {
    std::mt19937_64 rng(20150808);
    std::uniform_int_distribution<int> matches(1, 13);
    std::uniform_real_distribution<double> keep(0.3, 1.0);
    for (int round = 0; round < 200; ++round) {
        const auto c = testing::random_pool(rng, matches(rng), {"B365", "BW", "IW", "LB", "GB"}, keep(rng));
        const auto intra = intra_filter(c);
        const auto inter = inter_filter(c);
        CHECK(intra.kept == brute_force(c, true));
        CHECK(inter.kept == brute_force(c, false));
        for (const auto& k : inter.kept) CHECK(contains(intra.kept, k));
        CHECK(intra_filter(intra.kept).kept == intra.kept);
        CHECK(inter_filter(inter.kept).kept == inter.kept);
        CHECK(intra.kept.size() + intra.report.eliminated.size() == c.size());
        for (const auto& e : inter.report.eliminated) CHECK(dominates(e.dominator, e.bet));
        for (const auto& e : intra.report.eliminated) {
            CHECK(dominates(e.dominator, e.bet));
            CHECK(e.dominator.bookmaker() == e.bet.bookmaker());
        }
    }
}

TEST_CASE("prepare_pools") {
    std::mt19937_64 rng(3);
    const auto c = testing::random_pool(rng, 10, {"B365", "BW", "IW"});
    const auto none = prepare_pools(c, FilterMode::None);
    CHECK(none.report.reduction() == 0.0);
    CHECK(none.pools.size() == 3);
    for (const auto& [b, p] : none.pools) CHECK(p.size() == 30);

    const auto intra = prepare_pools(c, FilterMode::IntraBookmaker);
    const auto inter = prepare_pools(c, FilterMode::InterBookmaker);
    CHECK(intra.report.kept_count == intra_filter(c).kept.size());
    CHECK(inter.report.kept_count == inter_filter(c).kept.size());
    for (const auto& [b, p] : inter.pools)
        for (const auto& x : p) {
            CHECK(x.bookmaker() == b);
            CHECK(contains(intra.pools.at(b), x));
        }
}

TEST_CASE("filter mode names") {
    for (auto m : {FilterMode::None, FilterMode::IntraBookmaker, FilterMode::InterBookmaker})
        CHECK(parse_filter_mode(to_string(m)) == m);
    CHECK_FALSE(parse_filter_mode("both"));
}
