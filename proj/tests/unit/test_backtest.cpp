#include "acca/backtest.hpp"
#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <stdexcept>

using namespace acca;
using testing::bet;

namespace {

MatchdayPool single_bet_pool(int matchday, double odds, double prob, Outcome result) {
    MatchdayPool pool;
    pool.matchday = matchday;
    const auto m = make_match("E0", matchday, "Home", "Away");
    pool.candidates.emplace_back(m, BookmakerRef{"B365"}, Outcome::Home, odds, prob);
    pool.results[m] = result;
    return pool;
}

SolverParams fast_params(double min_exp) {
    SolverParams p;
    p.min_exp = min_exp;
    p.max_time = 10.0;
    p.max_iterations = 40;
    p.population = 20;
    p.seed = 42;
    return p;
}

}  // namespace

TEST_CASE("settle") {
    const auto a = bet(0, Outcome::Home, 2.0, 0.5), b = bet(1, Outcome::Away, 3.0, 0.3);
    const Accumulator acc({a, b});
    std::map<MatchRef, Outcome> results{{a.match(), Outcome::Home}, {b.match(), Outcome::Away}};
    CHECK(settle(acc, results, 10.0) == doctest::Approx(50.0));
    results[b.match()] = Outcome::Draw;
    CHECK(settle(acc, results, 10.0) == -10.0);
    CHECK(settle(acc, results, 0.0) == 0.0);
    results.erase(b.match());
    try {
        settle(acc, results, 10.0);
        FAIL("expected domain_error");
    } catch (const domain_error& e) {
        CHECK(std::string(e.what()).find("H1 v A1") != std::string::npos);
    }
}

TEST_CASE("combo names") {
    for (const auto& c : all_combos) CHECK(parse_combo(to_string(c)) == c);
    CHECK(model_label({Selector::Singles, Sizing::VarianceAdjusted}) == "Single betting (variance adjusted)");
    CHECK_FALSE(parse_combo("acc"));
}

TEST_CASE("conservative staking base") {
    // matchday 1: stake 3 (1/(2*20*5/6) = 0.03 of 100), lost
    // matchday 2: stake 40.0 of base 97 at odds 1.5, won: +20
    const double p2 = 1.0 - 1.0 / (2 * 1.5 * (40.0 / 97.0));
    const std::vector<MatchdayPool> pools = {single_bet_pool(1, 20.0, 1.0 / 6, Outcome::Away),
                                             single_bet_pool(2, 1.5, p2, Outcome::Home)};
    const auto ledger = run_season(pools, {Selector::Singles, Sizing::VarianceAdjusted}, fast_params(2.0), 100.0);
    REQUIRE(ledger.size() == 2);
    CHECK(ledger[0].wagers.at(0).amount == doctest::Approx(3.0));
    CHECK(ledger[0].bankroll_after == doctest::Approx(97.0));
    CHECK(ledger[0].staking_base_after == doctest::Approx(97.0));
    CHECK(ledger[1].wagers.at(0).amount == doctest::Approx(40.0));
    CHECK(ledger[1].net_gain == doctest::Approx(20.0));
    CHECK(ledger[1].bankroll_after == doctest::Approx(117.0));
    CHECK(ledger[1].staking_base_after == doctest::Approx(97.0));
}

TEST_CASE("accumulator strategy") {
    MatchdayPool pool;
    pool.matchday = 1;
    for (int m = 0; m < 3; ++m) {
        pool.candidates.push_back(bet(m, Outcome::Home, 2.0, 0.8));
        pool.results[testing::match(m)] = Outcome::Home;
    }
    SUBCASE("winning three-leg accumulator") {
        const auto ledger = run_season({pool}, {Selector::Accumulator, Sizing::ConservativeKelly}, fast_params(4.0), 100.0);
        REQUIRE(ledger.at(0).wagers.size() == 1);
        const auto& w = ledger[0].wagers[0];
        CHECK(w.odds == doctest::Approx(8.0));
        CHECK(w.fraction == doctest::Approx(kelly_fraction(0.512, 8.0)));
        CHECK(w.won);
        CHECK(ledger[0].net_gain == doctest::Approx(w.amount * 7.0));
        CHECK(ledger[0].search == StopReason::MetThreshold);
    }
    SUBCASE("timed out: no wager, bankroll unchanged") {
        const auto ledger = run_season({pool}, {Selector::Accumulator, Sizing::VarianceAdjusted}, fast_params(1e6), 100.0);
        CHECK(ledger.at(0).wagers.empty());
        CHECK(ledger[0].bankroll_after == 100.0);
        CHECK(ledger[0].search == StopReason::TimedOut);
        const auto s = summarize(ledger);
        CHECK(s.total_gains == 0.0);
        CHECK_FALSE(s.average_odds);
    }
    CHECK(run_season({}, {}, fast_params(2.0), 100.0).empty());
    CHECK_THROWS_AS(run_season({pool}, {}, fast_params(2.0), 0.0), std::invalid_argument);
}

TEST_CASE("summary") {
    SUBCASE("one lost wager") {
        LedgerEntry e;
        e.matchday = 1;
        e.bankroll_before = e.staking_base_before = 100.0;
        Wager w;
        w.odds = 83.1;
        w.prob = 0.047;
        w.fraction = 0.0302;
        w.amount = 3.02;
        w.net_gain = -3.02;
        e.wagers.push_back(w);
        e.net_gain = -3.02;
        e.bankroll_after = e.staking_base_after = 96.98;
        const auto s = summarize({e});
        CHECK(*s.average_odds == doctest::Approx(83.1));
        CHECK(*s.average_stakes_per_matchday == doctest::Approx(0.0302));
        CHECK(s.total_gains == doctest::Approx(-0.0302));
        CHECK(s.winning_bet_count == 0);
    }
    SUBCASE("average odds over matchdays") {
        std::vector<LedgerEntry> ledger(3);
        for (int i = 0; i < 3; ++i) ledger[i].bankroll_before = ledger[i].bankroll_after = 100.0;
        Wager w;
        w.odds = 2.0;
        ledger[0].wagers.push_back(w);
        w.odds = 4.0;
        ledger[2].wagers.push_back(w);
        CHECK(*summarize(ledger).average_odds == doctest::Approx(3.0));
        CHECK(summarize(ledger).matchdays_with_bets == 2);
    }
    CHECK_FALSE(summarize({}).average_probability);
}

TEST_CASE("ledger accounting on the shipped fixture season") {
    const auto season = load_season({std::filesystem::path(ACCA_TEST_DATA) / "mini.csv"});
    for (const auto& combo : all_combos) {
        CAPTURE(to_string(combo));
        const auto params = fast_params(1.02);
        const auto ledger = run_season(season.pools, combo, params, 100.0);
        REQUIRE(ledger.size() == season.pools.size());
        double bankroll = 100.0, trough = 100.0, sum = 0.0;
        for (const auto& e : ledger) {
            CHECK(e.bankroll_before == bankroll);
            CHECK(e.staking_base_before == trough);
            double net = 0.0, staked = 0.0;
            for (const auto& w : e.wagers) {
                net += w.net_gain;
                staked += w.amount;
                CHECK(w.amount == doctest::Approx(w.fraction * e.staking_base_before));
            }
            CHECK(staked <= e.staking_base_before);
            CHECK(e.net_gain == net);
            if (e.wagers.empty()) CHECK(e.bankroll_after == e.bankroll_before);
            bankroll += e.net_gain;
            sum += e.net_gain;
            trough = std::min(trough, bankroll);
            CHECK(e.bankroll_after == bankroll);
            CHECK(e.staking_base_after == trough);
            CHECK(e.bankroll_after >= 0.0);
        }
        CHECK(ledger.back().bankroll_after == doctest::Approx(100.0 + sum).epsilon(1e-12));

        std::ostringstream a, b;
        write_ledger_csv(a, ledger, combo);
        write_ledger_csv(b, run_season(season.pools, combo, params, 100.0), combo);
        CHECK(a.str() == b.str());
        CHECK(a.str().rfind("matchday,strategy,stake,odds,prob,won,net_gain,bankroll\n", 0) == 0);
    }
}

TEST_CASE("matchday seeds differ") {
    CHECK(matchday_seed(0, 1) != matchday_seed(0, 2));
    CHECK(matchday_seed(1, 1) != matchday_seed(0, 1));
    CHECK(matchday_seed(7, 3) == matchday_seed(7, 3));
}

TEST_CASE("cumulative gains") {
    std::vector<LedgerEntry> ledger(2);
    ledger[0].matchday = 1;
    ledger[0].bankroll_before = 100;
    ledger[0].bankroll_after = 90;
    ledger[1].matchday = 2;
    ledger[1].bankroll_after = 130;
    std::ostringstream out;
    write_cumulative_gains_csv(out, ledger);
    CHECK(out.str() == "matchday,cumulative_gain\n1,-0.1\n2,0.3\n");
}
