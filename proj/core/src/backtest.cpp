#include "acca/backtest.hpp"

#include "acca/dominance.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace acca {

std::string to_string(const StrategyCombo& c) {
    std::string s = c.selector == Selector::Accumulator ? "acc" : "singles";
    return s + (c.sizing == Sizing::ConservativeKelly ? "-kelly" : "-va");
}

std::optional<StrategyCombo> parse_combo(std::string_view text) noexcept {
    for (const auto& c : all_combos)
        if (to_string(c) == text) return c;
    return std::nullopt;
}

std::string model_label(const StrategyCombo& c) {
    std::string s = c.selector == Selector::Accumulator ? "Accumulator betting" : "Single betting";
    return s + (c.sizing == Sizing::ConservativeKelly ? " (conservative Kelly)" : " (variance adjusted)");
}

namespace {

bool wins(const Accumulator& acc, const std::map<MatchRef, Outcome>& results) {
    bool all = true;
    for (const auto& leg : acc.legs()) {
        auto it = results.find(leg.match());
        if (it == results.end()) throw domain_error("no result for " + to_string(leg.match()));
        all = all && it->second == leg.outcome();
    }
    return all;
}

}  // namespace

double settle(const Accumulator& acc, const std::map<MatchRef, Outcome>& results, double amount) {
    const bool won = wins(acc, results);
    if (amount == 0.0) return 0.0;
    return won ? amount * (accumulator_totals(acc).odds - 1.0) : -amount;
}

std::uint64_t matchday_seed(std::uint64_t seed, int matchday) noexcept {
    // splitmix64 finalizer over the pair
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(matchday + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

namespace {

std::vector<Wager> select_singles(const PreparedPools& prepared, Sizing sizing) {
    std::vector<Wager> wagers;
    for (const auto& [book, bets] : prepared.pools)
        for (const auto& bet : bets) {
            const double f = stake_fraction(sizing, bet.prob(), bet.odds());
            if (f <= 0.0) continue;
            Wager w;
            w.target = Accumulator({bet});
            w.odds = bet.odds();
            w.prob = bet.prob();
            w.fraction = f;
            wagers.push_back(std::move(w));
        }
    std::vector<double> fractions;
    for (const auto& w : wagers) fractions.push_back(w.fraction);
    normalize_fractions(fractions);
    for (std::size_t i = 0; i < wagers.size(); ++i) wagers[i].fraction = fractions[i];
    return wagers;
}

}  // namespace

std::vector<LedgerEntry> run_season(const std::vector<MatchdayPool>& pools, const StrategyCombo& combo,
                                    const SolverParams& params, double initial_bankroll, const BacktestHooks& hooks) {
    validate(params);
    if (!(initial_bankroll > 0.0)) throw std::invalid_argument("initial bankroll must be positive");

    std::vector<LedgerEntry> ledger;
    double bankroll = initial_bankroll;
    double base = initial_bankroll;

    for (const auto& pool : pools) {
        LedgerEntry entry;
        entry.matchday = pool.matchday;
        entry.bankroll_before = bankroll;
        entry.staking_base_before = base;

        const auto prepared = prepare_pools(pool.candidates, params.filter_mode);
        if (combo.selector == Selector::Singles) {
            entry.wagers = select_singles(prepared, combo.sizing);
        } else {
            auto p = params;
            p.seed = matchday_seed(params.seed, pool.matchday);
            const auto outcome = sds_search(prepared.pools, p);
            entry.search = outcome.reason;
            if (outcome.best) {
                const auto& t = outcome.best->totals;
                const double f = stake_fraction(combo.sizing, t.prob, t.odds);
                if (f > 0.0) {
                    Wager w;
                    w.target = outcome.best->accumulator;
                    w.odds = t.odds;
                    w.prob = t.prob;
                    w.fraction = f;
                    entry.wagers.push_back(std::move(w));
                }
            }
        }

        for (auto& w : entry.wagers) w.amount = w.fraction * base;
        // Keep the matchday outlay within the base despite rounding.
        while (std::accumulate(entry.wagers.begin(), entry.wagers.end(), 0.0,
                               [](double s, const Wager& w) { return s + w.amount; }) > base)
            for (auto& w : entry.wagers) w.amount *= 1.0 - 1e-15;

        for (auto& w : entry.wagers) {
            w.net_gain = settle(w.target, pool.results, w.amount);
            w.won = wins(w.target, pool.results);
            entry.net_gain += w.net_gain;
        }
        bankroll = bankroll + entry.net_gain;
        base = std::min(base, bankroll);
        entry.bankroll_after = bankroll;
        entry.staking_base_after = base;

        if (hooks.on_matchday) hooks.on_matchday(entry);
        ledger.push_back(std::move(entry));
    }
    return ledger;
}

SeasonSummary summarize(const std::vector<LedgerEntry>& ledger) {
    SeasonSummary s;
    if (ledger.empty()) return s;
    s.initial_bankroll = ledger.front().bankroll_before;
    s.final_bankroll = ledger.back().bankroll_after;
    s.total_gains = (s.final_bankroll - s.initial_bankroll) / s.initial_bankroll;

    double odds = 0.0, prob = 0.0, stakes = 0.0, per_bet = 0.0;
    for (const auto& e : ledger) {
        if (e.wagers.empty()) continue;
        ++s.matchdays_with_bets;
        double o = 0.0, p = 0.0, f = 0.0;
        for (const auto& w : e.wagers) {
            o += w.odds;
            p += w.prob;
            f += w.fraction;
            per_bet += w.fraction;
            s.winning_bet_count += w.won;
            ++s.wager_count;
        }
        const double n = static_cast<double>(e.wagers.size());
        odds += o / n;
        prob += p / n;
        stakes += f;
    }
    if (s.matchdays_with_bets > 0) {
        const double m = static_cast<double>(s.matchdays_with_bets);
        s.average_odds = odds / m;
        s.average_probability = prob / m;
        s.average_stakes_per_matchday = stakes / m;
        s.average_stake_per_bet = per_bet / static_cast<double>(s.wager_count);
    }
    return s;
}

void write_ledger_csv(std::ostream& out, const std::vector<LedgerEntry>& ledger, const StrategyCombo& combo) {
    const auto name = to_string(combo);
    std::ostringstream buf;
    buf << std::setprecision(17);
    buf << "matchday,strategy,stake,odds,prob,won,net_gain,bankroll\n";
    for (const auto& e : ledger) {
        if (e.wagers.empty()) {
            buf << e.matchday << ',' << name << ",0,,,,0," << e.bankroll_after << '\n';
            continue;
        }
        // bankroll column: bankroll once the whole matchday has settled
        for (const auto& w : e.wagers)
            buf << e.matchday << ',' << name << ',' << w.amount << ',' << w.odds << ',' << w.prob << ','
                << (w.won ? 1 : 0) << ',' << w.net_gain << ',' << e.bankroll_after << '\n';
    }
    out << buf.str();
}

void write_cumulative_gains_csv(std::ostream& out, const std::vector<LedgerEntry>& ledger) {
    out << "matchday,cumulative_gain\n";
    if (ledger.empty()) return;
    const double initial = ledger.front().bankroll_before;
    std::ostringstream buf;
    buf << std::setprecision(10);
    for (const auto& e : ledger) buf << e.matchday << ',' << (e.bankroll_after - initial) / initial << '\n';
    out << buf.str();
}

}  // namespace acca
