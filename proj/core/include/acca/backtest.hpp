#pragma once

#include "acca/domain.hpp"
#include "acca/ingest.hpp"
#include "acca/solver.hpp"
#include "acca/staking.hpp"

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace acca {

enum class Selector { Accumulator, Singles };

struct StrategyCombo {
    Selector selector = Selector::Accumulator;
    Sizing sizing = Sizing::ConservativeKelly;

    friend bool operator==(const StrategyCombo&, const StrategyCombo&) = default;
};

inline constexpr StrategyCombo all_combos[] = {
    {Selector::Accumulator, Sizing::ConservativeKelly},
    {Selector::Accumulator, Sizing::VarianceAdjusted},
    {Selector::Singles, Sizing::ConservativeKelly},
    {Selector::Singles, Sizing::VarianceAdjusted},
};

/// "acc-kelly", "acc-va", "singles-kelly", "singles-va".
std::string to_string(const StrategyCombo& c);
std::optional<StrategyCombo> parse_combo(std::string_view text) noexcept;
/// Human-readable model label, e.g. "Accumulator betting (conservative Kelly)".
std::string model_label(const StrategyCombo& c);

/// Net gain of staking `amount` on `acc`: amount * (odds - 1) when every leg
/// matches its result, -amount otherwise. Throws domain_error naming the
/// first leg whose match has no result.
double settle(const Accumulator& acc, const std::map<MatchRef, Outcome>& results, double amount);

struct Wager {
    Accumulator target;  // one leg for single bets
    double odds = 0.0;
    double prob = 0.0;
    double fraction = 0.0;
    double amount = 0.0;
    bool won = false;
    double net_gain = 0.0;
};

struct LedgerEntry {
    int matchday = 0;
    std::vector<Wager> wagers;
    double net_gain = 0.0;
    double bankroll_before = 0.0;
    double bankroll_after = 0.0;
    double staking_base_before = 0.0;
    double staking_base_after = 0.0;
    /// Solver outcome for accumulator strategies.
    std::optional<StopReason> search;
};

struct BacktestHooks {
    std::function<void(const LedgerEntry&)> on_matchday;
};

/// Replays the pools in order. The staking base starts at the initial
/// bankroll and after every matchday becomes min(base, bankroll): losses
/// shrink it, gains never raise it.
std::vector<LedgerEntry> run_season(const std::vector<MatchdayPool>& pools, const StrategyCombo& combo,
                                    const SolverParams& params, double initial_bankroll,
                                    const BacktestHooks& hooks = {});

/// Per-matchday solver seed derived from the run seed.
std::uint64_t matchday_seed(std::uint64_t seed, int matchday) noexcept;

struct SeasonSummary {
    // Averages over matchdays with at least one wager; absent when none.
    std::optional<double> average_odds;
    std::optional<double> average_probability;
    std::optional<double> average_stakes_per_matchday;  // summed fractions per matchday
    std::optional<double> average_stake_per_bet;       // mean fraction over all wagers
    double total_gains = 0.0;                           // (final - initial) / initial
    std::size_t winning_bet_count = 0;
    std::size_t wager_count = 0;
    std::size_t matchdays_with_bets = 0;
    double initial_bankroll = 0.0;
    double final_bankroll = 0.0;
};

SeasonSummary summarize(const std::vector<LedgerEntry>& ledger);

/// matchday,strategy,stake,odds,prob,won,net_gain,bankroll: one row per
/// wager, one row with empty bet columns for matchdays without wagers.
void write_ledger_csv(std::ostream& out, const std::vector<LedgerEntry>& ledger, const StrategyCombo& combo);

/// matchday,cumulative_gain (fraction of the initial bankroll).
void write_cumulative_gains_csv(std::ostream& out, const std::vector<LedgerEntry>& ledger);

}  // namespace acca
