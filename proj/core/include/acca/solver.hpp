#pragma once

#include "acca/domain.hpp"
#include "acca/dominance.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace acca {

using Rng = std::mt19937_64;

struct SolverParams {
    double p_min = 0.25;
    double min_exp = 2.0;
    double max_time = 600.0;  // seconds, shared by all bookmakers of a matchday
    std::size_t population = 50;
    std::uint64_t seed = 0;
    std::optional<std::size_t> max_legs;
    FilterMode filter_mode = FilterMode::IntraBookmaker;
    /// Deterministic budget in addition to max_time; counts search rounds.
    std::optional<std::uint64_t> max_iterations;
    /// Values above 1 run bookmaker populations on separate threads. The
    /// result is then no longer reproducible from the seed.
    unsigned threads = 1;
};

/// Throws std::invalid_argument describing the first invalid field.
void validate(const SolverParams& params);

/// One bookmaker's candidate bets in canonical leg order, with per-candidate
/// log values and interned match ids. Index sets into this pool are the
/// solver's working representation of an accumulator.
class EfficientPool {
public:
    EfficientPool() = default;
    /// All candidates must share one bookmaker; duplicates are removed.
    explicit EfficientPool(std::vector<CandidateBet> candidates);

    std::size_t size() const noexcept { return bets_.size(); }
    bool empty() const noexcept { return bets_.empty(); }
    const CandidateBet& operator[](std::size_t i) const { return bets_[i]; }
    std::span<const CandidateBet> bets() const noexcept { return bets_; }

    std::uint32_t match_id(std::size_t i) const { return match_id_[i]; }
    std::size_t match_count() const noexcept { return match_count_; }
    double log_odds(std::size_t i) const { return log_odds_[i]; }
    double log_prob(std::size_t i) const { return log_prob_[i]; }

    std::optional<std::size_t> index_of(const CandidateBet& bet) const;

private:
    std::vector<CandidateBet> bets_;
    std::vector<std::uint32_t> match_id_;
    std::vector<double> log_odds_;
    std::vector<double> log_prob_;
    std::size_t match_count_ = 0;
};

/// Sorted, duplicate-free pool indices.
using Hypothesis = std::vector<std::uint32_t>;

/// Bit-identical to accumulator_totals(to_accumulator(pool, h)).
AccumulatorTotals evaluate(const EfficientPool& pool, const Hypothesis& h);
Accumulator to_accumulator(const EfficientPool& pool, const Hypothesis& h);
/// nullopt if a leg is not a pool member.
std::optional<Hypothesis> to_hypothesis(const EfficientPool& pool, const Accumulator& acc);
/// At most one leg per match (the bookmaker is shared by construction).
bool is_feasible(const EfficientPool& pool, const Hypothesis& h);

enum class AgentStatus { Active, Inactive, Inefficient };

std::string_view to_string(AgentStatus s) noexcept;

struct Agent {
    Hypothesis legs;
    AccumulatorTotals totals;
    AgentStatus status = AgentStatus::Active;
};

Agent make_agent(const EfficientPool& pool, Hypothesis legs);

/// Greedy solution of the log-domain continuous relaxation
///   max sum x*ln(odds)  s.t.  sum x*(-ln prob) <= -ln(prob_floor), 0 <= x <= 1,
/// rounded at 0.5, with same-match conflicts resolved in favour of the most
/// probable outcome. Falls back to the single highest-exp candidate when the
/// rounded solution is empty. `max_legs` keeps the highest-ratio legs.
Hypothesis relaxed_initialization(const EfficientPool& pool, double prob_floor, Rng& rng,
                                  std::optional<std::size_t> max_legs = std::nullopt);
Accumulator relaxed_initialization(const std::vector<CandidateBet>& candidates, double prob_floor, Rng& rng);

/// Status of an agent holding `self` after comparing with a peer holding `peer`.
AgentStatus classify(const AccumulatorTotals& self, const AccumulatorTotals& peer) noexcept;

/// Synchronous test phase: every agent is compared with a uniformly drawn
/// other agent, using the totals as they were before the phase.
void test_phase(std::vector<Agent>& population, Rng& rng);

/// Uniformly random feasible accumulator of `legs` distinct-match candidates
/// (fewer if the pool covers fewer matches).
Hypothesis random_hypothesis(const EfficientPool& pool, Rng& rng, std::size_t legs = 3);

/// Replaces one uniformly chosen leg by a uniformly chosen unselected pool
/// member whose match is not covered by the remaining legs. Returns the input
/// unchanged when no replacement exists.
Hypothesis neighborhood_move(const Hypothesis& h, const EfficientPool& pool, Rng& rng);
Accumulator neighborhood_move(const Accumulator& acc, const std::vector<CandidateBet>& pool, Rng& rng);

/// Inefficient agents are reinitialized; inactive agents copy a neighbour of
/// a random active peer, or are reinitialized when the peer is not active.
void diffusion_phase(std::vector<Agent>& population, const EfficientPool& pool, Rng& rng,
                     std::size_t reinit_legs = 3);

enum class StopReason { MetThreshold, TimedOut };

std::string_view to_string(StopReason r) noexcept;

struct Incumbent {
    Accumulator accumulator;
    AccumulatorTotals totals;
};

struct SearchOutcome {
    /// Present iff reason == MetThreshold.
    std::optional<Incumbent> best;
    /// Best hypothesis with prob >= p_min (and within max_legs) seen during
    /// the search regardless of min_exp; diagnostics only.
    std::optional<Incumbent> best_seen;
    std::uint64_t iterations = 0;
    double elapsed = 0.0;
    StopReason reason = StopReason::TimedOut;
};

struct TraceRecord {
    std::uint64_t iteration;
    BookmakerRef bookmaker;
    double best_exp;  // NaN while no eligible hypothesis has been seen
    double active_fraction;
};

struct SearchHooks {
    std::function<void(const TraceRecord&)> trace;
    /// Called with every population after initialization and each iteration.
    std::function<void(const EfficientPool&, std::span<const Agent>)> observe;
};

/// Stochastic diffusion search over every bookmaker sub-problem, round-robin
/// within one shared clock. Stops at the first iteration after which the
/// best-ever eligible hypothesis reaches min_exp.
SearchOutcome sds_search(const BookmakerPools& pools, const SolverParams& params, const SearchHooks& hooks = {});

struct OracleResult {
    std::optional<Incumbent> best;        // max exp subject to prob >= p_min
    std::vector<Incumbent> pareto_front;  // (odds, prob) non-dominated, odds descending
    std::uint64_t enumerated = 0;
};

class oracle_limit_exceeded : public std::runtime_error {
public:
    oracle_limit_exceeded() : std::runtime_error("oracle limit exceeded") {}
};

/// Feasible leg sets the oracle would have to visit, saturating at 2^63.
std::uint64_t oracle_subset_count(const std::vector<CandidateBet>& candidates);

inline constexpr std::uint64_t oracle_subset_limit = std::uint64_t{1} << 24;

/// Exhaustive enumeration of one bookmaker's feasible accumulators of at
/// most `max_legs` legs. Throws oracle_limit_exceeded above
/// oracle_subset_limit.
OracleResult enumerate_oracle(const std::vector<CandidateBet>& candidates, double p_min, std::size_t max_legs = 12);

}  // namespace acca
