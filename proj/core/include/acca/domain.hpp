#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace acca {

/// Result of a 1X2 market. The enumerator order (Home < Draw < Away) is only
/// used to iterate deterministically.
enum class Outcome : std::uint8_t { Home = 0, Draw = 1, Away = 2 };

inline constexpr Outcome all_outcomes[] = {Outcome::Home, Outcome::Draw, Outcome::Away};

char outcome_code(Outcome o) noexcept;
std::optional<Outcome> parse_outcome(std::string_view code) noexcept;

class domain_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct MatchRef {
    std::string league;
    int matchday = 0;
    std::string home_team;
    std::string away_team;

    friend auto operator<=>(const MatchRef&, const MatchRef&) = default;
    friend bool operator==(const MatchRef&, const MatchRef&) = default;
};

/// Throws domain_error when matchday < 1 or the teams coincide.
MatchRef make_match(std::string league, int matchday, std::string home, std::string away);

std::string to_string(const MatchRef& m);

struct BookmakerRef {
    std::string code;

    friend auto operator<=>(const BookmakerRef&, const BookmakerRef&) = default;
    friend bool operator==(const BookmakerRef&, const BookmakerRef&) = default;
};

/// One decision variable of the selection program: back `outcome` of `match`
/// at `bookmaker`'s decimal `odds`, with estimated win probability `prob`.
///
/// Construction enforces odds > 1 and 0 < prob < 1; a certain bet (prob = 1)
/// is rejected.
class CandidateBet {
public:
    CandidateBet(MatchRef match, BookmakerRef bookmaker, Outcome outcome, double odds, double prob);

    const MatchRef& match() const noexcept { return match_; }
    const BookmakerRef& bookmaker() const noexcept { return bookmaker_; }
    Outcome outcome() const noexcept { return outcome_; }
    double odds() const noexcept { return odds_; }
    double prob() const noexcept { return prob_; }
    double exp() const noexcept { return odds_ * prob_; }

    /// Identity of the decision variable: (bookmaker, match, outcome).
    friend std::strong_ordering key_order(const CandidateBet& a, const CandidateBet& b);
    friend bool same_variable(const CandidateBet& a, const CandidateBet& b) {
        return key_order(a, b) == std::strong_ordering::equal;
    }
    friend bool operator==(const CandidateBet&, const CandidateBet&) = default;

private:
    MatchRef match_;
    BookmakerRef bookmaker_;
    Outcome outcome_;
    double odds_;
    double prob_;
};

std::string to_string(const CandidateBet& c);

/// Canonical leg order inside an accumulator: (match, outcome, bookmaker).
bool leg_less(const CandidateBet& a, const CandidateBet& b);

struct AccumulatorTotals {
    double odds = 1.0;
    double prob = 1.0;
    double exp = 1.0;
};

/// A set of legs meant to be placed as one accumulator. Legs are kept in
/// canonical order so that every derived quantity is independent of the order
/// the legs were supplied in. Feasibility is not enforced here; see
/// validate_accumulator.
class Accumulator {
public:
    Accumulator() = default;
    explicit Accumulator(std::vector<CandidateBet> legs);

    std::span<const CandidateBet> legs() const noexcept { return legs_; }
    std::size_t size() const noexcept { return legs_.size(); }
    bool empty() const noexcept { return legs_.empty(); }

    /// Bookmaker of the first leg; throws domain_error when empty.
    const BookmakerRef& bookmaker() const;

    friend bool operator==(const Accumulator&, const Accumulator&) = default;

private:
    std::vector<CandidateBet> legs_;
};

/// Product of leg odds and probabilities, evaluated as a sum of logarithms in
/// canonical leg order and exponentiated once.
AccumulatorTotals accumulator_totals(const Accumulator& acc);

/// Same valuation from pre-computed log sums. Shared by the solver so that an
/// index-based hypothesis and the equivalent Accumulator value bit-identically.
AccumulatorTotals totals_from_logs(double log_odds_sum, double log_prob_sum) noexcept;

enum class ViolationKind { Empty, ConflictingOutcomes, MixedBookmakers, DuplicateLeg };

struct Violation {
    ViolationKind kind;
    std::vector<CandidateBet> offending;
    std::string message;
};

std::string_view to_string(ViolationKind kind) noexcept;

/// One record per breached constraint: nonempty, one bookmaker, at most one
/// leg per match. An empty result means the induced 0/1 assignment is
/// feasible.
std::vector<Violation> validate_accumulator(const Accumulator& acc);

}  // namespace acca
