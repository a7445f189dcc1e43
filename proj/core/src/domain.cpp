#include "acca/domain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace acca {

char outcome_code(Outcome o) noexcept {
    switch (o) {
    case Outcome::Home: return 'H';
    case Outcome::Draw: return 'D';
    case Outcome::Away: return 'A';
    }
    return '?';
}

std::optional<Outcome> parse_outcome(std::string_view code) noexcept {
    if (code == "H") return Outcome::Home;
    if (code == "D") return Outcome::Draw;
    if (code == "A") return Outcome::Away;
    return std::nullopt;
}

MatchRef make_match(std::string league, int matchday, std::string home, std::string away) {
    if (matchday < 1) throw domain_error("matchday must be positive");
    if (home == away) throw domain_error("home and away team are identical: " + home);
    return MatchRef{std::move(league), matchday, std::move(home), std::move(away)};
}

std::string to_string(const MatchRef& m) {
    return m.league + " md" + std::to_string(m.matchday) + " " + m.home_team + " v " + m.away_team;
}

CandidateBet::CandidateBet(MatchRef match, BookmakerRef bookmaker, Outcome outcome, double odds,
                           double prob)
    : match_(std::move(match)), bookmaker_(std::move(bookmaker)), outcome_(outcome), odds_(odds),
      prob_(prob) {
    if (!(odds_ > 1.0) || !std::isfinite(odds_))
        throw domain_error("odds must be finite and greater than 1");
    if (!(prob_ > 0.0 && prob_ < 1.0)) throw domain_error("probability must lie strictly inside (0, 1)");
}

std::strong_ordering key_order(const CandidateBet& a, const CandidateBet& b) {
    if (auto c = a.bookmaker_ <=> b.bookmaker_; c != 0) return c;
    if (auto c = a.match_ <=> b.match_; c != 0) return c;
    return a.outcome_ <=> b.outcome_;
}

std::string to_string(const CandidateBet& c) {
    return to_string(c.match()) + " " + outcome_code(c.outcome()) + " @" + c.bookmaker().code;
}

bool leg_less(const CandidateBet& a, const CandidateBet& b) {
    if (a.match() != b.match()) return a.match() < b.match();
    if (a.outcome() != b.outcome()) return a.outcome() < b.outcome();
    return a.bookmaker() < b.bookmaker();
}

Accumulator::Accumulator(std::vector<CandidateBet> legs) : legs_(std::move(legs)) {
    std::sort(legs_.begin(), legs_.end(), leg_less);
}

const BookmakerRef& Accumulator::bookmaker() const {
    if (legs_.empty()) throw domain_error("empty accumulator");
    return legs_.front().bookmaker();
}

AccumulatorTotals totals_from_logs(double log_odds_sum, double log_prob_sum) noexcept {
    AccumulatorTotals t;
    t.odds = std::exp(log_odds_sum);
    t.prob = std::exp(log_prob_sum);
    t.exp = t.odds * t.prob;
    return t;
}

AccumulatorTotals accumulator_totals(const Accumulator& acc) {
    if (acc.empty()) throw domain_error("empty accumulator");
    double lo = 0.0;
    double lp = 0.0;
    for (const auto& leg : acc.legs()) {
        lo += std::log(leg.odds());
        lp += std::log(leg.prob());
    }
    return totals_from_logs(lo, lp);
}

std::string_view to_string(ViolationKind kind) noexcept {
    switch (kind) {
    case ViolationKind::Empty: return "empty";
    case ViolationKind::ConflictingOutcomes: return "conflicting-outcomes";
    case ViolationKind::MixedBookmakers: return "mixed-bookmakers";
    case ViolationKind::DuplicateLeg: return "duplicate-leg";
    }
    return "unknown";
}

std::vector<Violation> validate_accumulator(const Accumulator& acc) {
    std::vector<Violation> out;
    if (acc.empty()) {
        out.push_back({ViolationKind::Empty, {}, "accumulator has no legs"});
        return out;
    }

    std::set<BookmakerRef> books;
    for (const auto& leg : acc.legs()) books.insert(leg.bookmaker());
    if (books.size() > 1) {
        std::string msg = "legs placed with more than one bookmaker:";
        for (const auto& b : books) msg += " " + b.code;
        out.push_back({ViolationKind::MixedBookmakers, {acc.legs().begin(), acc.legs().end()}, msg});
    }

    // Legs are sorted by match, so conflicts are adjacent runs.
    auto legs = acc.legs();
    for (std::size_t i = 0; i < legs.size();) {
        std::size_t j = i + 1;
        while (j < legs.size() && legs[j].match() == legs[i].match()) ++j;
        if (j - i > 1) {
            std::vector<CandidateBet> run(legs.begin() + static_cast<std::ptrdiff_t>(i),
                                          legs.begin() + static_cast<std::ptrdiff_t>(j));
            bool duplicate = false;
            for (std::size_t a = 0; a + 1 < run.size(); ++a)
                if (same_variable(run[a], run[a + 1])) duplicate = true;
            const auto kind = duplicate ? ViolationKind::DuplicateLeg : ViolationKind::ConflictingOutcomes;
            out.push_back({kind, std::move(run), "more than one leg on " + to_string(legs[i].match())});
        }
        i = j;
    }
    return out;
}

}  // namespace acca
