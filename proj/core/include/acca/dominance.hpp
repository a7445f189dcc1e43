#pragma once

#include "acca/domain.hpp"

#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace acca {

enum class FilterMode { None, IntraBookmaker, InterBookmaker };

std::string_view to_string(FilterMode mode) noexcept;
/// Accepts "none", "intra", "inter".
std::optional<FilterMode> parse_filter_mode(std::string_view text) noexcept;

struct Elimination {
    CandidateBet bet;
    CandidateBet dominator;
};

struct ReductionReport {
    std::size_t input_count = 0;
    std::size_t kept_count = 0;
    std::vector<Elimination> eliminated;

    double reduction() const noexcept {
        return input_count == 0 ? 0.0 : static_cast<double>(input_count - kept_count) / input_count;
    }
};

struct FilterResult {
    std::vector<CandidateBet> kept;
    ReductionReport report;
};

/// True when `a` is at least as good as `b` on odds and probability and
/// strictly better on one of them.
inline bool dominates(const CandidateBet& a, const CandidateBet& b) noexcept {
    return a.odds() >= b.odds() && a.prob() >= b.prob() && (a.odds() > b.odds() || a.prob() > b.prob());
}

/// Keeps the per-bookmaker (odds, prob) Pareto frontier. Candidates tied on
/// both values are all kept. Output preserves input order.
FilterResult intra_filter(const std::vector<CandidateBet>& candidates);

/// Keeps the frontier over all bookmakers at once.
FilterResult inter_filter(const std::vector<CandidateBet>& candidates);

std::map<BookmakerRef, std::vector<CandidateBet>> split_by_bookmaker(const std::vector<CandidateBet>& candidates);

using BookmakerPools = std::map<BookmakerRef, std::vector<CandidateBet>>;

struct PreparedPools {
    BookmakerPools pools;
    ReductionReport report;
};

/// Applies `mode` with its quantifier scope (intra after the per-bookmaker
/// split, inter before it) and returns the per-bookmaker sub-problems.
PreparedPools prepare_pools(const std::vector<CandidateBet>& candidates, FilterMode mode);

}  // namespace acca
