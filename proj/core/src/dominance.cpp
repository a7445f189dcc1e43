#include "acca/dominance.hpp"

#include <algorithm>
#include <numeric>

namespace acca {
namespace {

// Frontier mask over one group by a sort-and-sweep: visit distinct odds
// levels from high to low, tracking the best probability seen at strictly
// higher odds. A candidate survives unless that best probability reaches it
// or its own odds level holds a strictly higher probability.
std::vector<bool> frontier_mask(const std::vector<CandidateBet>& c, const std::vector<std::size_t>& group) {
    std::vector<std::size_t> order = group;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (c[a].odds() != c[b].odds()) return c[a].odds() > c[b].odds();
        return c[a].prob() > c[b].prob();
    });

    std::vector<bool> keep(c.size(), false);
    double best_higher = -1.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        const double level = c[order[i]].odds();
        while (j < order.size() && c[order[j]].odds() == level) ++j;
        const double level_max = c[order[i]].prob();  // sorted by prob descending within a level
        for (std::size_t k = i; k < j; ++k) {
            const double p = c[order[k]].prob();
            keep[order[k]] = !(best_higher >= p) && !(level_max > p);
        }
        best_higher = std::max(best_higher, level_max);
        i = j;
    }
    return keep;
}

// Smallest dominator by (bookmaker, match, outcome) within `scope`.
const CandidateBet* witness(const std::vector<CandidateBet>& c, std::size_t victim,
                            const std::vector<std::size_t>& scope) {
    const CandidateBet* best = nullptr;
    for (auto k : scope) {
        if (!dominates(c[k], c[victim])) continue;
        if (best == nullptr || key_order(c[k], *best) < 0) best = &c[k];
    }
    return best;
}

FilterResult filter_groups(const std::vector<CandidateBet>& candidates,
                           const std::vector<std::vector<std::size_t>>& groups) {
    std::vector<bool> keep(candidates.size(), false);
    for (const auto& g : groups) {
        auto mask = frontier_mask(candidates, g);
        for (auto i : g) keep[i] = mask[i];
    }

    std::vector<const std::vector<std::size_t>*> group_of(candidates.size(), nullptr);
    for (const auto& g : groups)
        for (auto i : g) group_of[i] = &g;

    FilterResult out;
    out.report.input_count = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (keep[i]) {
            out.kept.push_back(candidates[i]);
        } else {
            const auto* w = witness(candidates, i, *group_of[i]);
            out.report.eliminated.push_back({candidates[i], *w});
        }
    }
    out.report.kept_count = out.kept.size();
    return out;
}

}  // namespace

std::string_view to_string(FilterMode mode) noexcept {
    switch (mode) {
    case FilterMode::None: return "none";
    case FilterMode::IntraBookmaker: return "intra";
    case FilterMode::InterBookmaker: return "inter";
    }
    return "unknown";
}

std::optional<FilterMode> parse_filter_mode(std::string_view text) noexcept {
    if (text == "none") return FilterMode::None;
    if (text == "intra") return FilterMode::IntraBookmaker;
    if (text == "inter") return FilterMode::InterBookmaker;
    return std::nullopt;
}

FilterResult intra_filter(const std::vector<CandidateBet>& candidates) {
    std::map<BookmakerRef, std::vector<std::size_t>> by_book;
    for (std::size_t i = 0; i < candidates.size(); ++i) by_book[candidates[i].bookmaker()].push_back(i);
    std::vector<std::vector<std::size_t>> groups;
    for (auto& [book, idx] : by_book) groups.push_back(std::move(idx));
    return filter_groups(candidates, groups);
}

FilterResult inter_filter(const std::vector<CandidateBet>& candidates) {
    std::vector<std::size_t> all(candidates.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return filter_groups(candidates, {all});
}

std::map<BookmakerRef, std::vector<CandidateBet>> split_by_bookmaker(const std::vector<CandidateBet>& candidates) {
    std::map<BookmakerRef, std::vector<CandidateBet>> parts;
    for (const auto& c : candidates) parts[c.bookmaker()].push_back(c);
    return parts;
}

PreparedPools prepare_pools(const std::vector<CandidateBet>& candidates, FilterMode mode) {
    PreparedPools out;
    switch (mode) {
    case FilterMode::None:
        out.pools = split_by_bookmaker(candidates);
        out.report.input_count = out.report.kept_count = candidates.size();
        break;
    case FilterMode::IntraBookmaker: {
        for (auto& [book, part] : split_by_bookmaker(candidates)) {
            auto r = intra_filter(part);
            out.report.input_count += r.report.input_count;
            out.report.kept_count += r.report.kept_count;
            std::move(r.report.eliminated.begin(), r.report.eliminated.end(),
                      std::back_inserter(out.report.eliminated));
            out.pools.emplace(book, std::move(r.kept));
        }
        break;
    }
    case FilterMode::InterBookmaker: {
        auto r = inter_filter(candidates);
        out.report = std::move(r.report);
        out.pools = split_by_bookmaker(r.kept);
        break;
    }
    }
    return out;
}

}  // namespace acca
