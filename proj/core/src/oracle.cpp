#include "acca/solver.hpp"

#include <algorithm>
#include <limits>

namespace acca {
namespace {

struct FrontPoint {
    AccumulatorTotals totals;
    Hypothesis legs;
};

// Two-objective archive ordered by odds descending; probabilities are then
// non-decreasing along the vector. Points tied on both objectives coexist.
class ParetoArchive {
public:
    void offer(const AccumulatorTotals& t, const Hypothesis& legs) {
        const auto pos = static_cast<std::size_t>(
            std::partition_point(points_.begin(), points_.end(), [&](const FrontPoint& p) { return p.totals.odds >= t.odds; }) -
            points_.begin());
        if (pos > 0) {
            const auto& a = points_[pos - 1].totals;
            if (a.prob > t.prob || (a.prob == t.prob && a.odds > t.odds)) return;
        }
        std::size_t first = pos;
        while (first > 0 && points_[first - 1].totals.odds == t.odds && points_[first - 1].totals.prob < t.prob) --first;
        std::size_t last = pos;
        while (last < points_.size() && points_[last].totals.prob <= t.prob) ++last;
        points_.erase(points_.begin() + static_cast<std::ptrdiff_t>(first), points_.begin() + static_cast<std::ptrdiff_t>(last));
        points_.insert(points_.begin() + static_cast<std::ptrdiff_t>(first), FrontPoint{t, legs});
    }

    const std::vector<FrontPoint>& points() const { return points_; }

private:
    std::vector<FrontPoint> points_;
};

struct Enumerator {
    const EfficientPool& pool;
    const std::vector<std::vector<std::uint32_t>>& by_match;
    double p_min;
    std::size_t max_legs;

    Hypothesis current;
    ParetoArchive front;
    std::optional<FrontPoint> best;
    std::uint64_t visited = 0;

    void run(std::size_t match, double lo, double lp) {
        if (match == by_match.size()) {
            if (current.empty()) return;
            ++visited;
            const auto t = totals_from_logs(lo, lp);
            front.offer(t, current);
            if (t.prob >= p_min && (!best || t.exp > best->totals.exp)) best = FrontPoint{t, current};
            return;
        }
        run(match + 1, lo, lp);
        if (current.size() == max_legs) return;
        for (auto c : by_match[match]) {
            current.push_back(c);
            run(match + 1, lo + pool.log_odds(c), lp + pool.log_prob(c));
            current.pop_back();
        }
    }
};

}  // namespace

std::uint64_t oracle_subset_count(const std::vector<CandidateBet>& candidates) {
    EfficientPool pool(candidates);
    std::vector<std::uint64_t> per_match(pool.match_count(), 0);
    for (std::size_t i = 0; i < pool.size(); ++i) ++per_match[pool.match_id(i)];
    constexpr auto cap = std::numeric_limits<std::uint64_t>::max() / 2;
    std::uint64_t total = 1;
    for (auto c : per_match) {
        if (total > cap / (c + 1)) return cap;
        total *= c + 1;
    }
    return total - 1;
}

OracleResult enumerate_oracle(const std::vector<CandidateBet>& candidates, double p_min, std::size_t max_legs) {
    if (max_legs == 0 || max_legs > 12) throw std::invalid_argument("enumerate_oracle: max_legs must be in 1..12");
    if (oracle_subset_count(candidates) > oracle_subset_limit) throw oracle_limit_exceeded();

    EfficientPool pool(candidates);
    std::vector<std::vector<std::uint32_t>> by_match(pool.match_count());
    for (std::uint32_t i = 0; i < pool.size(); ++i) by_match[pool.match_id(i)].push_back(i);

    Enumerator e{pool, by_match, p_min, max_legs, {}, {}, std::nullopt, 0};
    e.run(0, 0.0, 0.0);

    OracleResult out;
    out.enumerated = e.visited;
    if (e.best) out.best = Incumbent{to_accumulator(pool, e.best->legs), e.best->totals};
    for (const auto& p : e.front.points()) out.pareto_front.push_back({to_accumulator(pool, p.legs), p.totals});
    return out;
}

}  // namespace acca
