#include "acca/staking.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace acca {
namespace {

void check(double p, double o) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("probability must lie in (0, 1)");
    if (!(o > 1.0)) throw std::invalid_argument("odds must exceed 1");
}

}  // namespace

std::string_view to_string(Sizing s) noexcept {
    return s == Sizing::ConservativeKelly ? "conservative-kelly" : "variance-adjusted";
}

double kelly_fraction(double p, double o, KellyVariant variant) {
    check(p, o);
    const double denom = variant == KellyVariant::Textbook ? o - 1.0 : o;
    return std::max(0.0, p - (1.0 - p) / denom);
}

double variance_adjusted_stake(double p, double o) {
    check(p, o);
    return std::min(1.0, 1.0 / (2.0 * o * (1.0 - p)));
}

double stake_fraction(Sizing sizing, double p, double o) {
    return sizing == Sizing::ConservativeKelly ? kelly_fraction(p, o) : variance_adjusted_stake(p, o);
}

BetMoments accumulator_moments(std::span<const Leg> legs) {
    if (legs.empty()) throw std::invalid_argument("accumulator_moments: no legs");
    double mean = 1.0, second = 1.0, win = 1.0;
    for (const auto& l : legs) {
        check(l.prob, l.odds);
        mean *= l.odds * l.prob;
        second *= l.odds * l.odds * l.prob;
        win *= l.prob;
    }
    return {mean, second * (1.0 - win)};
}

BetMoments split_singles_moments(std::span<const Leg> legs) {
    if (legs.empty()) throw std::invalid_argument("split_singles_moments: no legs");
    const double k = static_cast<double>(legs.size());
    double mean = 0.0, var = 0.0;
    for (const auto& l : legs) {
        check(l.prob, l.odds);
        mean += l.odds * l.prob;
        var += l.odds * l.odds * l.prob * (1.0 - l.prob);
    }
    return {mean / k, var / (k * k)};
}

double normalize_fractions(std::span<double> fractions) {
    const double total = std::accumulate(fractions.begin(), fractions.end(), 0.0);
    if (total <= 1.0) return 1.0;
    double scale = 1.0 / total;
    for (auto& f : fractions) f *= scale;
    // Rounding can leave the sum a few ulps above 1.
    while (std::accumulate(fractions.begin(), fractions.end(), 0.0) > 1.0) {
        for (auto& f : fractions) f *= 1.0 - 1e-15;
        scale *= 1.0 - 1e-15;
    }
    return scale;
}

}  // namespace acca
