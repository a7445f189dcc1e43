#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace acca {

enum class Sizing { ConservativeKelly, VarianceAdjusted };

std::string_view to_string(Sizing s) noexcept;

/// Kelly variants. `AsPublished` uses f = p - (1-p)/o with decimal odds o;
/// `Textbook` uses the net odds o-1 in the denominator.
enum class KellyVariant { AsPublished, Textbook };

/// max(0, p - (1-p)/o); zero means "do not bet".
double kelly_fraction(double p, double o, KellyVariant variant = KellyVariant::AsPublished);

/// 1 / (2 o (1-p)), capped at 1.
double variance_adjusted_stake(double p, double o);

double stake_fraction(Sizing sizing, double p, double o);

struct Leg {
    double odds;
    double prob;
};

struct BetMoments {
    double expected_return = 0.0;  // multiple of the stake
    double variance = 0.0;
};

/// One unit on an accumulator of independent legs.
BetMoments accumulator_moments(std::span<const Leg> legs);

/// 1/k units on each of k independent single bets.
BetMoments split_singles_moments(std::span<const Leg> legs);

/// Scales fractions down proportionally when they sum above 1. Returns the
/// applied factor (1 when nothing changed).
double normalize_fractions(std::span<double> fractions);

}  // namespace acca
