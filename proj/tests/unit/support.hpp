#pragma once

#include "acca/domain.hpp"

#include <random>
#include <string>
#include <vector>

namespace testing {

inline acca::MatchRef match(int i, int matchday = 1, const std::string& league = "E0") {
    return acca::make_match(league, matchday, "H" + std::to_string(i), "A" + std::to_string(i));
}

inline acca::CandidateBet bet(int match_index, acca::Outcome o, double odds, double prob,
                              const std::string& book = "B365") {
    return acca::CandidateBet(match(match_index), acca::BookmakerRef{book}, o, odds, prob);
}

// Random candidates on `matches` matches and the given bookmakers. Odds are
// drawn on a coarse grid so that ties in odds, probability or both occur.
inline std::vector<acca::CandidateBet> random_pool(std::mt19937_64& rng, int matches,
                                                   const std::vector<std::string>& books, double keep = 1.0) {
    std::uniform_int_distribution<int> odds_tick(21, 160);
    std::uniform_int_distribution<int> prob_tick(1, 19);
    std::bernoulli_distribution take(keep);
    std::vector<acca::CandidateBet> out;
    for (int m = 0; m < matches; ++m)
        for (const auto& b : books)
            for (auto o : acca::all_outcomes) {
                if (!take(rng)) continue;
                const double odds = odds_tick(rng) / 20.0;
                const double prob = prob_tick(rng) / 20.0;
                out.emplace_back(match(m), acca::BookmakerRef{b}, o, odds, prob);
            }
    return out;
}

}  // namespace testing
