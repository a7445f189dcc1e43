#pragma once

#include "acca/domain.hpp"

#include <chrono>
#include <filesystem>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace acca {

/// The five bookmakers whose 1X2 columns are read from the season files.
inline const std::vector<std::string> default_bookmakers = {"B365", "BW", "GB", "IW", "LB"};

struct OddsTriple {
    double home = 0.0;
    double draw = 0.0;
    double away = 0.0;

    double operator[](Outcome o) const noexcept {
        return o == Outcome::Home ? home : o == Outcome::Draw ? draw : away;
    }
};

struct FixtureRecord {
    std::string league;
    std::chrono::year_month_day date;
    std::string home_team;
    std::string away_team;
    Outcome full_time_result = Outcome::Home;
    std::map<BookmakerRef, OddsTriple> odds_by_bookmaker;
};

/// (league, date, home, away); identifies a fixture across files.
struct FixtureKey {
    std::string league;
    std::chrono::year_month_day date;
    std::string home_team;
    std::string away_team;

    friend auto operator<=>(const FixtureKey&, const FixtureKey&) = default;
};

FixtureKey key_of(const FixtureRecord& f);

class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ParseResult {
    std::vector<FixtureRecord> fixtures;
    std::vector<std::string> warnings;
};

/// Reads a football-data.co.uk style season file. The header row drives
/// column lookup; unknown columns are ignored. When `league` is empty the Div
/// column is used. Throws parse_error naming a missing mandatory column.
ParseResult parse_season_csv(std::istream& in, const std::string& league = {});
ParseResult parse_season_file(const std::filesystem::path& path, const std::string& league = {});

/// Accepts dd/mm/yy and dd/mm/yyyy. Two-digit years map to 20yy.
std::optional<std::chrono::year_month_day> parse_date(std::string_view text);
std::string format_date(const std::chrono::year_month_day& d);

/// Splits one CSV record. Double-quoted fields may contain commas.
std::vector<std::string> split_csv_line(std::string_view line);

/// Matchday per fixture, parallel to the input vector.
///
/// Fixtures of each league are processed in date order. A fixture's matchday
/// is one past the larger of its two teams' counters, and both counters then
/// advance to it. On a regular calendar this reproduces the official rounds;
/// a postponed fixture is slotted after the rounds its teams have already
/// played. Throws domain_error("duplicate fixture") if a team plays twice on
/// one date.
std::vector<int> infer_matchdays(const std::vector<FixtureRecord>& fixtures);

struct ProbabilityTriple {
    double home = 0.0;
    double draw = 0.0;
    double away = 0.0;

    double operator[](Outcome o) const noexcept {
        return o == Outcome::Home ? home : o == Outcome::Draw ? draw : away;
    }
};

/// Externally supplied outcome probabilities keyed by fixture.
using ExternalProbabilities = std::map<FixtureKey, ProbabilityTriple>;

/// Reads League, Date, HomeTeam, AwayTeam, PH, PD, PA. Rows are renormalized
/// to sum to one.
ExternalProbabilities parse_probabilities_csv(std::istream& in);
ExternalProbabilities parse_probabilities_file(const std::filesystem::path& path);

enum class EstimatorKind { InverseOdds, External };

struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::InverseOdds;
    const ExternalProbabilities* external = nullptr;
};

/// Normalized mean inverse odds, or a lookup into the external table.
/// Returns nullopt when the fixture has no usable estimate.
std::optional<ProbabilityTriple> estimate_probabilities(const FixtureRecord& fixture,
                                                        const EstimatorConfig& estimator = {});

struct MatchdayPool {
    int matchday = 0;
    std::vector<CandidateBet> candidates;  // grouped by bookmaker, then match, then outcome
    std::map<MatchRef, Outcome> results;
    std::size_t fixture_count() const noexcept { return results.size(); }
};

struct PoolBuildResult {
    std::vector<MatchdayPool> pools;  // ordered by matchday
    std::vector<std::string> warnings;
};

/// One CandidateBet per (fixture, complete bookmaker triple, outcome).
/// `matchdays` is parallel to `fixtures`. Fixtures without an estimate are
/// skipped with a warning.
PoolBuildResult build_candidates(const std::vector<FixtureRecord>& fixtures,
                                 const std::vector<int>& matchdays,
                                 const EstimatorConfig& estimator = {});

struct Season {
    std::vector<FixtureRecord> fixtures;
    std::vector<int> matchdays;
    std::vector<MatchdayPool> pools;
    std::vector<std::string> warnings;
};

/// Parses each file, infers matchdays per league and merges leagues into one
/// pool per matchday number.
Season load_season(const std::vector<std::filesystem::path>& files, const EstimatorConfig& estimator = {});

/// Matchday numbers missing from 1..max over the given pools.
std::vector<int> missing_matchdays(const std::vector<MatchdayPool>& pools);

}  // namespace acca
