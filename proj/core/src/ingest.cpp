#include "acca/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace acca {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<int> parse_int(std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

class Header {
public:
    explicit Header(const std::vector<std::string>& names) {
        for (std::size_t i = 0; i < names.size(); ++i) index_.emplace(names[i], i);
    }

    std::optional<std::size_t> find(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t require(const std::string& name) const {
        auto i = find(name);
        if (!i) throw parse_error("missing mandatory column: " + name);
        return *i;
    }

private:
    std::unordered_map<std::string, std::size_t> index_;
};

std::string_view field(const std::vector<std::string>& row, std::size_t i) {
    return i < row.size() ? trim(row[i]) : std::string_view{};
}

bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

struct BookColumns {
    BookmakerRef book;
    std::size_t h, d, a;
};

}  // namespace

FixtureKey key_of(const FixtureRecord& f) {
    return FixtureKey{f.league, f.date, f.home_team, f.away_team};
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::optional<std::chrono::year_month_day> parse_date(std::string_view text) {
    text = trim(text);
    const auto s1 = text.find('/');
    if (s1 == std::string_view::npos) return std::nullopt;
    const auto s2 = text.find('/', s1 + 1);
    if (s2 == std::string_view::npos) return std::nullopt;
    const auto d = parse_int(text.substr(0, s1));
    const auto m = parse_int(text.substr(s1 + 1, s2 - s1 - 1));
    const auto ytext = text.substr(s2 + 1);
    auto y = parse_int(ytext);
    if (!d || !m || !y) return std::nullopt;
    if (ytext.size() == 2)
        *y += 2000;
    else if (ytext.size() != 4)
        return std::nullopt;
    std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                                    std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    return ymd;
}

std::string format_date(const std::chrono::year_month_day& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02u/%02u/%04d", static_cast<unsigned>(d.day()),
                  static_cast<unsigned>(d.month()), static_cast<int>(d.year()));
    return buf;
}

ParseResult parse_season_csv(std::istream& in, const std::string& league) {
    ParseResult result;
    std::string line;
    if (!read_line(in, line)) throw parse_error("empty input: no header row");
    // Files saved by spreadsheet tools often start with a UTF-8 BOM.
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

    auto names = split_csv_line(line);
    for (auto& n : names) n = std::string(trim(n));
    const Header header(names);

    const auto c_div = header.require("Div");
    const auto c_date = header.require("Date");
    const auto c_home = header.require("HomeTeam");
    const auto c_away = header.require("AwayTeam");
    const auto c_ftr = header.require("FTR");

    std::vector<BookColumns> books;
    for (const auto& code : default_bookmakers) {
        auto h = header.find(code + "H");
        auto d = header.find(code + "D");
        auto a = header.find(code + "A");
        if (h && d && a)
            books.push_back({BookmakerRef{code}, *h, *d, *a});
        else
            result.warnings.push_back("no odds columns for bookmaker " + code);
    }
    if (books.empty()) throw parse_error("missing mandatory column: " + default_bookmakers.front() + "H");

    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto row = split_csv_line(line);
        const std::string where = "line " + std::to_string(line_no);

        const auto ftr = parse_outcome(field(row, c_ftr));
        if (!ftr) {
            result.warnings.push_back(where + ": missing or invalid FTR, row rejected");
            continue;
        }
        const auto date = parse_date(field(row, c_date));
        if (!date) {
            result.warnings.push_back(where + ": unparseable date '" + std::string(field(row, c_date)) + "'");
            continue;
        }
        FixtureRecord rec;
        rec.league = league.empty() ? std::string(field(row, c_div)) : league;
        rec.date = *date;
        rec.home_team = std::string(field(row, c_home));
        rec.away_team = std::string(field(row, c_away));
        rec.full_time_result = *ftr;
        if (rec.home_team.empty() || rec.away_team.empty() || rec.home_team == rec.away_team) {
            result.warnings.push_back(where + ": invalid team names, row rejected");
            continue;
        }

        for (const auto& b : books) {
            const auto h = parse_number(field(row, b.h));
            const auto d = parse_number(field(row, b.d));
            const auto a = parse_number(field(row, b.a));
            if (!h || !d || !a) continue;
            if (*h <= 1.0 || *d <= 1.0 || *a <= 1.0) {
                result.warnings.push_back(where + ": odds <= 1.0 for " + b.book.code + ", triple dropped");
                continue;
            }
            rec.odds_by_bookmaker.emplace(b.book, OddsTriple{*h, *d, *a});
        }
        if (rec.odds_by_bookmaker.empty()) {
            result.warnings.push_back(where + ": no complete odds triple, row rejected");
            continue;
        }
        result.fixtures.push_back(std::move(rec));
    }
    return result;
}

ParseResult parse_season_file(const std::filesystem::path& path, const std::string& league) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path.string());
    try {
        return parse_season_csv(in, league);
    } catch (const parse_error& e) {
        throw parse_error(path.string() + ": " + e.what());
    }
}

std::vector<int> infer_matchdays(const std::vector<FixtureRecord>& fixtures) {
    std::vector<int> out(fixtures.size(), 0);
    std::map<std::string, std::vector<std::size_t>> by_league;
    for (std::size_t i = 0; i < fixtures.size(); ++i) by_league[fixtures[i].league].push_back(i);

    for (auto& [league, idx] : by_league) {
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return fixtures[a].date < fixtures[b].date; });

        std::set<std::pair<std::chrono::sys_days, std::string>> seen;
        for (auto i : idx) {
            const auto day = std::chrono::sys_days{fixtures[i].date};
            for (const auto* team : {&fixtures[i].home_team, &fixtures[i].away_team})
                if (!seen.emplace(day, *team).second)
                    throw domain_error("duplicate fixture: " + *team + " plays twice on " +
                                       format_date(fixtures[i].date) + " in " + league);
        }

        std::unordered_map<std::string, int> round;
        for (auto i : idx) {
            int& h = round[fixtures[i].home_team];
            int& a = round[fixtures[i].away_team];
            const int md = std::max(h, a) + 1;
            h = md;
            a = md;
            out[i] = md;
        }
    }
    return out;
}

ExternalProbabilities parse_probabilities_csv(std::istream& in) {
    ExternalProbabilities out;
    std::string line;
    if (!read_line(in, line)) throw parse_error("empty probability file");
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    auto names = split_csv_line(line);
    for (auto& n : names) n = std::string(trim(n));
    const Header header(names);
    const auto c_league = header.require("League");
    const auto c_date = header.require("Date");
    const auto c_home = header.require("HomeTeam");
    const auto c_away = header.require("AwayTeam");
    const auto c_h = header.require("PH");
    const auto c_d = header.require("PD");
    const auto c_a = header.require("PA");

    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto row = split_csv_line(line);
        const auto date = parse_date(field(row, c_date));
        const auto h = parse_number(field(row, c_h));
        const auto d = parse_number(field(row, c_d));
        const auto a = parse_number(field(row, c_a));
        if (!date || !h || !d || !a || *h <= 0 || *d <= 0 || *a <= 0)
            throw parse_error("probability file line " + std::to_string(line_no) + ": invalid row");
        const double s = *h + *d + *a;
        FixtureKey key{std::string(field(row, c_league)), *date, std::string(field(row, c_home)),
                       std::string(field(row, c_away))};
        out[std::move(key)] = ProbabilityTriple{*h / s, *d / s, *a / s};
    }
    return out;
}

ExternalProbabilities parse_probabilities_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path.string());
    return parse_probabilities_csv(in);
}

std::optional<ProbabilityTriple> estimate_probabilities(const FixtureRecord& fixture,
                                                        const EstimatorConfig& estimator) {
    if (estimator.kind == EstimatorKind::External) {
        if (estimator.external == nullptr) return std::nullopt;
        auto it = estimator.external->find(key_of(fixture));
        if (it == estimator.external->end()) return std::nullopt;
        return it->second;
    }
    if (fixture.odds_by_bookmaker.empty()) return std::nullopt;
    double qh = 0.0, qd = 0.0, qa = 0.0;
    for (const auto& [book, t] : fixture.odds_by_bookmaker) {
        qh += 1.0 / t.home;
        qd += 1.0 / t.draw;
        qa += 1.0 / t.away;
    }
    // The 1/n of the mean cancels in the normalization.
    const double s = qh + qd + qa;
    return ProbabilityTriple{qh / s, qd / s, qa / s};
}

PoolBuildResult build_candidates(const std::vector<FixtureRecord>& fixtures, const std::vector<int>& matchdays,
                                 const EstimatorConfig& estimator) {
    if (fixtures.size() != matchdays.size())
        throw std::invalid_argument("build_candidates: fixtures and matchdays differ in length");
    PoolBuildResult out;
    std::map<int, MatchdayPool> pools;
    for (std::size_t i = 0; i < fixtures.size(); ++i) {
        const auto& f = fixtures[i];
        const auto probs = estimate_probabilities(f, estimator);
        if (!probs) {
            out.warnings.push_back("no probability estimate for " + f.league + " " + format_date(f.date) + " " +
                                   f.home_team + " v " + f.away_team + ", fixture skipped");
            continue;
        }
        auto match = make_match(f.league, matchdays[i], f.home_team, f.away_team);
        std::vector<CandidateBet> made;
        try {
            for (const auto& [book, triple] : f.odds_by_bookmaker)
                for (auto o : all_outcomes) made.emplace_back(match, book, o, triple[o], (*probs)[o]);
        } catch (const domain_error& e) {
            out.warnings.push_back(to_string(match) + ": " + e.what() + ", fixture skipped");
            continue;
        }
        auto& pool = pools[matchdays[i]];
        pool.matchday = matchdays[i];
        pool.results.emplace(match, f.full_time_result);
        pool.candidates.insert(pool.candidates.end(), made.begin(), made.end());
    }
    for (auto& [md, pool] : pools) {
        std::sort(pool.candidates.begin(), pool.candidates.end(),
                  [](const CandidateBet& a, const CandidateBet& b) { return key_order(a, b) < 0; });
        out.pools.push_back(std::move(pool));
    }
    return out;
}

Season load_season(const std::vector<std::filesystem::path>& files, const EstimatorConfig& estimator) {
    Season season;
    for (const auto& path : files) {
        auto parsed = parse_season_file(path);
        for (auto& w : parsed.warnings) season.warnings.push_back(path.filename().string() + ": " + w);
        std::move(parsed.fixtures.begin(), parsed.fixtures.end(), std::back_inserter(season.fixtures));
    }
    season.matchdays = infer_matchdays(season.fixtures);
    auto built = build_candidates(season.fixtures, season.matchdays, estimator);
    season.pools = std::move(built.pools);
    std::move(built.warnings.begin(), built.warnings.end(), std::back_inserter(season.warnings));
    return season;
}

std::vector<int> missing_matchdays(const std::vector<MatchdayPool>& pools) {
    std::set<int> present;
    for (const auto& p : pools) present.insert(p.matchday);
    std::vector<int> missing;
    if (present.empty()) return missing;
    for (int md = 1; md <= *present.rbegin(); ++md)
        if (!present.count(md)) missing.push_back(md);
    return missing;
}

}  // namespace acca
