// acca: batch entry points over season files.
//
// Exit codes: 0 ok, 2 usage/parse/data errors, 3 no bet.

#include "acca/backtest.hpp"
#include "acca/dominance.hpp"
#include "acca/ingest.hpp"
#include "acca/service.hpp"
#include "acca/solver.hpp"
#include "acca/staking.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include <glob.h>

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace acca;

namespace {

struct exit_error : std::runtime_error {
    int code;
    exit_error(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

constexpr int exit_data = 2;
constexpr int exit_no_bet = 3;

struct DataArgs {
    std::vector<std::string> season;
    std::string probabilities;
};

struct SearchArgs {
    double p_min = 0.25;
    double min_exp = 2.0;
    double max_time = 600.0;
    std::size_t agents = 50;
    std::uint64_t seed = 0;
    std::optional<std::size_t> max_legs;
    std::optional<std::uint64_t> max_iterations;
    unsigned threads = 1;
    bool trace = false;

    SolverParams params(FilterMode mode) const {
        SolverParams p;
        p.p_min = p_min;
        p.min_exp = min_exp;
        p.max_time = max_time;
        p.population = agents;
        p.seed = seed;
        p.max_legs = max_legs;
        p.max_iterations = max_iterations;
        p.filter_mode = mode;
        p.threads = threads;
        try {
            validate(p);
        } catch (const std::invalid_argument& e) {
            throw exit_error(exit_data, e.what());
        }
        return p;
    }
};

enum class Format { Table, Csv, Json };

const std::map<std::string, Format> format_names = {{"table", Format::Table}, {"csv", Format::Csv}, {"json", Format::Json}};
const std::map<std::string, FilterMode> filter_names = {
    {"none", FilterMode::None}, {"intra", FilterMode::IntraBookmaker}, {"inter", FilterMode::InterBookmaker}};

void add_data_options(CLI::App* cmd, DataArgs& d) {
    cmd->add_option("--season", d.season, "season CSV files, directories or glob patterns")->required();
    cmd->add_option("--probabilities", d.probabilities, "external probability CSV (default: inverse odds)");
}

void add_search_options(CLI::App* cmd, SearchArgs& s) {
    cmd->add_option("--pmin", s.p_min, "minimum accumulator win probability")->capture_default_str();
    cmd->add_option("--min-exp", s.min_exp, "expected-return threshold that stops the search")->capture_default_str();
    cmd->add_option("--max-time", s.max_time, "search budget in seconds per matchday")->capture_default_str();
    cmd->add_option("--agents", s.agents, "agents per bookmaker population")->capture_default_str();
    cmd->add_option("--seed", s.seed, "random seed")->capture_default_str();
    cmd->add_option("--max-legs", s.max_legs, "cap on accumulator size");
    cmd->add_option("--max-iterations", s.max_iterations, "cap on search rounds");
    cmd->add_option("--threads", s.threads, "threads for bookmaker populations (>1 is not reproducible)")
        ->capture_default_str();
    cmd->add_flag("--trace", s.trace, "per-iteration search trace on stderr");
}

std::vector<fs::path> expand_season(const std::vector<std::string>& patterns) {
    std::vector<fs::path> files;
    for (const auto& pat : patterns) {
        if (pat.find_first_of("*?[") != std::string::npos) {
            glob_t g{};
            const int rc = ::glob(pat.c_str(), 0, nullptr, &g);
            if (rc == 0)
                for (std::size_t i = 0; i < g.gl_pathc; ++i) files.emplace_back(g.gl_pathv[i]);
            globfree(&g);
            if (rc != 0) throw exit_error(exit_data, "no files match " + pat);
            continue;
        }
        const fs::path p(pat);
        if (fs::is_directory(p)) {
            std::vector<fs::path> in_dir;
            for (const auto& e : fs::directory_iterator(p))
                if (e.is_regular_file() && e.path().extension() == ".csv") in_dir.push_back(e.path());
            std::sort(in_dir.begin(), in_dir.end());
            files.insert(files.end(), in_dir.begin(), in_dir.end());
        } else if (fs::exists(p)) {
            files.push_back(p);
        } else {
            throw exit_error(exit_data, "no such file: " + pat);
        }
    }
    if (files.empty()) throw exit_error(exit_data, "empty season: no CSV files found");
    return files;
}

Season load(const DataArgs& d) {
    const auto files = expand_season(d.season);
    ExternalProbabilities external;
    EstimatorConfig est;
    try {
        if (!d.probabilities.empty()) {
            external = parse_probabilities_file(d.probabilities);
            est = {EstimatorKind::External, &external};
        }
        auto season = load_season(files, est);
        for (const auto& w : season.warnings) std::cerr << "warning: " << w << '\n';
        if (season.pools.empty()) throw exit_error(exit_data, "empty season: no usable fixtures");
        return season;
    } catch (const parse_error& e) {
        throw exit_error(exit_data, e.what());
    } catch (const domain_error& e) {
        throw exit_error(exit_data, e.what());
    }
}

const MatchdayPool& find_pool(const Season& season, int matchday) {
    for (const auto& p : season.pools)
        if (p.matchday == matchday) return p;
    throw exit_error(exit_data, fmt::format("unknown matchday {}", matchday));
}

std::string pct(double x) { return fmt::format("{:.2f}%", 100.0 * x); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + '"';
}

// Renders rows as a pipe table with padded columns.
void print_table(std::ostream& out, const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> w(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) w[i] = header[i].size();
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], r[i].size());
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < w.size(); ++i)
            out << (i ? " | " : "") << fmt::format("{:<{}}", i < r.size() ? r[i] : "", w[i]);
        out << '\n';
    };
    line(header);
    for (std::size_t i = 0; i < w.size(); ++i) out << (i ? "-|-" : "") << std::string(w[i], '-');
    out << '\n';
    for (const auto& r : rows) line(r);
}

struct Output {
    std::ofstream file;
    std::ostream* stream = &std::cout;
    explicit Output(const std::string& path) {
        if (path.empty()) return;
        file.open(path);
        if (!file) throw exit_error(exit_data, "cannot write " + path);
        stream = &file;
    }
    std::ostream& operator*() { return *stream; }
};

// ---------------------------------------------------------------- ingest

int cmd_ingest(const DataArgs& data, Format format, const std::string& out_path) {
    const auto season = load(data);
    Output out(out_path);
    if (format == Format::Csv) {
        // Same layout the parser reads, so the output can be fed back in.
        *out << "Div,Date,HomeTeam,AwayTeam,FTR";
        for (const auto& b : default_bookmakers) *out << ',' << b << "H," << b << "D," << b << 'A';
        *out << '\n';
        for (const auto& f : season.fixtures) {
            *out << csv_field(f.league) << ',' << format_date(f.date) << ',' << csv_field(f.home_team) << ','
                 << csv_field(f.away_team) << ',' << outcome_code(f.full_time_result);
            for (const auto& b : default_bookmakers) {
                auto it = f.odds_by_bookmaker.find(BookmakerRef{b});
                if (it == f.odds_by_bookmaker.end()) {
                    *out << ",,,";
                    continue;
                }
                *out << fmt::format(",{},{},{}", it->second.home, it->second.draw, it->second.away);
            }
            *out << '\n';
        }
        return 0;
    }
    std::size_t candidates = 0;
    for (const auto& p : season.pools) candidates += p.candidates.size();
    if (format == Format::Json) {
        json md = json::array();
        for (const auto& p : season.pools)
            md.push_back({{"matchday", p.matchday}, {"fixtures", p.fixture_count()}, {"candidates", p.candidates.size()}});
        *out << json{{"fixtures", season.fixtures.size()},
                     {"candidates", candidates},
                     {"warnings", season.warnings},
                     {"missing_matchdays", missing_matchdays(season.pools)},
                     {"matchdays", md}}
                    .dump(2)
             << '\n';
        return 0;
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : season.pools)
        rows.push_back({std::to_string(p.matchday), std::to_string(p.fixture_count()), std::to_string(p.candidates.size())});
    print_table(*out, {"Matchday", "Fixtures", "Candidates"}, rows);
    *out << fmt::format("{} fixtures, {} matchdays, {} candidates, {} warnings\n", season.fixtures.size(),
                        season.pools.size(), candidates, season.warnings.size());
    return 0;
}

// ---------------------------------------------------------- filter-stats

int cmd_filter_stats(const DataArgs& data, const std::vector<std::string>& filters, Format format,
                     const std::string& out_path) {
    const auto season = load(data);
    std::vector<FilterMode> modes;
    for (const auto& f : filters) modes.push_back(filter_names.at(f));
    if (modes.empty()) modes = {FilterMode::None, FilterMode::IntraBookmaker, FilterMode::InterBookmaker};

    struct Row {
        int matchday;
        FilterMode mode;
        std::size_t input, kept;
    };
    std::vector<Row> rows;
    std::map<int, std::map<FilterMode, std::size_t>> kept_by;
    for (const auto& pool : season.pools)
        for (auto mode : modes) {
            const auto r = prepare_pools(pool.candidates, mode).report;
            rows.push_back({pool.matchday, mode, r.input_count, r.kept_count});
            kept_by[pool.matchday][mode] = r.kept_count;
        }

    struct Avg {
        double input = 0, kept = 0, reduction = 0;
        std::size_t n = 0;
    };
    std::map<FilterMode, Avg> avg;
    for (const auto& r : rows) {
        auto& a = avg[r.mode];
        a.input += r.input;
        a.kept += r.kept;
        a.reduction += r.input ? 1.0 - static_cast<double>(r.kept) / r.input : 0.0;
        ++a.n;
    }
    // Extra share of the intra-kept candidates removed by the inter test.
    std::optional<double> incremental;
    if (avg.count(FilterMode::IntraBookmaker) && avg.count(FilterMode::InterBookmaker)) {
        double sum = 0.0;
        for (const auto& [md, k] : kept_by) {
            const double intra = k.at(FilterMode::IntraBookmaker);
            sum += intra > 0 ? 1.0 - k.at(FilterMode::InterBookmaker) / intra : 0.0;
        }
        incremental = sum / kept_by.size();
    }

    Output out(out_path);
    auto reduction = [](const Row& r) { return r.input ? 1.0 - static_cast<double>(r.kept) / r.input : 0.0; };
    if (format == Format::Json) {
        json j = json::array();
        for (const auto& r : rows)
            j.push_back({{"matchday", r.matchday}, {"mode", to_string(r.mode)}, {"input", r.input}, {"kept", r.kept},
                         {"reduction", reduction(r)}});
        json averages = json::object();
        for (const auto& [mode, a] : avg)
            averages[std::string(to_string(mode))] = {
                {"input", a.input / a.n}, {"kept", a.kept / a.n}, {"reduction", a.reduction / a.n}};
        json doc{{"rows", j}, {"averages", averages}};
        if (incremental) doc["incremental_inter_vs_intra"] = *incremental;
        *out << doc.dump(2) << '\n';
        return 0;
    }
    if (format == Format::Csv) {
        *out << "matchday,mode,input,kept,reduction_pct\n";
        for (const auto& r : rows)
            *out << fmt::format("{},{},{},{},{:.2f}\n", r.matchday, to_string(r.mode), r.input, r.kept,
                                100.0 * reduction(r));
        for (const auto& [mode, a] : avg)
            *out << fmt::format("average,{},{:.2f},{:.2f},{:.2f}\n", to_string(mode), a.input / a.n, a.kept / a.n,
                                100.0 * a.reduction / a.n);
        if (incremental) *out << fmt::format("incremental,inter-vs-intra,,,{:.2f}\n", 100.0 * *incremental);
        return 0;
    }
    std::vector<std::vector<std::string>> table;
    for (const auto& r : rows)
        table.push_back({std::to_string(r.matchday), std::string(to_string(r.mode)), std::to_string(r.input),
                         std::to_string(r.kept), pct(reduction(r))});
    for (const auto& [mode, a] : avg)
        table.push_back({"average", std::string(to_string(mode)), fmt::format("{:.1f}", a.input / a.n),
                         fmt::format("{:.1f}", a.kept / a.n), pct(a.reduction / a.n)});
    if (incremental) table.push_back({"incremental", "inter vs intra", "", "", pct(*incremental)});
    print_table(*out, {"Matchday", "Mode", "Input", "Kept", "Reduction"}, table);
    return 0;
}

// ------------------------------------------------------------- recommend

SearchHooks trace_hooks(bool on) {
    SearchHooks h;
    if (on) {
        std::cerr << "iteration,bookmaker,best_exp,active_fraction\n";
        h.trace = [](const TraceRecord& t) {
            std::cerr << fmt::format("{},{},{},{:.4f}\n", t.iteration, t.bookmaker.code, t.best_exp, t.active_fraction);
        };
    }
    return h;
}

json legs_json(const Accumulator& acc) {
    json legs = json::array();
    for (const auto& l : acc.legs())
        legs.push_back({{"league", l.match().league},
                        {"matchday", l.match().matchday},
                        {"home", l.match().home_team},
                        {"away", l.match().away_team},
                        {"outcome", std::string(1, outcome_code(l.outcome()))},
                        {"bookmaker", l.bookmaker().code},
                        {"odds", l.odds()},
                        {"prob", l.prob()}});
    return legs;
}

int cmd_recommend(const DataArgs& data, const SearchArgs& search, const std::string& filter, int matchday,
                  double bankroll, Format format, const std::string& out_path) {
    const auto season = load(data);
    const auto& pool = find_pool(season, matchday);
    const auto params = search.params(filter_names.at(filter));
    const auto prepared = prepare_pools(pool.candidates, params.filter_mode);
    const auto outcome = sds_search(prepared.pools, params, trace_hooks(search.trace));

    Output out(out_path);
    if (!outcome.best) {
        if (format == Format::Json)
            *out << json{{"matchday", matchday}, {"no_bet", {{"reason", to_string(outcome.reason)}}}}.dump(2) << '\n';
        else
            *out << fmt::format("no bet on matchday {} ({})\n", matchday, to_string(outcome.reason));
        return exit_no_bet;
    }
    const auto& acc = outcome.best->accumulator;
    const auto& t = outcome.best->totals;
    const double kelly = kelly_fraction(t.prob, t.odds);
    const double va = variance_adjusted_stake(t.prob, t.odds);
    if (format == Format::Json) {
        *out << json{{"matchday", matchday},
                     {"bookmaker", acc.bookmaker().code},
                     {"legs", legs_json(acc)},
                     {"totals", {{"odds", t.odds}, {"prob", t.prob}, {"exp", t.exp}}},
                     {"kelly_fraction", kelly},
                     {"variance_adjusted", va},
                     {"kelly_amount", service::money(kelly * bankroll)},
                     {"iterations", outcome.iterations}}
                    .dump(2)
             << '\n';
        return 0;
    }
    if (format == Format::Csv) {
        *out << "league,home,away,outcome,bookmaker,odds,prob\n";
        for (const auto& l : acc.legs())
            *out << fmt::format("{},{},{},{},{},{},{}\n", csv_field(l.match().league), csv_field(l.match().home_team),
                                csv_field(l.match().away_team), outcome_code(l.outcome()), l.bookmaker().code,
                                l.odds(), l.prob());
        return 0;
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& l : acc.legs())
        rows.push_back({l.match().league, l.match().home_team, l.match().away_team,
                        std::string(1, outcome_code(l.outcome())), fmt::format("{:.2f}", l.odds()),
                        fmt::format("{:.4f}", l.prob())});
    *out << fmt::format("Matchday {}, bookmaker {}, {} legs\n\n", matchday, acc.bookmaker().code, acc.size());
    print_table(*out, {"League", "Home", "Away", "Outcome", "Odds", "Prob"}, rows);
    *out << fmt::format("\nTotal odds {:.2f}  probability {:.4f}  expected return {:.4f}\n", t.odds, t.prob, t.exp);
    *out << fmt::format("Kelly fraction {:.4f}  stake {} of {}\n", kelly, service::money(kelly * bankroll),
                        service::money(bankroll));
    *out << fmt::format("Variance adjusted {:.4f}\n", va);
    return 0;
}

// -------------------------------------------------------------- backtest

int cmd_backtest(const DataArgs& data, const SearchArgs& search, std::vector<std::string> filters,
                 std::vector<std::string> combos, double bankroll, Format format, const std::string& out_path,
                 const std::string& ledger_dir) {
    const auto season = load(data);
    if (auto gaps = missing_matchdays(season.pools); !gaps.empty()) {
        std::string list;
        for (int g : gaps) list += (list.empty() ? "" : ", ") + std::to_string(g);
        throw exit_error(exit_data, "data gaps: missing matchdays " + list);
    }
    if (filters.empty()) filters = {"intra"};
    if (combos.empty())
        for (const auto& c : all_combos) combos.push_back(to_string(c));

    struct Run {
        StrategyCombo combo;
        FilterMode mode;
        SeasonSummary summary;
        std::vector<LedgerEntry> ledger;
    };
    std::vector<Run> runs;
    for (const auto& c : combos)
        for (const auto& f : filters) {
            const auto combo = *parse_combo(c);
            const auto params = search.params(filter_names.at(f));
            std::cerr << fmt::format("running {} / {}\n", c, f);
            auto ledger = run_season(season.pools, combo, params, bankroll);
            runs.push_back({combo, params.filter_mode, summarize(ledger), std::move(ledger)});
        }

    if (!ledger_dir.empty()) {
        fs::create_directories(ledger_dir);
        for (const auto& r : runs) {
            std::ofstream f(fs::path(ledger_dir) / fmt::format("{}-{}.csv", to_string(r.combo), to_string(r.mode)));
            write_ledger_csv(f, r.ledger, r.combo);
        }
    }
    if (!out_path.empty()) {
        Output gains(out_path);
        *gains << "matchday";
        for (const auto& r : runs) *gains << ',' << to_string(r.combo) << '-' << to_string(r.mode);
        *gains << '\n';
        for (std::size_t i = 0; i < season.pools.size(); ++i) {
            *gains << season.pools[i].matchday;
            for (const auto& r : runs) *gains << fmt::format(",{:.10g}", (r.ledger[i].bankroll_after - bankroll) / bankroll);
            *gains << '\n';
        }
    }

    auto opt_fmt = [](const std::optional<double>& v, auto f) { return v ? f(*v) : std::string("-"); };
    auto preprocessing = [](FilterMode m) {
        return m == FilterMode::None ? "None" : m == FilterMode::IntraBookmaker ? "Intra-bookmaker" : "Inter-bookmaker";
    };
    std::ostream& out = std::cout;
    if (format == Format::Json) {
        json j = json::array();
        for (const auto& r : runs) {
            const auto& s = r.summary;
            auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
            j.push_back({{"combo", to_string(r.combo)},
                         {"model", model_label(r.combo)},
                         {"preprocessing", to_string(r.mode)},
                         {"average_odds", opt(s.average_odds)},
                         {"average_probability", opt(s.average_probability)},
                         {"average_stakes_per_matchday", opt(s.average_stakes_per_matchday)},
                         {"average_stake_per_bet", opt(s.average_stake_per_bet)},
                         {"total_gains", s.total_gains},
                         {"wagers", s.wager_count},
                         {"winning_wagers", s.winning_bet_count},
                         {"matchdays_with_bets", s.matchdays_with_bets},
                         {"final_bankroll", service::money(s.final_bankroll)}});
        }
        out << j.dump(2) << '\n';
        return 0;
    }
    if (format == Format::Csv) {
        out << "model,preprocessing,average_odds,average_probability,average_stakes_per_matchday,total_gains,"
               "average_stake_per_bet,wagers,matchdays_with_bets\n";
        auto num = [](double x) { return fmt::format("{:.6f}", x); };
        for (const auto& r : runs) {
            const auto& s = r.summary;
            out << csv_field(model_label(r.combo)) << ',' << preprocessing(r.mode) << ','
                << opt_fmt(s.average_odds, num) << ',' << opt_fmt(s.average_probability, num) << ','
                << opt_fmt(s.average_stakes_per_matchday, num) << ',' << num(s.total_gains) << ','
                << opt_fmt(s.average_stake_per_bet, num) << ',' << s.wager_count << ',' << s.matchdays_with_bets
                << '\n';
        }
        return 0;
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : runs) {
        const auto& s = r.summary;
        rows.push_back({model_label(r.combo), preprocessing(r.mode),
                        opt_fmt(s.average_odds, [](double x) { return fmt::format("{:.2f}", x); }),
                        opt_fmt(s.average_probability, [](double x) { return pct(x); }),
                        opt_fmt(s.average_stakes_per_matchday, [](double x) { return pct(x); }), pct(s.total_gains)});
    }
    print_table(out, {"Model", "Preprocessing", "Average odds", "Average probability", "Average stakes per matchday",
                      "Total Gains"},
                rows);
    return 0;
}

// ---------------------------------------------------------------- oracle

// Instance file columns: home,away,outcome,odds,prob (one bookmaker).
std::vector<CandidateBet> read_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw exit_error(exit_data, "no such file: " + path);
    std::string line;
    std::getline(in, line);
    std::vector<CandidateBet> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        try {
            if (f.size() < 5) throw domain_error("expected home,away,outcome,odds,prob");
            const auto o = parse_outcome(f[2]);
            if (!o) throw domain_error("bad outcome " + f[2]);
            out.emplace_back(make_match("X", 1, f[0], f[1]), BookmakerRef{"X"}, *o, std::stod(f[3]), std::stod(f[4]));
        } catch (const std::exception& e) {
            throw exit_error(exit_data, fmt::format("{} line {}: {}", path, line_no, e.what()));
        }
    }
    return out;
}

int cmd_oracle(const std::string& instance, const DataArgs& data, int matchday, const std::string& bookmaker,
               const std::string& filter, const SearchArgs& search, std::size_t seeds, bool force, Format format) {
    std::vector<CandidateBet> candidates;
    if (!instance.empty()) {
        candidates = read_instance(instance);
    } else {
        if (data.season.empty()) throw exit_error(exit_data, "oracle needs --instance or --season with --matchday");
        const auto season = load(data);
        const auto& pool = find_pool(season, matchday);
        auto prepared = prepare_pools(pool.candidates, filter_names.at(filter));
        auto it = bookmaker.empty() ? prepared.pools.begin() : prepared.pools.find(BookmakerRef{bookmaker});
        if (it == prepared.pools.end()) throw exit_error(exit_data, "no candidates for bookmaker " + bookmaker);
        candidates = it->second;
    }
    if (candidates.empty()) throw exit_error(exit_data, "empty instance");
    if (candidates.size() > 12 && !force) throw exit_error(exit_data, "oracle limit exceeded");

    OracleResult oracle;
    try {
        oracle = enumerate_oracle(candidates, search.p_min);
    } catch (const oracle_limit_exceeded& e) {
        throw exit_error(exit_data, e.what());
    }
    if (!oracle.best) {
        std::cout << "no accumulator reaches the probability floor\n";
        return exit_no_bet;
    }
    const double optimum = oracle.best->totals.exp;

    struct SeedRun {
        std::uint64_t seed;
        double exp;
        double gap;
        bool met;
    };
    std::vector<SeedRun> runs;
    auto base = search;
    base.min_exp = optimum;
    for (std::size_t i = 0; i < seeds; ++i) {
        auto s = base;
        s.seed = search.seed + i;
        auto params = s.params(FilterMode::None);
        params.min_exp = optimum * (1.0 - 1e-12);
        BookmakerPools pools{{candidates.front().bookmaker(), candidates}};
        const auto r = sds_search(pools, params);
        const double got = r.best_seen ? r.best_seen->totals.exp : 0.0;
        runs.push_back({s.seed, got, (optimum - got) / optimum, r.best.has_value()});
    }
    const auto within = std::count_if(runs.begin(), runs.end(), [](const SeedRun& r) { return r.gap <= 0.05; });
    double mean_gap = 0.0, max_gap = 0.0;
    for (const auto& r : runs) {
        mean_gap += r.gap / runs.size();
        max_gap = std::max(max_gap, r.gap);
    }

    if (format == Format::Json) {
        json per = json::array();
        for (const auto& r : runs) per.push_back({{"seed", r.seed}, {"exp", r.exp}, {"gap", r.gap}, {"met", r.met}});
        std::cout << json{{"candidates", candidates.size()}, {"enumerated", oracle.enumerated},
                          {"oracle_exp", optimum},     {"runs", per},
                          {"within_5pct", within},     {"mean_gap", mean_gap},
                          {"max_gap", max_gap}}
                         .dump(2)
                  << '\n';
        return 0;
    }
    if (format == Format::Csv) {
        std::cout << "seed,sds_exp,oracle_exp,gap,met\n";
        for (const auto& r : runs)
            std::cout << fmt::format("{},{:.10g},{:.10g},{:.6f},{}\n", r.seed, r.exp, optimum, r.gap, r.met ? 1 : 0);
        return 0;
    }
    std::cout << fmt::format("{} candidates, {} feasible accumulators enumerated\n", candidates.size(), oracle.enumerated);
    std::cout << fmt::format("oracle best exp {:.6f} (odds {:.4f}, prob {:.4f}, {} legs)\n\n", optimum,
                             oracle.best->totals.odds, oracle.best->totals.prob, oracle.best->accumulator.size());
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : runs)
        rows.push_back({std::to_string(r.seed), fmt::format("{:.6f}", r.exp), pct(r.gap), r.met ? "yes" : "no"});
    print_table(std::cout, {"Seed", "SDS exp", "Gap", "Reached"}, rows);
    std::cout << fmt::format("\n{}/{} runs within 5%, mean gap {}, max gap {}\n", within, runs.size(), pct(mean_gap),
                             pct(max_gap));
    return 0;
}

// ----------------------------------------------------------------- serve

service::Service* active_service = nullptr;

int cmd_serve(const DataArgs& data, const std::string& addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw exit_error(exit_data, "address must be host:port");
    const std::string host = addr.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(addr.substr(colon + 1));
    } catch (const std::exception&) {
        throw exit_error(exit_data, "bad port in " + addr);
    }
    service::Service svc;
    if (!data.season.empty()) {
        auto ds = std::make_shared<service::Dataset>();
        ds->files = expand_season(data.season);
        ds->season = load(data);
        svc.set_dataset(std::move(ds));
    }
    active_service = &svc;
    std::signal(SIGINT, [](int) {
        if (active_service) active_service->stop();
    });
    std::cerr << "listening on " << host << ':' << port << '\n';
    if (!svc.serve(host, port)) throw exit_error(exit_data, "cannot listen on " + addr);
    active_service = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Accumulator bet selection and backtesting"};
    app.require_subcommand(0, 1);

    std::string format_name = "table";
    std::string out_path;
    auto add_format = [&](CLI::App* cmd) {
        cmd->add_option("--format", format_name, "table, csv or json")
            ->check(CLI::IsMember({"table", "csv", "json"}))
            ->capture_default_str();
        cmd->add_option("--out", out_path, "write primary output to a file");
    };
    const auto filter_check = CLI::IsMember({"none", "intra", "inter"});

    DataArgs top_data;
    std::string serve_addr;
    app.add_option("--serve", serve_addr, "start the HTTP service on host:port");
    app.add_option("--season", top_data.season, "season files for --serve");
    app.add_option("--probabilities", top_data.probabilities, "external probability CSV for --serve");

    DataArgs data;
    SearchArgs search;
    std::string filter = "intra";
    std::vector<std::string> filters, combos;
    int matchday = 0;
    double bankroll = 100.0;

    auto* ingest = app.add_subcommand("ingest", "parse season files and summarize matchdays");
    add_data_options(ingest, data);
    add_format(ingest);

    auto* stats = app.add_subcommand("filter-stats", "per-matchday dominance reduction");
    add_data_options(stats, data);
    stats->add_option("--filter", filters, "modes to report (default: all)")->check(filter_check);
    add_format(stats);

    auto* rec = app.add_subcommand("recommend", "select an accumulator for one matchday");
    add_data_options(rec, data);
    add_search_options(rec, search);
    rec->add_option("--matchday", matchday, "matchday number")->required();
    rec->add_option("--filter", filter, "dominance filter")->check(filter_check)->capture_default_str();
    rec->add_option("--bankroll", bankroll, "bankroll for the stake amount")->capture_default_str();
    add_format(rec);

    std::string ledger_dir;
    auto* bt = app.add_subcommand("backtest", "replay a season for strategy combinations");
    add_data_options(bt, data);
    add_search_options(bt, search);
    bt->add_option("--filter", filters, "dominance filters, one row each (default: intra)")->check(filter_check);
    bt->add_option("--combo", combos, "strategy combinations (default: all four)")
        ->check(CLI::IsMember({"acc-kelly", "acc-va", "singles-kelly", "singles-va"}));
    bt->add_option("--bankroll", bankroll, "initial bankroll")->capture_default_str();
    bt->add_option("--format", format_name, "table, csv or json")
        ->check(CLI::IsMember({"table", "csv", "json"}))
        ->capture_default_str();
    bt->add_option("--out", out_path, "cumulative-gains CSV");
    bt->add_option("--ledger", ledger_dir, "directory for per-run ledger CSVs");

    std::string instance, bookmaker;
    std::size_t seeds = 100;
    bool force = false;
    auto* orc = app.add_subcommand("oracle", "compare the search with exhaustive enumeration");
    orc->add_option("--instance", instance, "CSV with home,away,outcome,odds,prob");
    orc->add_option("--season", data.season, "season files (with --matchday)");
    orc->add_option("--probabilities", data.probabilities, "external probability CSV");
    orc->add_option("--matchday", matchday, "matchday number");
    orc->add_option("--bookmaker", bookmaker, "bookmaker code (default: first)");
    orc->add_option("--filter", filter, "dominance filter")->check(filter_check)->capture_default_str();
    orc->add_option("--seeds", seeds, "number of seeds")->capture_default_str();
    orc->add_flag("--force", force, "allow instances above 12 candidates");
    add_search_options(orc, search);
    orc->get_option("--max-time")->default_val(5.0);
    orc->add_option("--format", format_name, "table, csv or json")
        ->check(CLI::IsMember({"table", "csv", "json"}))
        ->capture_default_str();

    std::string addr = "127.0.0.1:8080";
    auto* srv = app.add_subcommand("serve", "start the HTTP service");
    srv->add_option("--season", data.season, "season files to load at start");
    srv->add_option("--probabilities", data.probabilities, "external probability CSV");
    srv->add_option("--serve,--addr", addr, "host:port")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_data;
    }

    try {
        const Format format = format_names.at(format_name);
        if (*ingest) return cmd_ingest(data, format, out_path);
        if (*stats) return cmd_filter_stats(data, filters, format, out_path);
        if (*rec) return cmd_recommend(data, search, filter, matchday, bankroll, format, out_path);
        if (*bt) return cmd_backtest(data, search, filters, combos, bankroll, format, out_path, ledger_dir);
        if (*orc) return cmd_oracle(instance, data, matchday, bookmaker, filter, search, seeds, force, format);
        if (*srv) return cmd_serve(data, addr);
        if (!serve_addr.empty()) return cmd_serve(top_data, serve_addr);
        std::cout << app.help();
        return exit_data;
    } catch (const exit_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_data;
    }
}
