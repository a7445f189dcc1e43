#include "acca/service.hpp"

#include "acca/dominance.hpp"
#include "acca/solver.hpp"
#include "acca/staking.hpp"

#include <httplib.h>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

namespace acca::service {

using nlohmann::json;

namespace {

struct http_error : std::runtime_error {
    int status;
    json detail;
    http_error(int s, const std::string& msg, json d = nullptr) : std::runtime_error(msg), status(s), detail(std::move(d)) {}
};

Response reply(int status, const json& body) { return Response{status, body.dump(), "application/json"}; }

Response error_reply(int status, const std::string& message, const json& detail = nullptr) {
    json body{{"error", message}};
    if (!detail.is_null()) body["detail"] = detail;
    return reply(status, body);
}

json parse_body(std::string_view body) {
    if (body.empty()) return json::object();
    try {
        auto j = json::parse(body);
        if (!j.is_object()) throw http_error(400, "request body must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw http_error(400, std::string("malformed JSON: ") + e.what());
    }
}

double parse_money(const json& v, const char* name) {
    double out = 0.0;
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec != std::errc{} || ptr != s.data() + s.size()) throw http_error(400, std::string(name) + " is not a decimal string");
    } else if (v.is_number()) {
        out = v.get<double>();
    } else {
        throw http_error(400, std::string(name) + " must be a decimal string");
    }
    if (!std::isfinite(out) || out < 0.0) throw http_error(400, std::string(name) + " must be non-negative");
    return out;
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    try {
        return j[key].get<T>();
    } catch (const json::exception&) {
        throw http_error(400, std::string("invalid type for ") + key);
    }
}

SolverParams parse_params(const json& j, double max_time_cap) {
    if (!j.is_null() && !j.is_object()) throw http_error(400, "params must be an object");
    const json p = j.is_null() ? json::object() : j;
    SolverParams out;
    out.p_min = field_or(p, "p_min", out.p_min);
    out.min_exp = field_or(p, "min_exp", out.min_exp);
    out.max_time = std::min(field_or(p, "max_time", max_time_cap), max_time_cap);
    out.population = field_or<std::size_t>(p, "agents", field_or<std::size_t>(p, "population", out.population));
    out.seed = field_or<std::uint64_t>(p, "seed", out.seed);
    if (p.contains("max_legs") && !p["max_legs"].is_null()) out.max_legs = field_or<std::size_t>(p, "max_legs", 0);
    if (p.contains("max_iterations") && !p["max_iterations"].is_null())
        out.max_iterations = field_or<std::uint64_t>(p, "max_iterations", 0);
    const auto filter = field_or<std::string>(p, "filter", "intra");
    const auto mode = parse_filter_mode(filter);
    if (!mode) throw http_error(400, "unknown filter '" + filter + "'");
    out.filter_mode = *mode;
    try {
        validate(out);
    } catch (const std::invalid_argument& e) {
        throw http_error(400, e.what());
    }
    return out;
}

json to_json(const MatchRef& m) {
    return {{"league", m.league}, {"matchday", m.matchday}, {"home", m.home_team}, {"away", m.away_team}};
}

json to_json(const CandidateBet& c) {
    json j = to_json(c.match());
    j["bookmaker"] = c.bookmaker().code;
    j["outcome"] = std::string(1, outcome_code(c.outcome()));
    j["odds"] = c.odds();
    j["prob"] = c.prob();
    return j;
}

json to_json(const AccumulatorTotals& t) { return {{"odds", t.odds}, {"prob", t.prob}, {"exp", t.exp}}; }

json to_json(const Accumulator& a) {
    json legs = json::array();
    for (const auto& l : a.legs()) legs.push_back(to_json(l));
    return {{"bookmaker", a.empty() ? std::string{} : a.bookmaker().code}, {"legs", legs}};
}

CandidateBet parse_leg(const json& j) {
    if (!j.is_object()) throw http_error(400, "each leg must be an object");
    const auto outcome = parse_outcome(field_or<std::string>(j, "outcome", ""));
    if (!outcome) throw http_error(400, "leg outcome must be H, D or A");
    try {
        auto match = make_match(field_or<std::string>(j, "league", ""), field_or(j, "matchday", 1),
                                field_or<std::string>(j, "home", ""), field_or<std::string>(j, "away", ""));
        return CandidateBet(std::move(match), BookmakerRef{field_or<std::string>(j, "bookmaker", "")}, *outcome,
                            field_or(j, "odds", 0.0), field_or(j, "prob", 0.0));
    } catch (const domain_error& e) {
        throw http_error(400, std::string("invalid leg: ") + e.what());
    }
}

Accumulator parse_legs(const json& body) {
    if (!body.contains("legs") || !body["legs"].is_array()) throw http_error(400, "legs must be an array");
    std::vector<CandidateBet> legs;
    for (const auto& l : body["legs"]) legs.push_back(parse_leg(l));
    return Accumulator(std::move(legs));
}

json violations_json(const std::vector<Violation>& vs) {
    json out = json::array();
    for (const auto& v : vs) {
        json legs = json::array();
        for (const auto& l : v.offending) legs.push_back(to_json(l));
        json entry{{"kind", to_string(v.kind)}, {"message", v.message}, {"legs", legs}};
        if (v.kind == ViolationKind::ConflictingOutcomes || v.kind == ViolationKind::DuplicateLeg)
            entry["match"] = to_json(v.offending.front().match());
        out.push_back(entry);
    }
    return out;
}

std::optional<StrategyCombo> combo_from(const json& j) {
    if (!j.contains("combo") || !j["combo"].is_string()) return std::nullopt;
    return parse_combo(j["combo"].get<std::string>());
}

json summary_json(const SeasonSummary& s) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {{"average_odds", opt(s.average_odds)},
            {"average_probability", opt(s.average_probability)},
            {"average_stakes_per_matchday", opt(s.average_stakes_per_matchday)},
            {"average_stake_per_bet", opt(s.average_stake_per_bet)},
            {"total_gains", s.total_gains},
            {"winning_bet_count", s.winning_bet_count},
            {"wager_count", s.wager_count},
            {"matchdays_with_bets", s.matchdays_with_bets},
            {"initial_bankroll", money(s.initial_bankroll)},
            {"final_bankroll", money(s.final_bankroll)}};
}

json entry_json(const LedgerEntry& e) {
    json wagers = json::array();
    for (const auto& w : e.wagers)
        wagers.push_back({{"odds", w.odds},
                          {"prob", w.prob},
                          {"fraction", w.fraction},
                          {"amount", money(w.amount)},
                          {"won", w.won},
                          {"net_gain", money(w.net_gain)},
                          {"legs", to_json(w.target)["legs"]}});
    json j{{"matchday", e.matchday},
           {"net_gain", money(e.net_gain)},
           {"bankroll", money(e.bankroll_after)},
           {"staking_base", money(e.staking_base_after)},
           {"wagers", wagers}};
    if (e.search) j["search"] = to_string(*e.search);
    return j;
}

std::string random_token() {
    std::random_device rd;
    std::ostringstream os;
    os << std::hex;
    for (int i = 0; i < 4; ++i) os << rd();
    return os.str();
}

}  // namespace

std::string money(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", value);
    return buf;
}

const MatchdayPool* Dataset::pool(int matchday) const {
    for (const auto& p : season.pools)
        if (p.matchday == matchday) return &p;
    return nullptr;
}

struct Service::SessionLedger {
    std::mutex mutex;
    double bankroll = 100.0;
    double base = 100.0;
    json entries = json::array();
};

struct Service::Impl {
    httplib::Server server;
};

Service::Service(Options options) : options_(options), impl_(std::make_unique<Impl>()) {
    auto& s = impl_->server;
    auto to_http = [](const Response& r, httplib::Response& res) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    auto query_of = [](const httplib::Request& req) {
        std::map<std::string, std::string> q;
        for (const auto& [k, v] : req.params) q[k] = v;
        return q;
    };
    s.set_default_headers({{"Access-Control-Allow-Origin", "*"}, {"Access-Control-Allow-Headers", "Content-Type"}});
    s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    s.Post("/backtest", [this, to_http](const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = parse_body(req.body);
        } catch (const http_error& e) {
            return to_http(error_reply(e.status, e.what()), res);
        }
        if (!body.value("stream", false)) return to_http(handle("POST", "/backtest", req.body), res);

        // Validate up front so errors still get a status code.
        auto check = backtest_stream(req.body, [](std::string_view) { return false; });
        if (check.status != 200) return to_http(check, res);
        const std::string request = req.body;
        res.set_chunked_content_provider("application/x-ndjson", [this, request](std::size_t, httplib::DataSink& sink) {
            backtest_stream(request, [&](std::string_view chunk) { return sink.write(chunk.data(), chunk.size()); });
            sink.done();
            return true;
        });
    });

    auto generic = [this, to_http, query_of](const httplib::Request& req, httplib::Response& res) {
        to_http(handle(req.method, req.path, req.body, query_of(req)), res);
    };
    s.Get(R"(/.*)", generic);
    s.Post(R"(/.*)", generic);
}

Service::~Service() = default;

void Service::set_dataset(std::shared_ptr<const Dataset> dataset) {
    std::lock_guard lock(dataset_mutex_);
    dataset_ = std::move(dataset);
}

std::shared_ptr<const Dataset> Service::dataset() const {
    std::lock_guard lock(dataset_mutex_);
    return dataset_;
}

void Service::load(const std::vector<std::filesystem::path>& files, const std::filesystem::path& probabilities) {
    auto ds = std::make_shared<Dataset>();
    ds->files = files;
    ExternalProbabilities external;
    EstimatorConfig est;
    if (!probabilities.empty()) {
        external = parse_probabilities_file(probabilities);
        est = {EstimatorKind::External, &external};
    }
    ds->season = load_season(files, est);
    set_dataset(std::move(ds));
}

Response Service::handle(std::string_view method, std::string_view path, std::string_view body,
                         const std::map<std::string, std::string>& query) {
    try {
        std::vector<std::string> parts;
        for (std::size_t i = 0; i < path.size();) {
            auto j = path.find('/', i);
            if (j == std::string_view::npos) j = path.size();
            if (j > i) parts.emplace_back(path.substr(i, j - i));
            i = j + 1;
        }
        const bool get = method == "GET";
        const bool post = method == "POST";
        if (get && parts == std::vector<std::string>{"matchdays"}) return matchdays();
        if (get && parts.size() == 3 && parts[0] == "matchdays" && parts[2] == "candidates") {
            int md = 0;
            auto [ptr, ec] = std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), md);
            if (ec != std::errc{} || ptr != parts[1].data() + parts[1].size()) return error_reply(400, "bad matchday");
            return candidates(md, query);
        }
        if (post && parts == std::vector<std::string>{"load"}) return load_request(body);
        if (post && parts == std::vector<std::string>{"recommend"}) return recommend(body);
        if (post && parts == std::vector<std::string>{"whatif"}) return whatif(body);
        if (post && parts == std::vector<std::string>{"backtest"}) return backtest(body);
        if (post && parts == std::vector<std::string>{"sessions"}) {
            auto r = create_session();
            const auto j = parse_body(body);
            if (j.contains("bankroll")) {
                const double b = parse_money(j["bankroll"], "bankroll");
                const auto token = json::parse(r.body)["token"].get<std::string>();
                std::lock_guard lock(sessions_mutex_);
                sessions_[token]->bankroll = sessions_[token]->base = b;
            }
            return r;
        }
        if (get && parts.size() == 2 && parts[0] == "sessions") return get_session(parts[1]);
        if (post && parts.size() == 3 && parts[0] == "sessions" && parts[2] == "wagers")
            return record_wager(parts[1], body);
        return error_reply(404, "no such endpoint");
    } catch (const http_error& e) {
        return error_reply(e.status, e.what(), e.detail);
    } catch (const std::exception& e) {
        return error_reply(500, e.what());
    }
}

Response Service::matchdays() const {
    const auto ds = dataset();
    if (!ds || ds->season.pools.empty()) return error_reply(409, "no dataset loaded");
    json out = json::array();
    for (const auto& pool : ds->season.pools) {
        const auto intra = prepare_pools(pool.candidates, FilterMode::IntraBookmaker).report.kept_count;
        const auto inter = prepare_pools(pool.candidates, FilterMode::InterBookmaker).report.kept_count;
        out.push_back({{"matchday", pool.matchday},
                       {"fixtures", pool.fixture_count()},
                       {"candidates", pool.candidates.size()},
                       {"kept_intra", intra},
                       {"kept_inter", inter}});
    }
    return reply(200, out);
}

Response Service::candidates(int matchday, const std::map<std::string, std::string>& query) const {
    const auto ds = dataset();
    if (!ds || ds->season.pools.empty()) return error_reply(409, "no dataset loaded");
    const auto* pool = ds->pool(matchday);
    if (pool == nullptr) return error_reply(404, "unknown matchday");
    auto it = query.find("filter");
    const auto mode = parse_filter_mode(it == query.end() ? "intra" : it->second);
    if (!mode) return error_reply(400, "unknown filter");

    const auto prepared = prepare_pools(pool->candidates, *mode);
    json out = json::array();
    for (const auto& c : pool->candidates) {
        bool kept = false;
        if (auto p = prepared.pools.find(c.bookmaker()); p != prepared.pools.end())
            for (const auto& k : p->second) kept = kept || same_variable(k, c);
        auto j = to_json(c);
        j["kept"] = kept;
        out.push_back(j);
    }
    return reply(200, json{{"matchday", matchday}, {"filter", to_string(*mode)}, {"candidates", out}});
}

Response Service::load_request(std::string_view body) {
    const auto j = parse_body(body);
    std::vector<std::filesystem::path> files;
    if (j.contains("path") && j["path"].is_string()) files.emplace_back(j["path"].get<std::string>());
    if (j.contains("paths") && j["paths"].is_array())
        for (const auto& p : j["paths"]) files.emplace_back(p.get<std::string>());
    if (files.empty()) return error_reply(400, "path or paths required");
    try {
        load(files, field_or<std::string>(j, "probabilities", ""));
    } catch (const parse_error& e) {
        return error_reply(400, e.what());
    } catch (const domain_error& e) {
        return error_reply(400, e.what());
    }
    const auto ds = dataset();
    return reply(200, json{{"matchdays", ds->season.pools.size()}, {"fixtures", ds->season.fixtures.size()},
                           {"warnings", ds->season.warnings.size()}});
}

Response Service::recommend(std::string_view body) const {
    const auto j = parse_body(body);
    const auto params = parse_params(j.value("params", json(nullptr)), options_.interactive_max_time);
    const auto ds = dataset();
    if (!ds || ds->season.pools.empty()) return error_reply(409, "no dataset loaded");
    if (!j.contains("matchday") || !j["matchday"].is_number_integer()) return error_reply(400, "matchday required");
    const auto* pool = ds->pool(j["matchday"].get<int>());
    if (pool == nullptr) return error_reply(404, "unknown matchday");

    auto p = params;
    p.threads = 1;
    const auto prepared = prepare_pools(pool->candidates, p.filter_mode);
    const auto outcome = sds_search(prepared.pools, p);
    if (!outcome.best)
        return reply(200, json{{"no_bet", {{"reason", "TimedOut"}}}, {"matchday", pool->matchday}});

    const auto& t = outcome.best->totals;
    return reply(200, json{{"matchday", pool->matchday},
                           {"accumulator", to_json(outcome.best->accumulator)},
                           {"totals", to_json(t)},
                           {"kelly_fraction", kelly_fraction(t.prob, t.odds)},
                           {"variance_adjusted", variance_adjusted_stake(t.prob, t.odds)},
                           {"iterations", outcome.iterations}});
}

Response Service::whatif(std::string_view body) const {
    const auto j = parse_body(body);
    const auto acc = parse_legs(j);
    const double bankroll = j.contains("bankroll") ? parse_money(j["bankroll"], "bankroll") : 0.0;
    if (auto v = validate_accumulator(acc); !v.empty())
        return error_reply(422, "infeasible accumulator", json{{"violations", violations_json(v)}});

    const auto t = accumulator_totals(acc);
    std::vector<Leg> legs;
    for (const auto& l : acc.legs()) legs.push_back({l.odds(), l.prob()});
    const auto m = accumulator_moments(legs);
    const double f = kelly_fraction(t.prob, t.odds);
    const double c = variance_adjusted_stake(t.prob, t.odds);
    return reply(200, json{{"accumulator", to_json(acc)},
                           {"totals", to_json(t)},
                           {"kelly_fraction", f},
                           {"variance_adjusted", c},
                           {"kelly_amount", money(f * bankroll)},
                           {"variance_adjusted_amount", money(c * bankroll)},
                           {"moments", {{"expected_return", m.expected_return}, {"variance", m.variance}}}});
}

Response Service::backtest(std::string_view body) const {
    std::vector<json> events;
    auto r = backtest_stream(body, [&](std::string_view line) {
        events.push_back(json::parse(line));
        return true;
    });
    if (r.status != 200) return r;
    json series = json::array();
    json summary;
    for (auto& e : events) {
        if (e["event"] == "matchday") {
            e.erase("event");
            series.push_back(std::move(e));
        } else {
            summary = std::move(e);
        }
    }
    summary.erase("event");
    summary["ledger"] = std::move(series);
    return reply(200, summary);
}

Response Service::backtest_stream(std::string_view body, const std::function<bool(std::string_view)>& sink) const {
    try {
        const auto j = parse_body(body);
        const auto combo = combo_from(j);
        if (!combo) return error_reply(400, "combo must be one of acc-kelly, acc-va, singles-kelly, singles-va");
        auto params = parse_params(j.value("params", json(nullptr)), options_.interactive_max_time);
        params.threads = 1;
        const double bankroll = j.contains("bankroll") ? parse_money(j["bankroll"], "bankroll") : 100.0;
        if (!(bankroll > 0.0)) return error_reply(400, "bankroll must be positive");
        const auto ds = dataset();
        if (!ds || ds->season.pools.empty()) return error_reply(409, "no dataset loaded");

        bool open = true;
        BacktestHooks hooks;
        hooks.on_matchday = [&](const LedgerEntry& e) {
            if (!open) return;
            auto ev = entry_json(e);
            ev["event"] = "matchday";
            open = sink(ev.dump() + "\n");
        };
        const auto ledger = run_season(ds->season.pools, *combo, params, bankroll, hooks);
        auto ev = json{{"event", "summary"}, {"combo", to_string(*combo)}, {"model", model_label(*combo)},
                       {"preprocessing", to_string(params.filter_mode)}, {"summary", summary_json(summarize(ledger))}};
        if (open) sink(ev.dump() + "\n");
        return Response{200, {}, "application/x-ndjson"};
    } catch (const http_error& e) {
        return error_reply(e.status, e.what(), e.detail);
    }
}

Response Service::create_session() {
    auto ledger = std::make_shared<SessionLedger>();
    std::string token = random_token();
    std::lock_guard lock(sessions_mutex_);
    while (sessions_.count(token)) token = random_token();
    sessions_.emplace(token, ledger);
    return reply(200, json{{"token", token}, {"bankroll", money(ledger->bankroll)}, {"staking_base", money(ledger->base)}});
}

Response Service::get_session(const std::string& token) const {
    std::shared_ptr<SessionLedger> s;
    {
        std::lock_guard lock(sessions_mutex_);
        auto it = sessions_.find(token);
        if (it == sessions_.end()) return error_reply(404, "unknown session");
        s = it->second;
    }
    std::lock_guard lock(s->mutex);
    return reply(200, json{{"token", token}, {"bankroll", money(s->bankroll)}, {"staking_base", money(s->base)},
                           {"entries", s->entries}});
}

Response Service::record_wager(const std::string& token, std::string_view body) {
    std::shared_ptr<SessionLedger> s;
    {
        std::lock_guard lock(sessions_mutex_);
        auto it = sessions_.find(token);
        if (it == sessions_.end()) return error_reply(404, "unknown session");
        s = it->second;
    }
    const auto j = parse_body(body);
    const auto acc = parse_legs(j);
    if (auto v = validate_accumulator(acc); !v.empty())
        return error_reply(422, "infeasible accumulator", json{{"violations", violations_json(v)}});
    if (!j.contains("amount")) return error_reply(400, "amount required");
    const double amount = parse_money(j["amount"], "amount");

    const auto ds = dataset();
    if (!ds || ds->season.pools.empty()) return error_reply(409, "no dataset loaded");
    const auto* pool = ds->pool(acc.legs().front().match().matchday);
    if (pool == nullptr) return error_reply(404, "unknown matchday");

    std::lock_guard lock(s->mutex);
    if (amount > s->bankroll) return error_reply(422, "amount exceeds bankroll");
    double net = 0.0;
    try {
        net = settle(acc, pool->results, amount);
    } catch (const domain_error& e) {
        return error_reply(400, e.what());
    }
    s->bankroll += net;
    s->base = std::min(s->base, s->bankroll);
    json entry{{"matchday", pool->matchday},
               {"accumulator", to_json(acc)},
               {"amount", money(amount)},
               {"won", net > 0.0},
               {"net_gain", money(net)},
               {"bankroll", money(s->bankroll)},
               {"staking_base", money(s->base)}};
    s->entries.push_back(entry);
    return reply(200, json{{"entry", entry}, {"bankroll", money(s->bankroll)}, {"staking_base", money(s->base)}});
}

bool Service::serve(const std::string& host, int port) { return impl_->server.listen(host, port); }

int Service::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

}  // namespace acca::service
