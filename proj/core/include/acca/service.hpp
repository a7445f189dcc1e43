#pragma once

#include "acca/backtest.hpp"
#include "acca/ingest.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace acca::service {

struct Response {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

struct Dataset {
    std::vector<std::filesystem::path> files;
    Season season;

    const MatchdayPool* pool(int matchday) const;
};

struct Options {
    /// Upper bound applied to solver budgets on interactive calls.
    double interactive_max_time = 30.0;
};

/// Request handling for the JSON API. Every handler is callable without a
/// socket; `serve` mounts them on an HTTP server.
///
///   GET  /matchdays                      matchday summaries
///   GET  /matchdays/{n}/candidates       candidate scatter with kept flags (?filter=)
///   POST /load                           {paths, probabilities?}
///   POST /recommend                      {matchday, params}
///   POST /whatif                         {legs, bankroll}
///   POST /backtest                       {combo, params, bankroll, stream?}
///   POST /sessions                       new session token
///   GET  /sessions/{token}               session ledger
///   POST /sessions/{token}/wagers        {matchday, legs, amount}
///
/// Money values travel as decimal strings; odds and probabilities as numbers.
class Service {
public:
    explicit Service(Options options = {});

    void set_dataset(std::shared_ptr<const Dataset> dataset);
    std::shared_ptr<const Dataset> dataset() const;
    /// Parses and installs a dataset; throws parse_error on failure.
    void load(const std::vector<std::filesystem::path>& files, const std::filesystem::path& probabilities = {});

    Response handle(std::string_view method, std::string_view path, std::string_view body = {},
                    const std::map<std::string, std::string>& query = {});

    /// Streams a backtest as newline-delimited JSON: one "matchday" event per
    /// matchday, then a "summary" event. Returns a non-200 response without
    /// calling `sink` when the request is invalid.
    Response backtest_stream(std::string_view body, const std::function<bool(std::string_view)>& sink) const;

    /// Blocks serving HTTP on host:port until stop() is called.
    bool serve(const std::string& host, int port);
    /// Binds to an ephemeral port and returns it; then call listen_after_bind().
    int bind_any_port(const std::string& host);
    bool listen_after_bind();
    void stop();

    ~Service();

private:
    struct SessionLedger;
    struct Impl;

    Response matchdays() const;
    Response candidates(int matchday, const std::map<std::string, std::string>& query) const;
    Response load_request(std::string_view body);
    Response recommend(std::string_view body) const;
    Response whatif(std::string_view body) const;
    Response backtest(std::string_view body) const;
    Response create_session();
    Response get_session(const std::string& token) const;
    Response record_wager(const std::string& token, std::string_view body);

    Options options_;
    mutable std::mutex dataset_mutex_;
    std::shared_ptr<const Dataset> dataset_;
    mutable std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<SessionLedger>> sessions_;
    std::unique_ptr<Impl> impl_;
};

/// Fixed two-decimal representation used for money on the wire.
std::string money(double value);

}  // namespace acca::service
