#include "acca/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

namespace acca {

void validate(const SolverParams& p) {
    if (!(p.p_min > 0.0 && p.p_min < 1.0)) throw std::invalid_argument("p_min must lie in (0, 1)");
    if (!(p.min_exp >= 0.0) || !std::isfinite(p.min_exp)) throw std::invalid_argument("min_exp must be finite and non-negative");
    if (!(p.max_time > 0.0)) throw std::invalid_argument("max_time must be positive");
    if (p.population < 2) throw std::invalid_argument("population must be at least 2");
    if (p.max_legs && *p.max_legs == 0) throw std::invalid_argument("max_legs must be positive");
    if (p.threads == 0) throw std::invalid_argument("threads must be positive");
}

// ---------------------------------------------------------------------------
// EfficientPool

EfficientPool::EfficientPool(std::vector<CandidateBet> candidates) : bets_(std::move(candidates)) {
    std::sort(bets_.begin(), bets_.end(), leg_less);
    bets_.erase(std::unique(bets_.begin(), bets_.end(), [](const auto& a, const auto& b) { return same_variable(a, b); }),
                bets_.end());
    for (const auto& b : bets_)
        if (b.bookmaker() != bets_.front().bookmaker())
            throw std::invalid_argument("EfficientPool: candidates from more than one bookmaker");

    match_id_.reserve(bets_.size());
    log_odds_.reserve(bets_.size());
    log_prob_.reserve(bets_.size());
    for (std::size_t i = 0; i < bets_.size(); ++i) {
        if (i > 0 && bets_[i].match() != bets_[i - 1].match()) ++match_count_;
        match_id_.push_back(static_cast<std::uint32_t>(match_count_));
        log_odds_.push_back(std::log(bets_[i].odds()));
        log_prob_.push_back(std::log(bets_[i].prob()));
    }
    if (!bets_.empty()) ++match_count_;
}

std::optional<std::size_t> EfficientPool::index_of(const CandidateBet& bet) const {
    auto it = std::lower_bound(bets_.begin(), bets_.end(), bet, leg_less);
    if (it == bets_.end() || !same_variable(*it, bet)) return std::nullopt;
    return static_cast<std::size_t>(it - bets_.begin());
}

AccumulatorTotals evaluate(const EfficientPool& pool, const Hypothesis& h) {
    double lo = 0.0;
    double lp = 0.0;
    for (auto i : h) {
        lo += pool.log_odds(i);
        lp += pool.log_prob(i);
    }
    return totals_from_logs(lo, lp);
}

Accumulator to_accumulator(const EfficientPool& pool, const Hypothesis& h) {
    std::vector<CandidateBet> legs;
    legs.reserve(h.size());
    for (auto i : h) legs.push_back(pool[i]);
    return Accumulator(std::move(legs));
}

std::optional<Hypothesis> to_hypothesis(const EfficientPool& pool, const Accumulator& acc) {
    Hypothesis h;
    for (const auto& leg : acc.legs()) {
        auto i = pool.index_of(leg);
        if (!i) return std::nullopt;
        h.push_back(static_cast<std::uint32_t>(*i));
    }
    std::sort(h.begin(), h.end());
    return h;
}

bool is_feasible(const EfficientPool& pool, const Hypothesis& h) {
    if (h.empty()) return false;
    for (std::size_t i = 0; i + 1 < h.size(); ++i)
        if (h[i] >= h[i + 1] || pool.match_id(h[i]) == pool.match_id(h[i + 1])) return false;
    return h.back() < pool.size();
}

std::string_view to_string(AgentStatus s) noexcept {
    switch (s) {
    case AgentStatus::Active: return "active";
    case AgentStatus::Inactive: return "inactive";
    case AgentStatus::Inefficient: return "inefficient";
    }
    return "unknown";
}

Agent make_agent(const EfficientPool& pool, Hypothesis legs) {
    Agent a;
    a.totals = evaluate(pool, legs);
    a.legs = std::move(legs);
    return a;
}

// ---------------------------------------------------------------------------
// Initialization

Hypothesis relaxed_initialization(const EfficientPool& pool, double prob_floor, Rng& rng,
                                  std::optional<std::size_t> max_legs) {
    if (pool.empty()) throw std::invalid_argument("relaxed_initialization: empty pool");

    // Random permutation first, then a stable sort: equal ratios end up in
    // random relative order.
    std::vector<std::uint32_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0u);
    std::shuffle(order.begin(), order.end(), rng);
    auto ratio = [&](std::uint32_t i) { return pool.log_odds(i) / -pool.log_prob(i); };
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ratio(a) > ratio(b); });

    double budget = -std::log(prob_floor);
    std::vector<std::uint32_t> picked;  // greedy order
    for (auto i : order) {
        const double w = -pool.log_prob(i);
        if (w <= budget) {
            picked.push_back(i);
            budget -= w;
            continue;
        }
        // The first item that does not fit is the only fractional one.
        if (budget / w >= 0.5) picked.push_back(i);
        break;
    }

    // Same-match conflicts: keep the most probable outcome.
    std::vector<std::uint32_t> resolved;
    for (auto i : picked) {
        auto clash = std::find_if(resolved.begin(), resolved.end(),
                                  [&](auto j) { return pool.match_id(j) == pool.match_id(i); });
        if (clash == resolved.end())
            resolved.push_back(i);
        else if (pool[i].prob() > pool[*clash].prob())
            *clash = i;
    }
    if (max_legs && resolved.size() > *max_legs) resolved.resize(*max_legs);

    // Rounding up may break the floor: drop the worst-ratio legs (greedy
    // order is best first) until it holds again.
    auto log_prob = [&] {
        double lp = 0.0;
        for (auto i : resolved) lp += pool.log_prob(i);
        return lp;
    };
    while (resolved.size() > 1 && log_prob() < std::log(prob_floor)) resolved.pop_back();
    if (!resolved.empty() && log_prob() < std::log(prob_floor)) resolved.clear();

    if (resolved.empty()) {
        // best single leg above the floor, else the most probable one
        std::optional<std::uint32_t> best;
        for (std::uint32_t i = 0; i < pool.size(); ++i)
            if (pool[i].prob() >= prob_floor && (!best || pool[i].exp() > pool[*best].exp())) best = i;
        if (!best) {
            best = 0;
            for (std::uint32_t i = 1; i < pool.size(); ++i)
                if (pool[i].prob() > pool[*best].prob()) best = i;
        }
        resolved.push_back(*best);
    }
    std::sort(resolved.begin(), resolved.end());
    return resolved;
}

Accumulator relaxed_initialization(const std::vector<CandidateBet>& candidates, double prob_floor, Rng& rng) {
    EfficientPool pool(candidates);
    return to_accumulator(pool, relaxed_initialization(pool, prob_floor, rng));
}

// ---------------------------------------------------------------------------
// Test and diffusion phases

AgentStatus classify(const AccumulatorTotals& self, const AccumulatorTotals& peer) noexcept {
    const bool weakly = self.odds <= peer.odds && self.prob <= peer.prob;
    const bool strict = self.odds < peer.odds || self.prob < peer.prob;
    if (weakly && strict) return AgentStatus::Inefficient;
    if (self.exp < peer.exp) return AgentStatus::Inactive;
    return AgentStatus::Active;
}

namespace {

std::size_t draw_other(std::size_t self, std::size_t n, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 2);
    std::size_t j = pick(rng);
    return j >= self ? j + 1 : j;
}

}  // namespace

void test_phase(std::vector<Agent>& population, Rng& rng) {
    const std::size_t n = population.size();
    if (n < 2) throw std::invalid_argument("test_phase: population must have at least two agents");
    std::vector<AccumulatorTotals> snapshot(n);
    for (std::size_t i = 0; i < n; ++i) snapshot[i] = population[i].totals;
    for (std::size_t i = 0; i < n; ++i) population[i].status = classify(snapshot[i], snapshot[draw_other(i, n, rng)]);
}

Hypothesis random_hypothesis(const EfficientPool& pool, Rng& rng, std::size_t legs) {
    const std::size_t k = std::min(legs, pool.match_count());
    if (k == 0) return {};
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(pool.size() - 1));

    // Rejection sampling is exactly uniform over distinct-match k-subsets.
    Hypothesis h;
    for (int attempt = 0; attempt < 256; ++attempt) {
        h.clear();
        bool ok = true;
        while (h.size() < k && ok) {
            const auto c = pick(rng);
            for (auto x : h)
                if (x == c || pool.match_id(x) == pool.match_id(c)) ok = false;
            h.push_back(c);
        }
        if (ok) {
            std::sort(h.begin(), h.end());
            return h;
        }
    }

    // Very uneven pools: pick k matches, then one candidate per match.
    std::vector<std::vector<std::uint32_t>> by_match(pool.match_count());
    for (std::uint32_t i = 0; i < pool.size(); ++i) by_match[pool.match_id(i)].push_back(i);
    std::vector<std::uint32_t> matches(pool.match_count());
    std::iota(matches.begin(), matches.end(), 0u);
    std::shuffle(matches.begin(), matches.end(), rng);
    h.clear();
    for (std::size_t m = 0; m < k; ++m) {
        const auto& opts = by_match[matches[m]];
        std::uniform_int_distribution<std::size_t> o(0, opts.size() - 1);
        h.push_back(opts[o(rng)]);
    }
    std::sort(h.begin(), h.end());
    return h;
}

Hypothesis neighborhood_move(const Hypothesis& h, const EfficientPool& pool, Rng& rng) {
    if (h.empty()) return h;
    std::uniform_int_distribution<std::size_t> leg_pick(0, h.size() - 1);
    const std::size_t drop = leg_pick(rng);

    std::vector<std::uint32_t> eligible;
    for (std::uint32_t c = 0; c < pool.size(); ++c) {
        bool ok = true;
        for (std::size_t k = 0; k < h.size() && ok; ++k) {
            if (h[k] == c) ok = false;
            else if (k != drop && pool.match_id(h[k]) == pool.match_id(c)) ok = false;
        }
        if (ok) eligible.push_back(c);
    }
    if (eligible.empty()) return h;

    std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
    Hypothesis out = h;
    out[drop] = eligible[pick(rng)];
    std::sort(out.begin(), out.end());
    return out;
}

Accumulator neighborhood_move(const Accumulator& acc, const std::vector<CandidateBet>& candidates, Rng& rng) {
    EfficientPool pool(candidates);
    auto h = to_hypothesis(pool, acc);
    if (!h) throw std::invalid_argument("neighborhood_move: accumulator legs are not pool members");
    return to_accumulator(pool, neighborhood_move(*h, pool, rng));
}

void diffusion_phase(std::vector<Agent>& population, const EfficientPool& pool, Rng& rng, std::size_t reinit_legs) {
    const std::size_t n = population.size();
    if (n < 2) throw std::invalid_argument("diffusion_phase: population must have at least two agents");
    // Only Active agents are ever copied and they are left untouched, so the
    // in-place update is equivalent to updating from a snapshot.
    for (std::size_t i = 0; i < n; ++i) {
        auto& agent = population[i];
        if (agent.status == AgentStatus::Active) continue;
        Hypothesis next;
        if (agent.status == AgentStatus::Inefficient) {
            next = random_hypothesis(pool, rng, reinit_legs);
        } else {
            const auto& peer = population[draw_other(i, n, rng)];
            next = peer.status == AgentStatus::Active ? neighborhood_move(peer.legs, pool, rng)
                                                      : random_hypothesis(pool, rng, reinit_legs);
        }
        agent.totals = evaluate(pool, next);
        agent.legs = std::move(next);
    }
}

std::string_view to_string(StopReason r) noexcept {
    return r == StopReason::MetThreshold ? "met-threshold" : "timed-out";
}

// ---------------------------------------------------------------------------
// Search driver

namespace {

struct Population {
    BookmakerRef book;
    EfficientPool pool;
    std::vector<Agent> agents;
    Rng rng;
    std::optional<Hypothesis> best;  // eligible incumbent
    AccumulatorTotals best_totals;
};

void update_incumbent(Population& pop, const SolverParams& params);

Rng population_rng(std::uint64_t seed, std::size_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), 0x5d5u};
    return Rng(seq);
}

void initialize(Population& pop, const SolverParams& params) {
    // Agent 0 solves the relaxation at p_min itself; the others draw a
    // tighter probability floor in [p_min, 1) so initial accumulators differ
    // in size.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    pop.agents.clear();
    pop.agents.reserve(params.population);
    for (std::size_t i = 0; i < params.population; ++i) {
        const double floor = i == 0 ? params.p_min : std::pow(params.p_min, 1.0 - u(pop.rng));
        pop.agents.push_back(make_agent(pop.pool, relaxed_initialization(pop.pool, floor, pop.rng, params.max_legs)));
    }
    update_incumbent(pop, params);
}

bool eligible(const Agent& a, const SolverParams& params) {
    if (a.totals.prob < params.p_min) return false;
    if (params.max_legs && a.legs.size() > *params.max_legs) return false;
    return true;
}

void update_incumbent(Population& pop, const SolverParams& params) {
    for (const auto& a : pop.agents) {
        if (!eligible(a, params)) continue;
        if (!pop.best || a.totals.exp > pop.best_totals.exp) {
            pop.best = a.legs;
            pop.best_totals = a.totals;
        }
    }
}

void step(Population& pop, const SolverParams& params) {
    const std::size_t reinit = params.max_legs ? std::min<std::size_t>(3, *params.max_legs) : 3;
    test_phase(pop.agents, pop.rng);
    diffusion_phase(pop.agents, pop.pool, pop.rng, reinit);
    update_incumbent(pop, params);
}

void report(const Population& pop, std::uint64_t iteration, const SearchHooks& hooks) {
    if (hooks.observe) hooks.observe(pop.pool, pop.agents);
    if (hooks.trace) {
        std::size_t active = 0;
        for (const auto& a : pop.agents) active += a.status == AgentStatus::Active;
        hooks.trace({iteration, pop.book, pop.best ? pop.best_totals.exp : std::numeric_limits<double>::quiet_NaN(),
                     static_cast<double>(active) / static_cast<double>(pop.agents.size())});
    }
}

// Best eligible incumbent over all populations; earlier bookmaker wins ties.
const Population* leader(const std::vector<Population>& pops) {
    const Population* best = nullptr;
    for (const auto& p : pops)
        if (p.best && (best == nullptr || p.best_totals.exp > best->best_totals.exp)) best = &p;
    return best;
}

Incumbent incumbent_of(const Population& p) {
    return Incumbent{to_accumulator(p.pool, *p.best), p.best_totals};
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

SearchOutcome run_sequential(std::vector<Population>& pops, const SolverParams& params, const SearchHooks& hooks,
                             Clock::time_point t0) {
    SearchOutcome out;
    for (auto& p : pops) {
        initialize(p, params);
        report(p, 0, hooks);
    }
    while (true) {
        ++out.iterations;
        for (auto& p : pops) {
            step(p, params);
            report(p, out.iterations, hooks);
            if (p.best && p.best_totals.exp >= params.min_exp) {
                out.reason = StopReason::MetThreshold;
                out.best = incumbent_of(*leader(pops));
                out.best_seen = out.best;
                out.elapsed = seconds_since(t0);
                return out;
            }
        }
        if (seconds_since(t0) >= params.max_time) break;
        if (params.max_iterations && out.iterations >= *params.max_iterations) break;
    }
    if (const auto* l = leader(pops)) out.best_seen = incumbent_of(*l);
    out.elapsed = seconds_since(t0);
    return out;
}

SearchOutcome run_threaded(std::vector<Population>& pops, const SolverParams& params, const SearchHooks& hooks,
                           Clock::time_point t0) {
    std::atomic<bool> stop{false};
    std::atomic<std::uint64_t> max_iter{0};
    std::mutex hook_mutex;

    auto worker = [&](Population& p) {
        initialize(p, params);
        {
            std::lock_guard lock(hook_mutex);
            report(p, 0, hooks);
        }
        std::uint64_t it = 0;
        while (!stop.load(std::memory_order_relaxed)) {
            ++it;
            step(p, params);
            {
                std::lock_guard lock(hook_mutex);
                report(p, it, hooks);
            }
            if (p.best && p.best_totals.exp >= params.min_exp) stop = true;
            if (seconds_since(t0) >= params.max_time) break;
            if (params.max_iterations && it >= *params.max_iterations) break;
        }
        std::uint64_t seen = max_iter.load();
        while (seen < it && !max_iter.compare_exchange_weak(seen, it)) {
        }
    };

    const std::size_t width = std::min<std::size_t>(params.threads, pops.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < width; ++t)
        threads.emplace_back([&] {
            for (std::size_t i = next++; i < pops.size(); i = next++) worker(pops[i]);
        });
    for (auto& t : threads) t.join();

    SearchOutcome out;
    out.iterations = max_iter.load();
    if (const auto* l = leader(pops)) {
        out.best_seen = incumbent_of(*l);
        if (l->best_totals.exp >= params.min_exp) {
            out.reason = StopReason::MetThreshold;
            out.best = out.best_seen;
        }
    }
    out.elapsed = seconds_since(t0);
    return out;
}

}  // namespace

SearchOutcome sds_search(const BookmakerPools& pools, const SolverParams& params, const SearchHooks& hooks) {
    validate(params);
    const auto t0 = Clock::now();

    std::vector<Population> pops;
    std::size_t index = 0;
    for (const auto& [book, candidates] : pools) {
        if (candidates.empty()) continue;
        Population p{book, EfficientPool(candidates), {}, population_rng(params.seed, index++), std::nullopt, {}};
        pops.push_back(std::move(p));
    }
    if (pops.empty()) return SearchOutcome{};

    if (params.threads > 1 && pops.size() > 1) return run_threaded(pops, params, hooks, t0);
    return run_sequential(pops, params, hooks, t0);
}

}  // namespace acca
