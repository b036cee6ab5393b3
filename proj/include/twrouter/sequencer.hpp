#ifndef TWROUTER_SEQUENCER_HPP_
#define TWROUTER_SEQUENCER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "instance.hpp"
#include "rng.hpp"
#include "schedule.hpp"

namespace twrouter {

    class SizeLimitError : public std::invalid_argument {
    public:
        using std::invalid_argument::invalid_argument;
    };

    struct SequenceResult {
        Route route;
        double cost = 0.0;
    };

    inline constexpr std::size_t held_karp_limit = 16;

    // Exact single-route sequencing by label-correcting DP over (visited set, last customer). Each state
    // keeps the Pareto front of (distance, departure time) labels. With `respect_windows` false the time
    // dimension is dropped and the result is the plain distance optimum.
    // Returns nullopt when no visiting order is time-feasible.
    inline std::optional<SequenceResult> held_karp_tsptw(const Instance& instance, std::span<const NodeId> customers,
                                                         bool respect_windows = true) {
        const std::size_t k = customers.size();
        if (k > held_karp_limit) {
            throw SizeLimitError("exact sequencing supports at most " + std::to_string(held_karp_limit) +
                                 " customers, got " + std::to_string(k));
        }
        validate_route(customers, instance);
        if (k == 0) {
            return SequenceResult{};
        }

        struct Label {
            double cost;
            double time;
            std::uint32_t parent;  // index into arena, npos for the first stop
            std::uint8_t last;
        };
        constexpr std::uint32_t npos = std::numeric_limits<std::uint32_t>::max();

        std::vector<Label> arena;
        const std::size_t states = (std::size_t{1} << k) * k;
        std::vector<std::vector<std::uint32_t>> fronts(states);
        const auto state = [k](std::size_t mask, std::size_t last) { return mask * k + last; };

        const auto insert = [&](std::size_t st, const Label& label) {
            auto& front = fronts[st];
            for (const std::uint32_t idx : front) {
                if (arena[idx].cost <= label.cost && arena[idx].time <= label.time) {
                    return;
                }
            }
            std::erase_if(front, [&](std::uint32_t idx) {
                return label.cost <= arena[idx].cost && label.time <= arena[idx].time;
            });
            front.push_back(static_cast<std::uint32_t>(arena.size()));
            arena.push_back(label);
        };

        const Node& depot = instance.depot();
        for (std::size_t j = 0; j < k; ++j) {
            const Node& n = instance.node(customers[j]);
            const double travel = instance.cost(depot_id, customers[j]);
            const double arrival = 0.0 + travel;
            if (respect_windows && arrival > n.due_time) {
                continue;
            }
            const double time = respect_windows ? std::max(arrival, n.ready_time) + n.service_time : 0.0;
            insert(state(std::size_t{1} << j, j), {0.0 + travel, time, npos, static_cast<std::uint8_t>(j)});
        }

        const std::size_t full = (std::size_t{1} << k) - 1;
        for (std::size_t mask = 1; mask < full; ++mask) {
            for (std::size_t last = 0; last < k; ++last) {
                if ((mask & (std::size_t{1} << last)) == 0) {
                    continue;
                }
                const auto& front = fronts[state(mask, last)];
                for (const std::uint32_t idx : front) {
                    for (std::size_t j = 0; j < k; ++j) {
                        if ((mask & (std::size_t{1} << j)) != 0) {
                            continue;
                        }
                        const Label from = arena[idx];
                        const Node& n = instance.node(customers[j]);
                        const double travel = instance.cost(customers[last], customers[j]);
                        const double arrival = from.time + travel;
                        if (respect_windows && arrival > n.due_time) {
                            continue;
                        }
                        const double time = respect_windows ? std::max(arrival, n.ready_time) + n.service_time : 0.0;
                        insert(state(mask | (std::size_t{1} << j), j),
                               {from.cost + travel, time, idx, static_cast<std::uint8_t>(j)});
                    }
                }
            }
        }

        std::uint32_t best = npos;
        double best_cost = std::numeric_limits<double>::infinity();
        for (std::size_t last = 0; last < k; ++last) {
            for (const std::uint32_t idx : fronts[state(full, last)]) {
                const Label& l = arena[idx];
                const double back = instance.cost(customers[last], depot_id);
                if (respect_windows && l.time + back > depot.due_time) {
                    continue;
                }
                const double total = l.cost + back;
                if (total < best_cost) {
                    best_cost = total;
                    best = idx;
                }
            }
        }
        if (best == npos) {
            return std::nullopt;
        }
        SequenceResult result;
        result.cost = best_cost;
        for (std::uint32_t idx = best; idx != npos; idx = arena[idx].parent) {
            result.route.push_back(customers[arena[idx].last]);
        }
        std::reverse(result.route.begin(), result.route.end());
        return result;
    }

    struct AnnealParams {
        double initial_temperature = 1.0;
        double cooling_rate = 0.995;
        int sweeps = 2000;
        int moves_per_sweep = 1;
        double violation_penalty = 0.0;
        std::uint64_t seed = 0;

        // Temperature and penalty scale with the mean off-diagonal distance among depot + customers.
        static AnnealParams defaults(const Instance& instance, std::span<const NodeId> customers, std::uint64_t seed = 0) {
            const std::size_t n = customers.size();
            std::vector<NodeId> nodes{depot_id};
            nodes.insert(nodes.end(), customers.begin(), customers.end());
            double sum = 0.0;
            std::size_t pairs = 0;
            for (const NodeId a : nodes) {
                for (const NodeId b : nodes) {
                    if (a != b) {
                        sum += instance.cost(a, b);
                        ++pairs;
                    }
                }
            }
            const double mean = pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
            AnnealParams p;
            p.initial_temperature = std::max(mean * static_cast<double>(n), 1e-9);
            p.cooling_rate = 0.995;
            p.sweeps = 2000;
            p.moves_per_sweep = static_cast<int>(std::max<std::size_t>(n * n, 1));
            p.violation_penalty = mean * static_cast<double>(n);
            p.seed = seed;
            return p;
        }

        void validate() const {
            if (!(cooling_rate > 0.0 && cooling_rate < 1.0)) {
                throw std::invalid_argument("cooling_rate must lie in (0,1)");
            }
            if (sweeps < 1 || moves_per_sweep < 1) {
                throw std::invalid_argument("sweeps and moves_per_sweep must be positive");
            }
            if (violation_penalty < 0.0 || initial_temperature <= 0.0) {
                throw std::invalid_argument("temperature must be positive and penalty non-negative");
            }
        }
    };

    // Simulated annealing over permutations with swap and segment-reversal moves, minimizing
    // route_cost + penalty * violations. Deterministic for a given seed.
    inline Route anneal_sequence(const Instance& instance, std::span<const NodeId> customers, std::span<const NodeId> initial,
                                 const AnnealParams& params) {
        params.validate();
        if (initial.size() != customers.size() || !std::is_permutation(initial.begin(), initial.end(), customers.begin())) {
            throw std::invalid_argument("initial route is not a permutation of the customers");
        }
        validate_route(initial, instance);
        Route current(initial.begin(), initial.end());
        const std::size_t n = current.size();
        if (n < 2) {
            return current;
        }
        const auto objective = [&](const Route& r) {
            const RouteEval e = evaluate_route(r, instance);
            return e.cost + params.violation_penalty * static_cast<double>(e.violations);
        };

        Rng rng(params.seed);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::uniform_int_distribution<int> kind(0, 1);
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        double current_value = objective(current);
        Route best = current;
        double best_value = current_value;
        double temperature = params.initial_temperature;

        for (int sweep = 0; sweep < params.sweeps; ++sweep) {
            for (int m = 0; m < params.moves_per_sweep; ++m) {
                std::size_t i = pick(rng);
                std::size_t j = pick(rng);
                while (j == i) {
                    j = pick(rng);
                }
                if (i > j) {
                    std::swap(i, j);
                }
                const bool reverse = kind(rng) == 1;
                const auto apply = [&] {
                    if (reverse) {
                        std::reverse(current.begin() + static_cast<std::ptrdiff_t>(i),
                                     current.begin() + static_cast<std::ptrdiff_t>(j) + 1);
                    } else {
                        std::swap(current[i], current[j]);
                    }
                };
                apply();
                const double candidate = objective(current);
                const double delta = candidate - current_value;
                if (delta <= 0.0 || unit(rng) < std::exp(-delta / temperature)) {
                    current_value = candidate;
                    if (candidate < best_value) {
                        best_value = candidate;
                        best = current;
                    }
                } else {
                    apply();
                }
            }
            temperature *= params.cooling_rate;
        }
        return best;
    }

    enum class RepairOutcome { already_feasible, fixed_by_simple, fixed_by_2opt, fixed_by_3opt, unfixable, not_attempted };

    inline const char* to_string(RepairOutcome o) {
        switch (o) {
            case RepairOutcome::already_feasible:
                return "already_feasible";
            case RepairOutcome::fixed_by_simple:
                return "fixed_by_simple";
            case RepairOutcome::fixed_by_2opt:
                return "fixed_by_2opt";
            case RepairOutcome::fixed_by_3opt:
                return "fixed_by_3opt";
            case RepairOutcome::unfixable:
                return "unfixable";
            case RepairOutcome::not_attempted:
                return "not_attempted";
        }
        return "unknown";
    }

    struct RepairResult {
        Route route;
        RepairOutcome outcome = RepairOutcome::already_feasible;
        // Violation count after each accepted move, one list per stage that ran.
        std::vector<std::vector<int>> stage_traces;
    };

    namespace detail {

        struct Candidate {
            int violations;
            double cost;

            bool better_than(const Candidate& o) const {
                return violations < o.violations || (violations == o.violations && cost < o.cost);
            }
        };

        // Writes the reconnection `variant` of the three-edge cut (p, q, r) of depot-framed `full` into `out`.
        // Segments: A = full[0..p], B = full[p+1..q], C = full[q+1..r], D = full[r+1..].
        inline void three_opt_variant(const std::vector<NodeId>& full, std::size_t p, std::size_t q, std::size_t r,
                                      int variant, Route& out) {
            out.clear();
            const auto b_first = full.begin() + static_cast<std::ptrdiff_t>(p + 1);
            const auto b_last = full.begin() + static_cast<std::ptrdiff_t>(q + 1);
            const auto c_last = full.begin() + static_cast<std::ptrdiff_t>(r + 1);
            const auto fwd = [&](auto first, auto last) { out.insert(out.end(), first, last); };
            const auto rev = [&](auto first, auto last) {
                out.insert(out.end(), std::make_reverse_iterator(last), std::make_reverse_iterator(first));
            };
            out.insert(out.end(), full.begin() + 1, b_first);
            switch (variant) {
                case 0:  // A B' C
                    rev(b_first, b_last);
                    fwd(b_last, c_last);
                    break;
                case 1:  // A B C'
                    fwd(b_first, b_last);
                    rev(b_last, c_last);
                    break;
                case 2:  // A B' C'
                    rev(b_first, b_last);
                    rev(b_last, c_last);
                    break;
                case 3:  // A C B
                    fwd(b_last, c_last);
                    fwd(b_first, b_last);
                    break;
                case 4:  // A C B'
                    fwd(b_last, c_last);
                    rev(b_first, b_last);
                    break;
                case 5:  // A C' B
                    rev(b_last, c_last);
                    fwd(b_first, b_last);
                    break;
                default:  // A C' B'
                    rev(b_last, c_last);
                    rev(b_first, b_last);
                    break;
            }
            out.insert(out.end(), c_last, full.end() - 1);
        }

        enum class Neighborhood { swap, two_opt, three_opt };

        // Best-improvement descent on (violations, cost); a move is accepted only if it strictly lowers the
        // violation count. Ties go to the lowest-index move.
        inline Route repair_stage(Route route, const Instance& instance, Neighborhood hood, std::vector<int>& trace) {
            const std::size_t m = route.size();
            RouteEval current = evaluate_route(route, instance);
            Route scratch;
            Route best_route;
            while (current.violations > 0) {
                std::optional<Candidate> best;
                const auto consider = [&](const Route& cand) {
                    const RouteEval e = evaluate_route(cand, instance);
                    const Candidate c{e.violations, e.cost};
                    if (!best || c.better_than(*best)) {
                        best = c;
                        best_route = cand;
                    }
                };
                switch (hood) {
                    case Neighborhood::swap:
                        for (std::size_t i = 0; i + 1 < m; ++i) {
                            for (std::size_t j = i + 1; j < m; ++j) {
                                scratch = route;
                                std::swap(scratch[i], scratch[j]);
                                consider(scratch);
                            }
                        }
                        break;
                    case Neighborhood::two_opt:
                        for (std::size_t i = 0; i + 1 < m; ++i) {
                            for (std::size_t j = i + 1; j < m; ++j) {
                                scratch = route;
                                std::reverse(scratch.begin() + static_cast<std::ptrdiff_t>(i),
                                             scratch.begin() + static_cast<std::ptrdiff_t>(j) + 1);
                                consider(scratch);
                            }
                        }
                        break;
                    case Neighborhood::three_opt: {
                        std::vector<NodeId> full;
                        full.reserve(m + 2);
                        full.push_back(depot_id);
                        full.insert(full.end(), route.begin(), route.end());
                        full.push_back(depot_id);
                        for (std::size_t p = 0; p <= m; ++p) {
                            for (std::size_t q = p + 1; q <= m; ++q) {
                                for (std::size_t r = q + 1; r <= m; ++r) {
                                    for (int variant = 0; variant < 7; ++variant) {
                                        three_opt_variant(full, p, q, r, variant, scratch);
                                        consider(scratch);
                                    }
                                }
                            }
                        }
                        break;
                    }
                }
                if (!best || best->violations >= current.violations) {
                    break;
                }
                route = best_route;
                current = RouteEval{best->cost, best->violations};
                trace.push_back(current.violations);
            }
            return route;
        }

    }  // namespace detail

    // Escalating feasibility repair: simple swap, then 2-opt, then 3-opt. Each stage starts from the input
    // route. Returns the first route reaching zero violations, or the input unchanged when every stage fails.
    inline RepairResult fix_route(std::span<const NodeId> route, const Instance& instance) {
        validate_route(route, instance);
        RepairResult result;
        result.route.assign(route.begin(), route.end());
        if (is_time_feasible(route, instance)) {
            result.outcome = RepairOutcome::already_feasible;
            return result;
        }
        constexpr std::pair<detail::Neighborhood, RepairOutcome> stages[] = {
            {detail::Neighborhood::swap, RepairOutcome::fixed_by_simple},
            {detail::Neighborhood::two_opt, RepairOutcome::fixed_by_2opt},
            {detail::Neighborhood::three_opt, RepairOutcome::fixed_by_3opt},
        };
        for (const auto& [hood, outcome] : stages) {
            auto& trace = result.stage_traces.emplace_back();
            Route repaired = detail::repair_stage(result.route, instance, hood, trace);
            if (is_time_feasible(repaired, instance)) {
                result.route = std::move(repaired);
                result.outcome = outcome;
                return result;
            }
        }
        result.outcome = RepairOutcome::unfixable;
        return result;
    }

    struct SolveBudget {
        std::uint64_t seed = 0;
    };

    // Produces a visiting order for one route. Output is always a permutation of `customers`;
    // time feasibility is not guaranteed.
    class SequencerBackend {
    public:
        virtual ~SequencerBackend() = default;

        virtual Route solve(const Instance& instance, std::span<const NodeId> customers, std::span<const NodeId> initial,
                            const SolveBudget& budget) const = 0;

        virtual std::string name() const = 0;

        // Largest route this backend accepts.
        virtual std::size_t max_customers() const {
            return std::numeric_limits<std::size_t>::max();
        }
    };

    // Held-Karp optimum; when no order is time-feasible, falls back to the distance-only optimum.
    class ExactBackend final : public SequencerBackend {
    public:
        Route solve(const Instance& instance, std::span<const NodeId> customers, std::span<const NodeId>,
                    const SolveBudget&) const override {
            if (auto best = held_karp_tsptw(instance, customers, true)) {
                return std::move(best->route);
            }
            return held_karp_tsptw(instance, customers, false)->route;
        }

        std::string name() const override {
            return "exact";
        }

        std::size_t max_customers() const override {
            return held_karp_limit;
        }
    };

    // Unset fields take AnnealParams::defaults for the route being solved.
    struct AnnealOverrides {
        std::optional<double> initial_temperature;
        std::optional<double> cooling_rate;
        std::optional<int> sweeps;
        std::optional<int> moves_per_sweep;
        std::optional<double> violation_penalty;
    };

    class AnnealBackend final : public SequencerBackend {
    public:
        AnnealBackend() = default;

        explicit AnnealBackend(AnnealOverrides overrides) : overrides_(overrides) {}

        AnnealParams params_for(const Instance& instance, std::span<const NodeId> customers, std::uint64_t seed) const {
            AnnealParams p = AnnealParams::defaults(instance, customers, seed);
            if (overrides_.initial_temperature) p.initial_temperature = *overrides_.initial_temperature;
            if (overrides_.cooling_rate) p.cooling_rate = *overrides_.cooling_rate;
            if (overrides_.sweeps) p.sweeps = *overrides_.sweeps;
            if (overrides_.moves_per_sweep) p.moves_per_sweep = *overrides_.moves_per_sweep;
            if (overrides_.violation_penalty) p.violation_penalty = *overrides_.violation_penalty;
            return p;
        }

        Route solve(const Instance& instance, std::span<const NodeId> customers, std::span<const NodeId> initial,
                    const SolveBudget& budget) const override {
            return anneal_sequence(instance, customers, initial, params_for(instance, customers, budget.seed));
        }

        std::string name() const override {
            return "anneal";
        }

    private:
        AnnealOverrides overrides_;
    };

    enum class CacheKeyMode { sorted, ordered };

    struct CachedRoute {
        Route route;
        double cost = 0.0;
        bool feasible = false;
    };

    // Best sequencing result per customer set. Concurrent readers, exclusive writers; when two writers race on
    // one key the feasible, then cheaper, entry wins.
    class RouteCache {
    public:
        explicit RouteCache(CacheKeyMode mode = CacheKeyMode::sorted) : mode_(mode) {}

        CacheKeyMode mode() const noexcept {
            return mode_;
        }

        std::vector<NodeId> key_of(std::span<const NodeId> route) const {
            std::vector<NodeId> key(route.begin(), route.end());
            if (mode_ == CacheKeyMode::sorted) {
                std::sort(key.begin(), key.end());
            }
            return key;
        }

        std::optional<CachedRoute> lookup(std::span<const NodeId> route) const {
            const auto key = key_of(route);
            std::shared_lock lock(mutex_);
            const auto it = entries_.find(key);
            if (it == entries_.end()) {
                return std::nullopt;
            }
            return it->second;
        }

        // Stores `entry` under the key of `route` unless the existing entry beats it. Returns the stored entry.
        CachedRoute offer(std::span<const NodeId> route, CachedRoute entry) {
            auto key = key_of(route);
            std::unique_lock lock(mutex_);
            auto [it, inserted] = entries_.try_emplace(std::move(key), entry);
            if (!inserted) {
                const CachedRoute& old = it->second;
                const bool wins = (entry.feasible && !old.feasible) || (entry.feasible == old.feasible && entry.cost < old.cost);
                if (wins) {
                    it->second = std::move(entry);
                }
            }
            return it->second;
        }

        std::size_t size() const {
            std::shared_lock lock(mutex_);
            return entries_.size();
        }

    private:
        CacheKeyMode mode_;
        mutable std::shared_mutex mutex_;
        std::map<std::vector<NodeId>, CachedRoute> entries_;
    };

    struct SequenceOptions {
        std::uint64_t seed = 0;
        bool repair = true;
    };

    struct SequenceReport {
        Route route;
        bool cache_hit = false;
        Route raw;
        int raw_violations = 0;
        RepairOutcome repair = RepairOutcome::already_feasible;
        double pre_cost = 0.0;
        double raw_cost = 0.0;
        double final_cost = 0.0;
        bool final_feasible = false;
    };

    // Cache lookup, then backend solve warm-started from `route`, then repair, then cache:
    // a feasible (possibly repaired) result is cached; an unfixable one caches the input route instead.
    inline SequenceReport sequence_route_report(std::span<const NodeId> route, const Instance& instance,
                                                const SequencerBackend& backend, RouteCache& cache,
                                                const SequenceOptions& options = {}) {
        validate_route(route, instance);
        SequenceReport report;
        report.pre_cost = route_cost(route, instance);
        if (auto hit = cache.lookup(route)) {
            report.cache_hit = true;
            report.route = hit->route;
            report.raw = hit->route;
            report.final_cost = hit->cost;
            report.raw_cost = hit->cost;
            report.final_feasible = hit->feasible;
            report.raw_violations = evaluate_route(hit->route, instance).violations;
            return report;
        }
        std::vector<NodeId> sorted_ids(route.begin(), route.end());
        std::sort(sorted_ids.begin(), sorted_ids.end());
        const SolveBudget budget{derive_seed(options.seed, hash_ids(sorted_ids))};
        report.raw = backend.solve(instance, sorted_ids, route, budget);
        if (report.raw.size() != route.size() || !std::is_permutation(report.raw.begin(), report.raw.end(), route.begin())) {
            throw std::logic_error("backend '" + backend.name() + "' returned a route that is not a permutation of its input");
        }
        const RouteEval raw_eval = evaluate_route(report.raw, instance);
        report.raw_cost = raw_eval.cost;
        report.raw_violations = raw_eval.violations;

        Route chosen = report.raw;
        if (raw_eval.violations == 0) {
            report.repair = RepairOutcome::already_feasible;
        } else if (options.repair) {
            RepairResult fixed = fix_route(report.raw, instance);
            report.repair = fixed.outcome;
            chosen = fixed.outcome == RepairOutcome::unfixable ? Route(route.begin(), route.end()) : std::move(fixed.route);
        } else {
            report.repair = RepairOutcome::not_attempted;
        }
        const RouteEval chosen_eval = evaluate_route(chosen, instance);
        const CachedRoute stored = cache.offer(route, {std::move(chosen), chosen_eval.cost, chosen_eval.violations == 0});
        report.route = stored.route;
        report.final_cost = stored.cost;
        report.final_feasible = stored.feasible;
        return report;
    }

    inline Route sequence_route(std::span<const NodeId> route, const Instance& instance, const SequencerBackend& backend,
                                RouteCache& cache, const SequenceOptions& options = {}) {
        return sequence_route_report(route, instance, backend, cache, options).route;
    }

}  // namespace twrouter

#endif
