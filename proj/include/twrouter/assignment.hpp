#ifndef TWROUTER_ASSIGNMENT_HPP_
#define TWROUTER_ASSIGNMENT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "instance.hpp"
#include "rng.hpp"
#include "schedule.hpp"
#include "sequencer.hpp"
#include "violation.hpp"

namespace twrouter {

    struct Solution {
        std::vector<Route> routes;
        double total_distance = 0.0;
        bool capacity_feasible = true;
        bool time_feasible = true;

        bool feasible() const noexcept {
            return capacity_feasible && time_feasible;
        }
    };

    // Derives distance and feasibility flags from the routes.
    inline Solution make_solution(std::vector<Route> routes, const Instance& instance) {
        Solution s;
        s.routes = std::move(routes);
        for (const Route& r : s.routes) {
            const RouteEval e = evaluate_route(r, instance);
            s.total_distance += e.cost;
            if (route_demand(r, instance) > instance.capacity()) {
                s.capacity_feasible = false;
            }
            if (e.violations > 0) {
                s.time_feasible = false;
            }
        }
        return s;
    }

    class InfeasibleInstanceError : public std::runtime_error {
    public:
        using std::runtime_error::runtime_error;
    };

    // Parallel savings. Starts from one out-and-back route per customer and merges route ends in order of
    // decreasing savings c(0,i) + c(0,j) - c(i,j), keeping only merges whose result respects capacity and
    // time windows. Passes repeat until a full pass makes no merge.
    inline Solution clarke_wright(const Instance& instance) {
        const std::size_t n = instance.size();
        std::vector<Route> routes;
        std::vector<int> route_of(n, -1);
        std::vector<double> load;
        for (NodeId c = 1; c < static_cast<NodeId>(n); ++c) {
            const Route single{c};
            if (instance.node(c).demand > instance.capacity()) {
                throw InfeasibleInstanceError("customer " + std::to_string(c) + " demand exceeds vehicle capacity");
            }
            if (!is_time_feasible(single, instance)) {
                throw InfeasibleInstanceError("customer " + std::to_string(c) +
                                              " cannot be served within its time window even on a dedicated route");
            }
            route_of[static_cast<std::size_t>(c)] = static_cast<int>(routes.size());
            routes.push_back(single);
            load.push_back(instance.node(c).demand);
        }

        struct Saving {
            NodeId i;
            NodeId j;
            double value;
        };
        std::vector<Saving> savings;
        savings.reserve(n * n / 2);
        for (NodeId i = 1; i < static_cast<NodeId>(n); ++i) {
            for (NodeId j = i + 1; j < static_cast<NodeId>(n); ++j) {
                savings.push_back({i, j, instance.cost(depot_id, i) + instance.cost(depot_id, j) - instance.cost(i, j)});
            }
        }
        std::stable_sort(savings.begin(), savings.end(), [](const Saving& a, const Saving& b) { return a.value > b.value; });

        Route merged;
        const auto try_merge = [&](int first, int second) {
            if (load[static_cast<std::size_t>(first)] + load[static_cast<std::size_t>(second)] > instance.capacity()) {
                return false;
            }
            const Route& a = routes[static_cast<std::size_t>(first)];
            const Route& b = routes[static_cast<std::size_t>(second)];
            merged.assign(a.begin(), a.end());
            merged.insert(merged.end(), b.begin(), b.end());
            if (!is_time_feasible(merged, instance)) {
                return false;
            }
            routes[static_cast<std::size_t>(first)] = merged;
            load[static_cast<std::size_t>(first)] += load[static_cast<std::size_t>(second)];
            for (const NodeId c : b) {
                route_of[static_cast<std::size_t>(c)] = first;
            }
            routes[static_cast<std::size_t>(second)].clear();
            load[static_cast<std::size_t>(second)] = 0.0;
            return true;
        };

        bool changed = true;
        while (changed) {
            changed = false;
            for (const Saving& s : savings) {
                const int ri = route_of[static_cast<std::size_t>(s.i)];
                const int rj = route_of[static_cast<std::size_t>(s.j)];
                if (ri == rj) {
                    continue;
                }
                const Route& a = routes[static_cast<std::size_t>(ri)];
                const Route& b = routes[static_cast<std::size_t>(rj)];
                if (a.back() == s.i && b.front() == s.j && try_merge(ri, rj)) {
                    changed = true;
                } else if (b.back() == s.j && a.front() == s.i && try_merge(rj, ri)) {
                    changed = true;
                }
            }
        }

        std::vector<Route> kept;
        for (Route& r : routes) {
            if (!r.empty()) {
                kept.push_back(std::move(r));
            }
        }
        return make_solution(std::move(kept), instance);
    }

    inline ViolationReport verify_solution(const Solution& s, const Instance& instance, double tolerance = 1e-6) {
        ViolationReport report;
        std::vector<int> visits(instance.size(), 0);
        bool routes_valid = true;
        for (const Route& r : s.routes) {
            for (const NodeId id : r) {
                if (!instance.contains(id) || id == depot_id) {
                    report.push_back({"unknown_node_" + std::to_string(id), 1.0});
                    routes_valid = false;
                } else {
                    ++visits[static_cast<std::size_t>(id)];
                }
            }
        }
        for (std::size_t c = 1; c < instance.size(); ++c) {
            if (visits[c] == 0) {
                report.push_back({"coverage_missing_" + std::to_string(c), 1.0});
            } else if (visits[c] > 1) {
                report.push_back({"coverage_duplicate_" + std::to_string(c), static_cast<double>(visits[c] - 1)});
            }
        }
        if (!routes_valid) {
            return report;
        }
        double distance = 0.0;
        bool capacity_ok = true;
        bool time_ok = true;
        for (std::size_t k = 0; k < s.routes.size(); ++k) {
            const Route& r = s.routes[k];
            const double demand = route_demand(r, instance);
            if (demand > instance.capacity()) {
                report.push_back({"capacity_route" + std::to_string(k), demand - instance.capacity()});
                capacity_ok = false;
            }
            const RouteEval e = evaluate_route(r, instance);
            if (e.violations > 0) {
                report.push_back({"time_route" + std::to_string(k), static_cast<double>(e.violations)});
                time_ok = false;
            }
            distance += e.cost;
        }
        if (std::abs(distance - s.total_distance) > tolerance) {
            report.push_back({"distance_sum", std::abs(distance - s.total_distance)});
        }
        if (s.capacity_feasible != capacity_ok) {
            report.push_back({"flag_capacity_feasible", 1.0});
        }
        if (s.time_feasible != time_ok) {
            report.push_back({"flag_time_feasible", 1.0});
        }
        return report;
    }

    struct TabuParams {
        int tenure = 15;
        int max_iterations = 2000;
        int no_improve_limit = 400;
        std::uint64_t seed = 0;
        int sequence_period = 50;
        // Weight of the frequency penalty on non-improving moves; 0 disables it.
        double diversification = 0.015;

        void validate() const {
            if (tenure < 1 || max_iterations < 0 || no_improve_limit < 1 || sequence_period < 1) {
                throw std::invalid_argument("tabu parameters must be positive");
            }
            if (!(diversification >= 0.0)) {
                throw std::invalid_argument("diversification weight must be non-negative");
            }
            if (max_iterations > 0 && tenure >= max_iterations) {
                throw std::invalid_argument("tabu tenure must be below max_iterations");
            }
        }
    };

    enum class MoveKind { relocate, exchange, none };

    inline const char* to_string(MoveKind k) {
        switch (k) {
            case MoveKind::relocate:
                return "relocate";
            case MoveKind::exchange:
                return "exchange";
            case MoveKind::none:
                return "none";
        }
        return "unknown";
    }

    // Relocate moves `first` from route `from` to position `to_pos` of route `to`. Exchange swaps `first`
    // (in `from`) with `second` (in `to`): `second` lands at `from_insert` of `from` after `first` is taken
    // out, `first` lands at `to_pos` of `to` after `second` is taken out.
    struct Move {
        MoveKind kind = MoveKind::relocate;
        NodeId first = 0;
        NodeId second = 0;
        std::size_t from = 0;
        std::size_t to = 0;
        std::size_t from_pos = 0;
        std::size_t to_pos = 0;
        std::size_t from_insert = 0;
        std::size_t second_pos = 0;
    };

    // Positions in routes are indices into the customer list. Routes are never deleted here.
    inline void apply_move(std::vector<Route>& routes, const Move& m) {
        Route& a = routes[m.from];
        Route& b = routes[m.to];
        if (m.kind == MoveKind::relocate) {
            a.erase(a.begin() + static_cast<std::ptrdiff_t>(m.from_pos));
            b.insert(b.begin() + static_cast<std::ptrdiff_t>(m.to_pos), m.first);
        } else {
            a.erase(a.begin() + static_cast<std::ptrdiff_t>(m.from_pos));
            b.erase(b.begin() + static_cast<std::ptrdiff_t>(m.second_pos));
            a.insert(a.begin() + static_cast<std::ptrdiff_t>(m.from_insert), m.second);
            b.insert(b.begin() + static_cast<std::ptrdiff_t>(m.to_pos), m.first);
        }
    }

    inline void undo_move(std::vector<Route>& routes, const Move& m) {
        Route& a = routes[m.from];
        Route& b = routes[m.to];
        if (m.kind == MoveKind::relocate) {
            b.erase(b.begin() + static_cast<std::ptrdiff_t>(m.to_pos));
            a.insert(a.begin() + static_cast<std::ptrdiff_t>(m.from_pos), m.first);
        } else {
            b.erase(b.begin() + static_cast<std::ptrdiff_t>(m.to_pos));
            a.erase(a.begin() + static_cast<std::ptrdiff_t>(m.from_insert));
            b.insert(b.begin() + static_cast<std::ptrdiff_t>(m.second_pos), m.second);
            a.insert(a.begin() + static_cast<std::ptrdiff_t>(m.from_pos), m.first);
        }
    }

    struct TraceRecord {
        int iteration = 0;
        double incumbent = 0.0;
        double current = 0.0;
        MoveKind move = MoveKind::none;
        bool sequencer_adopted = false;
    };

    using TraceSink = std::function<void(const TraceRecord&)>;

    namespace detail {

        // Time-window data for a depot-framed sequence [0, c1, ..., cm, 0]: departure from each position in a
        // forward pass and the latest feasible arrival at each position in a backward pass.
        struct TimeProfile {
            std::vector<NodeId> seq;
            std::vector<double> departure;
            std::vector<double> latest;

            void build(const Route& route, const Instance& instance, std::optional<std::size_t> skip = std::nullopt) {
                seq.clear();
                seq.push_back(depot_id);
                for (std::size_t i = 0; i < route.size(); ++i) {
                    if (!skip || *skip != i) {
                        seq.push_back(route[i]);
                    }
                }
                seq.push_back(depot_id);
                const std::size_t len = seq.size();
                departure.assign(len, 0.0);
                latest.assign(len, 0.0);
                for (std::size_t p = 1; p + 1 < len; ++p) {
                    const Node& n = instance.node(seq[p]);
                    const double arrival = departure[p - 1] + instance.cost(seq[p - 1], seq[p]);
                    departure[p] = std::max(arrival, n.ready_time) + n.service_time;
                }
                constexpr double ninf = -std::numeric_limits<double>::infinity();
                latest[len - 1] = instance.depot().due_time;
                for (std::size_t p = len - 1; p-- > 1;) {
                    const Node& n = instance.node(seq[p]);
                    const double bound = latest[p + 1] - instance.cost(seq[p], seq[p + 1]) - n.service_time;
                    latest[p] = n.ready_time <= bound ? std::min(n.due_time, bound) : ninf;
                }
                latest[0] = 0.0;
            }

            // Whether inserting `u` between seq[p] and seq[p+1] keeps the route feasible.
            bool can_insert(NodeId u, std::size_t p, const Instance& instance) const {
                const Node& n = instance.node(u);
                const double arrival = departure[p] + instance.cost(seq[p], u);
                if (arrival > n.due_time) {
                    return false;
                }
                const double leave = std::max(arrival, n.ready_time) + n.service_time;
                return leave + instance.cost(u, seq[p + 1]) <= latest[p + 1];
            }

            double insert_delta(NodeId u, std::size_t p, const Instance& instance) const {
                return instance.cost(seq[p], u) + instance.cost(u, seq[p + 1]) - instance.cost(seq[p], seq[p + 1]);
            }

            // Cheapest feasible insertion position as (position in customer list, delta).
            std::optional<std::pair<std::size_t, double>> best_insertion(NodeId u, const Instance& instance) const {
                std::optional<std::pair<std::size_t, double>> best;
                for (std::size_t p = 0; p + 1 < seq.size(); ++p) {
                    if (can_insert(u, p, instance)) {
                        const double d = insert_delta(u, p, instance);
                        if (!best || d < best->second) {
                            best = {{p, d}};
                        }
                    }
                }
                return best;
            }
        };

        struct RouteState {
            TimeProfile profile;
            std::vector<TimeProfile> without;  // profile with customer i removed
            double load = 0.0;
            double cost = 0.0;

            void build(const Route& route, const Instance& instance) {
                profile.build(route, instance);
                without.resize(route.size());
                for (std::size_t i = 0; i < route.size(); ++i) {
                    without[i].build(route, instance, i);
                }
                load = route_demand(route, instance);
                cost = route_cost(route, instance);
            }

            double removal_delta(std::size_t i, const Instance& instance) const {
                const auto& s = profile.seq;
                return instance.cost(s[i], s[i + 2]) - instance.cost(s[i], s[i + 1]) - instance.cost(s[i + 1], s[i + 2]);
            }
        };

        inline double sum_costs(const std::vector<Route>& routes, const Instance& instance) {
            double total = 0.0;
            for (const Route& r : routes) {
                total += route_cost(r, instance);
            }
            return total;
        }

    }  // namespace detail

    // Tabu search over inter-route relocate and exchange moves with best-insertion positions. Only moves
    // that keep every touched route capacity- and time-feasible are considered. Every `sequence_period`
    // iterations the routes of both the incumbent and the current solution go through sequence_route; a
    // route is replaced only by a feasible, strictly shorter order. Non-improving moves pay a penalty that
    // grows with how often the customer has been inserted into the target route.
    inline Solution tabu_search(const Solution& initial, const Instance& instance, const SequencerBackend& backend,
                                const TabuParams& params, RouteCache* shared_cache = nullptr, const TraceSink& trace = {}) {
        params.validate();
        if (!initial.feasible() || !verify_solution(initial, instance).empty()) {
            throw std::invalid_argument("tabu search needs a feasible initial solution");
        }
        if (params.max_iterations == 0) {
            return initial;
        }

        RouteCache local_cache;
        RouteCache& cache = shared_cache != nullptr ? *shared_cache : local_cache;
        Rng rng(derive_seed(params.seed, streams::tabu));
        const std::uint64_t sequencer_seed = derive_seed(params.seed, streams::sequencer);
        constexpr double eps = 1e-9;

        std::vector<Route> current = initial.routes;
        std::vector<int> route_ids(current.size());
        for (std::size_t k = 0; k < current.size(); ++k) {
            route_ids[k] = static_cast<int>(k);
        }
        std::vector<detail::RouteState> states(current.size());
        for (std::size_t k = 0; k < current.size(); ++k) {
            states[k].build(current[k], instance);
        }

        const std::size_t n = instance.size();
        const std::size_t id_span = current.size();
        std::vector<int> relocate_tabu(n * id_span, -1);  // [customer][route id] -> last tabu iteration
        std::vector<int> exchange_tabu(n * n, -1);        // [min customer][max customer]
        std::vector<int> frequency(n * id_span, 0);       // [customer][route id] -> times inserted there
        const double penalty_scale =
            params.diversification * std::sqrt(static_cast<double>(instance.customer_count() * id_span));

        std::vector<Route> best = current;
        double best_total = detail::sum_costs(best, instance);
        double current_total = best_total;
        int since_improvement = 0;

        const auto erase_empty = [&] {
            for (std::size_t k = current.size(); k-- > 0;) {
                if (current[k].empty()) {
                    current.erase(current.begin() + static_cast<std::ptrdiff_t>(k));
                    route_ids.erase(route_ids.begin() + static_cast<std::ptrdiff_t>(k));
                    states.erase(states.begin() + static_cast<std::ptrdiff_t>(k));
                }
            }
        };

        for (int iter = 1; iter <= params.max_iterations; ++iter) {
            struct Scored {
                Move move;
                double score;
            };
            std::optional<Scored> chosen;
            int ties = 0;
            const auto attribute_frequency = [&](NodeId c, std::size_t route) {
                return frequency[static_cast<std::size_t>(c) * id_span + static_cast<std::size_t>(route_ids[route])];
            };
            const double penalty_unit = penalty_scale * current_total / static_cast<double>(iter);
            const auto offer = [&](const Move& m, double delta, bool is_tabu, int freq) {
                if (is_tabu && !(current_total + delta < best_total - eps)) {
                    return;
                }
                const double score = delta > eps ? delta + penalty_unit * freq : delta;
                if (!chosen || score < chosen->score - eps) {
                    chosen = Scored{m, score};
                    ties = 1;
                } else if (std::abs(score - chosen->score) <= eps) {
                    ++ties;
                    if (std::uniform_int_distribution<int>(1, ties)(rng) == 1) {
                        chosen = Scored{m, score};
                    }
                }
            };

            const std::size_t routes_now = current.size();
            for (std::size_t a = 0; a < routes_now; ++a) {
                const auto& sa = states[a];
                for (std::size_t i = 0; i < current[a].size(); ++i) {
                    const NodeId u = current[a][i];
                    const double qu = instance.node(u).demand;
                    const double remove_u = sa.removal_delta(i, instance);
                    for (std::size_t b = 0; b < routes_now; ++b) {
                        if (b == a) {
                            continue;
                        }
                        const auto& sb = states[b];
                        if (sb.load + qu <= instance.capacity()) {
                            if (const auto ins = sb.profile.best_insertion(u, instance)) {
                                const bool is_tabu =
                                    relocate_tabu[static_cast<std::size_t>(u) * id_span + static_cast<std::size_t>(route_ids[b])] >=
                                    iter;
                                offer({MoveKind::relocate, u, 0, a, b, i, ins->first, 0, 0}, remove_u + ins->second, is_tabu,
                                      attribute_frequency(u, b));
                            }
                        }
                        if (b < a) {
                            continue;
                        }
                        for (std::size_t j = 0; j < current[b].size(); ++j) {
                            const NodeId v = current[b][j];
                            const double qv = instance.node(v).demand;
                            if (sa.load - qu + qv > instance.capacity() || sb.load - qv + qu > instance.capacity()) {
                                continue;
                            }
                            const auto v_into_a = sa.without[i].best_insertion(v, instance);
                            if (!v_into_a) {
                                continue;
                            }
                            const auto u_into_b = sb.without[j].best_insertion(u, instance);
                            if (!u_into_b) {
                                continue;
                            }
                            const double delta =
                                remove_u + v_into_a->second + sb.removal_delta(j, instance) + u_into_b->second;
                            const auto lo = static_cast<std::size_t>(std::min(u, v));
                            const auto hi = static_cast<std::size_t>(std::max(u, v));
                            const bool is_tabu = exchange_tabu[lo * n + hi] >= iter;
                            offer({MoveKind::exchange, u, v, a, b, i, u_into_b->first, v_into_a->first, j}, delta, is_tabu,
                                  attribute_frequency(u, b) + attribute_frequency(v, a));
                        }
                    }
                }
            }

            if (!chosen) {
                break;
            }

            const Move m = chosen->move;
            apply_move(current, m);
            if (!is_time_feasible(current[m.from], instance) || !is_time_feasible(current[m.to], instance)) {
                // Rounding disagreement between the incremental check and full simulation; reject and stop.
                undo_move(current, m);
                break;
            }
            ++frequency[static_cast<std::size_t>(m.first) * id_span + static_cast<std::size_t>(route_ids[m.to])];
            if (m.kind == MoveKind::exchange) {
                ++frequency[static_cast<std::size_t>(m.second) * id_span + static_cast<std::size_t>(route_ids[m.from])];
            }
            if (m.kind == MoveKind::relocate) {
                relocate_tabu[static_cast<std::size_t>(m.first) * id_span + static_cast<std::size_t>(route_ids[m.from])] =
                    iter + params.tenure;
            } else {
                const auto lo = static_cast<std::size_t>(std::min(m.first, m.second));
                const auto hi = static_cast<std::size_t>(std::max(m.first, m.second));
                exchange_tabu[lo * n + hi] = iter + params.tenure;
            }
            states[m.from].build(current[m.from], instance);
            states[m.to].build(current[m.to], instance);
            erase_empty();
            current_total = detail::sum_costs(current, instance);

            if (current_total < best_total - eps) {
                best = current;
                best_total = current_total;
                since_improvement = 0;
            } else {
                ++since_improvement;
            }

            bool adopted = false;
            if (iter % params.sequence_period == 0) {
                const auto resequence = [&](std::vector<Route>& routes) {
                    bool changed = false;
                    for (Route& r : routes) {
                        if (r.size() < 2 || r.size() > backend.max_customers()) {
                            continue;
                        }
                        const Route out = sequence_route(r, instance, backend, cache, SequenceOptions{sequencer_seed, true});
                        if (is_time_feasible(out, instance) && route_cost(out, instance) < route_cost(r, instance) - eps) {
                            r = out;
                            changed = true;
                        }
                    }
                    return changed;
                };
                std::vector<Route> sequenced = best;
                if (resequence(sequenced)) {
                    const double sequenced_total = detail::sum_costs(sequenced, instance);
                    if (sequenced_total < best_total - eps) {
                        best = std::move(sequenced);
                        best_total = sequenced_total;
                        since_improvement = 0;
                        adopted = true;
                    }
                }
                if (resequence(current)) {
                    for (std::size_t k = 0; k < current.size(); ++k) {
                        states[k].build(current[k], instance);
                    }
                    current_total = detail::sum_costs(current, instance);
                    if (current_total < best_total - eps) {
                        best = current;
                        best_total = current_total;
                        since_improvement = 0;
                        adopted = true;
                    }
                }
            }

            if (trace) {
                trace({iter, best_total, current_total, m.kind, adopted});
            }
            if (since_improvement >= params.no_improve_limit) {
                break;
            }
        }
        return make_solution(std::move(best), instance);
    }

}  // namespace twrouter

#endif
