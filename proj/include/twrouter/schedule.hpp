#ifndef TWROUTER_SCHEDULE_HPP_
#define TWROUTER_SCHEDULE_HPP_

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "instance.hpp"

namespace twrouter {

    // Customer visit order for one vehicle. The depot is implicit at both ends.
    using Route = std::vector<NodeId>;

    class RouteError : public std::invalid_argument {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Throws RouteError unless every id is a known customer appearing once.
    inline void validate_route(std::span<const NodeId> route, const Instance& instance) {
        std::vector<char> seen(instance.size(), 0);
        for (const NodeId id : route) {
            if (!instance.contains(id)) {
                throw RouteError("unknown node id " + std::to_string(id));
            }
            if (id == depot_id) {
                throw RouteError("route lists the depot as a customer");
            }
            if (seen[static_cast<std::size_t>(id)] != 0) {
                throw RouteError("node " + std::to_string(id) + " appears twice in route");
            }
            seen[static_cast<std::size_t>(id)] = 1;
        }
    }

    struct StopRecord {
        NodeId node = 0;
        double arrival = 0.0;
        double wait = 0.0;
        double departure = 0.0;

        bool operator==(const StopRecord&) const = default;
    };

    struct Schedule {
        std::vector<StopRecord> stops;
        double total_distance = 0.0;
        double return_arrival = 0.0;
        int violations = 0;
        bool time_feasible = true;
    };

    // Forward simulation from the depot at time 0. Early arrivals wait for the ready time at no cost;
    // a stop (or the depot return) counts as violated when arrival > due time.
    inline Schedule simulate_route(std::span<const NodeId> route, const Instance& instance) {
        for (const NodeId id : route) {
            if (!instance.contains(id) || id == depot_id) {
                throw RouteError("unknown node id " + std::to_string(id));
            }
        }
        Schedule s;
        s.stops.reserve(route.size());
        NodeId at = depot_id;
        double time = 0.0;
        for (const NodeId next : route) {
            const Node& n = instance.node(next);
            const double travel = instance.cost(at, next);
            s.total_distance += travel;
            const double arrival = time + travel;
            const double start = std::max(arrival, n.ready_time);
            if (arrival > n.due_time) {
                ++s.violations;
            }
            time = start + n.service_time;
            s.stops.push_back({next, arrival, start - arrival, time});
            at = next;
        }
        const double back = instance.cost(at, depot_id);
        s.total_distance += back;
        s.return_arrival = time + back;
        if (s.return_arrival > instance.depot().due_time) {
            ++s.violations;
        }
        s.time_feasible = s.violations == 0;
        return s;
    }

    inline double route_cost(std::span<const NodeId> route, const Instance& instance) {
        double total = 0.0;
        NodeId at = depot_id;
        for (const NodeId next : route) {
            total += instance.cost(at, next);
            at = next;
        }
        return route.empty() ? 0.0 : total + instance.cost(at, depot_id);
    }

    inline double route_demand(std::span<const NodeId> route, const Instance& instance) {
        double total = 0.0;
        for (const NodeId id : route) {
            total += instance.node(id).demand;
        }
        return total;
    }

    struct RouteEval {
        double cost = 0.0;
        int violations = 0;
    };

    // Allocation-free cost and violation count; same arithmetic order as simulate_route.
    inline RouteEval evaluate_route(std::span<const NodeId> route, const Instance& instance) {
        RouteEval e;
        NodeId at = depot_id;
        double time = 0.0;
        for (const NodeId next : route) {
            const Node& n = instance.node(next);
            const double travel = instance.cost(at, next);
            e.cost += travel;
            const double arrival = time + travel;
            if (arrival > n.due_time) {
                ++e.violations;
            }
            time = std::max(arrival, n.ready_time) + n.service_time;
            at = next;
        }
        const double back = instance.cost(at, depot_id);
        e.cost += back;
        if (time + back > instance.depot().due_time) {
            ++e.violations;
        }
        return e;
    }

    inline bool is_time_feasible(std::span<const NodeId> route, const Instance& instance) {
        return evaluate_route(route, instance).violations == 0;
    }

}  // namespace twrouter

#endif
