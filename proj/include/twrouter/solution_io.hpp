#ifndef TWROUTER_SOLUTION_IO_HPP_
#define TWROUTER_SOLUTION_IO_HPP_

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "assignment.hpp"
#include "instance.hpp"
#include "schedule.hpp"

namespace twrouter {

    class SolutionFormatError : public std::runtime_error {
    public:
        using std::runtime_error::runtime_error;
    };

    // Solution document with per-stop schedules; key order is fixed so output is byte-stable.
    inline nlohmann::ordered_json solution_to_json(const Solution& solution, const Instance& instance, std::uint64_t seed) {
        nlohmann::ordered_json doc;
        doc["instance"] = instance.name();
        doc["seed"] = seed;
        doc["total_distance"] = solution.total_distance;
        auto routes = nlohmann::ordered_json::array();
        for (const Route& r : solution.routes) {
            const Schedule s = simulate_route(r, instance);
            nlohmann::ordered_json jr;
            jr["customers"] = r;
            jr["distance"] = s.total_distance;
            jr["demand"] = route_demand(r, instance);
            auto stops = nlohmann::ordered_json::array();
            for (const StopRecord& st : s.stops) {
                stops.push_back({{"node", st.node}, {"arrival", st.arrival}, {"wait", st.wait}, {"departure", st.departure}});
            }
            jr["schedule"] = std::move(stops);
            routes.push_back(std::move(jr));
        }
        doc["routes"] = std::move(routes);
        doc["feasible"] = solution.feasible();
        return doc;
    }

    inline std::string solution_to_string(const Solution& solution, const Instance& instance, std::uint64_t seed) {
        return solution_to_json(solution, instance, seed).dump(2) + "\n";
    }

    // Reads only the route lists; distances and flags are recomputed from the instance.
    inline Solution solution_from_json(const std::string& text, const Instance& instance) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw SolutionFormatError(std::string("invalid solution JSON: ") + e.what());
        }
        if (!doc.is_object() || !doc.contains("routes") || !doc["routes"].is_array()) {
            throw SolutionFormatError("solution JSON needs a 'routes' array");
        }
        if (doc.contains("instance") && doc["instance"].is_string() && doc["instance"].get<std::string>() != instance.name()) {
            throw SolutionFormatError("solution is for instance '" + doc["instance"].get<std::string>() + "', not '" +
                                      instance.name() + "'");
        }
        std::vector<Route> routes;
        for (const auto& jr : doc["routes"]) {
            const auto& customers = jr.is_object() ? jr.value("customers", nlohmann::json()) : jr;
            if (!customers.is_array()) {
                throw SolutionFormatError("each route needs a 'customers' array");
            }
            Route r;
            for (const auto& c : customers) {
                if (!c.is_number_integer()) {
                    throw SolutionFormatError("customer ids must be integers");
                }
                r.push_back(c.get<NodeId>());
            }
            routes.push_back(std::move(r));
        }
        for (const Route& r : routes) {
            validate_route(r, instance);
        }
        return make_solution(std::move(routes), instance);
    }

    inline Solution load_solution(const std::string& path, const Instance& instance) {
        std::ifstream in(path);
        if (!in) {
            throw SolutionFormatError("cannot open solution file '" + path + "'");
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        return solution_from_json(buf.str(), instance);
    }

}  // namespace twrouter

#endif
