#include <string>

#include <gtest/gtest.h>

#include <twrouter/solution_io.hpp>

#include "test_support.hpp"

using namespace twrouter;
using twrouter::testing::solomon;

TEST(SolutionJson, RoundTripPreservesRoutes) {
    const Instance& rc101 = solomon("RC101");
    const Solution s = clarke_wright(rc101);
    const std::string text = solution_to_string(s, rc101, 42);
    const Solution back = solution_from_json(text, rc101);
    EXPECT_EQ(back.routes, s.routes);
    EXPECT_EQ(back.total_distance, s.total_distance);
    EXPECT_EQ(back.feasible(), s.feasible());
    EXPECT_EQ(solution_to_string(back, rc101, 42), text);
}

TEST(SolutionJson, FixedKeyOrderAndSchedule) {
    const Instance& c101 = solomon("C101");
    const Solution s = make_solution({Route{5, 3, 7}}, c101);
    const auto doc = solution_to_json(s, c101, 7);
    std::vector<std::string> keys;
    for (const auto& item : doc.items()) {
        keys.push_back(item.key());
    }
    EXPECT_EQ(keys, (std::vector<std::string>{"instance", "seed", "total_distance", "routes", "feasible"}));
    const auto& route = doc["routes"][0];
    EXPECT_EQ(route["customers"], nlohmann::ordered_json::parse("[5,3,7]"));
    EXPECT_EQ(route["schedule"].size(), 3u);
    EXPECT_EQ(route["schedule"][0]["node"], 5);
    const Schedule sched = simulate_route(Route{5, 3, 7}, c101);
    EXPECT_EQ(route["schedule"][2]["departure"].get<double>(), sched.stops[2].departure);
    EXPECT_EQ(route["demand"].get<double>(), route_demand(Route{5, 3, 7}, c101));
}

TEST(SolutionJson, BareArraysAccepted) {
    const Instance& c101 = solomon("C101");
    const Solution s = solution_from_json(R"({"routes": [[1, 2], [3]]})", c101);
    ASSERT_EQ(s.routes.size(), 2u);
    EXPECT_EQ(s.total_distance, route_cost(Route{1, 2}, c101) + route_cost(Route{3}, c101));
}

TEST(SolutionJson, MalformedDocumentsRejected) {
    const Instance& c101 = solomon("C101");
    EXPECT_THROW(solution_from_json("{", c101), SolutionFormatError);
    EXPECT_THROW(solution_from_json("[]", c101), SolutionFormatError);
    EXPECT_THROW(solution_from_json(R"({"routes": [{"stops": [1]}]})", c101), SolutionFormatError);
    EXPECT_THROW(solution_from_json(R"({"routes": [[1.5]]})", c101), SolutionFormatError);
    EXPECT_THROW(solution_from_json(R"({"instance": "R101", "routes": [[1]]})", c101), SolutionFormatError);
    EXPECT_THROW(solution_from_json(R"({"routes": [[1, 1]]})", c101), RouteError);
    EXPECT_THROW(solution_from_json(R"({"routes": [[999]]})", c101), RouteError);
    EXPECT_THROW(load_solution("/nonexistent/solution.json", c101), SolutionFormatError);
}

TEST(SolutionJson, PartialSolutionLoadsButFailsVerification) {
    const Instance& c101 = solomon("C101");
    const Solution s = solution_from_json(R"({"routes": [[1, 2]]})", c101);
    EXPECT_FALSE(verify_solution(s, c101).empty());
}
