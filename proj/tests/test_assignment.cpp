#include <algorithm>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <twrouter/assignment.hpp>
#include <twrouter/solver.hpp>

#include "test_support.hpp"

using namespace twrouter;
using twrouter::testing::partition_optimum;
using twrouter::testing::make_instance;
using twrouter::testing::solomon;

namespace {

    bool has_label(const ViolationReport& rep, const std::string& label) {
        return std::any_of(rep.begin(), rep.end(), [&](const ConstraintViolation& v) { return v.label == label; });
    }

    TabuParams quick_params(std::uint64_t seed) {
        TabuParams p;
        p.seed = seed;
        p.max_iterations = 300;
        p.no_improve_limit = 100;
        return p;
    }

}  // namespace

TEST(ClarkeWright, TwoMergeableCustomers) {
    const Instance inst = make_instance({{0, 0, 0, 0, 1000, 0}, {10, 0, 1, 0, 1000, 0}, {10, 1, 1, 0, 1000, 0}});
    const double saving = inst.cost(0, 1) + inst.cost(0, 2) - inst.cost(1, 2);
    EXPECT_GT(saving, 0.0);
    const Solution s = clarke_wright(inst);
    ASSERT_EQ(s.routes.size(), 1u);
    EXPECT_NEAR(s.total_distance, 2 * inst.cost(0, 1) + 2 * inst.cost(0, 2) - saving, 1e-9);
    EXPECT_TRUE(s.feasible());
}

TEST(ClarkeWright, DisjointWindowsStaySeparate) {
    const Instance inst = make_instance({{0, 0, 0, 0, 1000, 0}, {10, 0, 1, 10, 11, 0}, {-10, 0, 1, 10, 11, 0}});
    ASSERT_FALSE(is_time_feasible(Route{1, 2}, inst));
    ASSERT_FALSE(is_time_feasible(Route{2, 1}, inst));
    const Solution s = clarke_wright(inst);
    EXPECT_EQ(s.routes.size(), 2u);
    EXPECT_TRUE(s.feasible());
}

TEST(ClarkeWright, CapacityBlocksMerge) {
    const Instance inst = make_instance({{0, 0, 0, 0, 1000, 0}, {10, 0, 6, 0, 1000, 0}, {10, 1, 6, 0, 1000, 0}}, 10.0);
    EXPECT_EQ(clarke_wright(inst).routes.size(), 2u);
}

TEST(ClarkeWright, UnroutableCustomerRejected) {
    const Instance late = make_instance({{0, 0, 0, 0, 1000, 0}, {10, 0, 1, 0, 5, 0}});
    EXPECT_THROW(clarke_wright(late), InfeasibleInstanceError);
    const Instance heavy = make_instance({{0, 0, 0, 0, 1000, 0}, {10, 0, 20, 0, 500, 0}}, 10.0);
    EXPECT_THROW(clarke_wright(heavy), InfeasibleInstanceError);
}

TEST(ClarkeWright, AllSolomonInstancesFeasible) {
    for (const auto& name : twrouter::testing::all_solomon_names()) {
        SCOPED_TRACE(name);
        const Instance& inst = solomon(name);
        const Solution s = clarke_wright(inst);
        EXPECT_TRUE(s.capacity_feasible);
        EXPECT_TRUE(s.time_feasible);
        EXPECT_TRUE(verify_solution(s, inst).empty());
    }
}

TEST(VerifySolution, DuplicateCustomerFlagged) {
    const Instance& c101 = solomon("C101");
    Solution s = clarke_wright(c101);
    s.routes.back().push_back(s.routes.front().front());
    s = make_solution(s.routes, c101);
    const ViolationReport rep = verify_solution(s, c101);
    EXPECT_TRUE(has_label(rep, "coverage_duplicate_" + std::to_string(s.routes.front().front())));
}

TEST(VerifySolution, MissingCustomerFlagged) {
    const Instance& c101 = solomon("C101");
    Solution s = clarke_wright(c101);
    const NodeId dropped = s.routes.front().back();
    s.routes.front().pop_back();
    s = make_solution(s.routes, c101);
    EXPECT_TRUE(has_label(verify_solution(s, c101), "coverage_missing_" + std::to_string(dropped)));
}

TEST(VerifySolution, OverCapacityRouteNamed) {
    // Demands sum to capacity + 1 on a single route.
    const Instance inst = make_instance({{0, 0, 0, 0, 1000, 0}, {10, 0, 5, 0, 1000, 0}, {10, 1, 6, 0, 1000, 0}}, 10.0);
    const Solution s = make_solution({Route{1, 2}}, inst);
    EXPECT_FALSE(s.capacity_feasible);
    const ViolationReport rep = verify_solution(s, inst);
    ASSERT_TRUE(has_label(rep, "capacity_route0"));
    EXPECT_EQ(rep.front().slack, 1.0);
}

TEST(VerifySolution, InconsistentDistanceAndFlags) {
    const Instance& r101 = solomon("R101");
    Solution s = clarke_wright(r101);
    s.total_distance += 1.0;
    s.time_feasible = false;
    const ViolationReport rep = verify_solution(s, r101);
    EXPECT_TRUE(has_label(rep, "distance_sum"));
    EXPECT_TRUE(has_label(rep, "flag_time_feasible"));
}

TEST(Moves, ApplyUndoIsIdentity) {
    std::mt19937_64 rng(99);
    const Solution cw = clarke_wright(solomon("RC102"));
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<Route> routes = cw.routes;
        const std::size_t a = rng() % routes.size();
        std::size_t b = rng() % routes.size();
        while (b == a) {
            b = rng() % routes.size();
        }
        Move m;
        m.from = a;
        m.to = b;
        m.from_pos = rng() % routes[a].size();
        m.first = routes[a][m.from_pos];
        if (trial % 2 == 0) {
            m.kind = MoveKind::relocate;
            m.to_pos = rng() % (routes[b].size() + 1);
        } else {
            m.kind = MoveKind::exchange;
            m.second_pos = rng() % routes[b].size();
            m.second = routes[b][m.second_pos];
            m.from_insert = rng() % routes[a].size();
            m.to_pos = rng() % routes[b].size();
        }
        apply_move(routes, m);
        ASSERT_NE(routes, cw.routes);
        undo_move(routes, m);
        ASSERT_EQ(routes, cw.routes);
    }
}

TEST(TabuSearch, ZeroIterationsReturnsInitial) {
    const Instance& r101 = solomon("R101");
    const Solution cw = clarke_wright(r101);
    TabuParams p;
    p.max_iterations = 0;
    AnnealBackend anneal;
    const Solution out = tabu_search(cw, r101, anneal, p);
    EXPECT_EQ(out.routes, cw.routes);
    EXPECT_EQ(out.total_distance, cw.total_distance);
}

TEST(TabuSearch, RejectsInfeasibleInitial) {
    const Instance& r101 = solomon("R101");
    Solution bad = clarke_wright(r101);
    bad.routes.front().push_back(bad.routes.back().front());
    bad = make_solution(bad.routes, r101);
    ExactBackend exact;
    EXPECT_THROW(tabu_search(bad, r101, exact, quick_params(1)), std::invalid_argument);
}

TEST(TabuSearch, TinyInstancesReachPartitionOptimum) {
    for (const char* name : {"C101", "R101", "RC101", "R201", "C201"}) {
        for (std::size_t k : {3u, 4u, 5u}) {
            SCOPED_TRACE(std::string(name) + " k=" + std::to_string(k));
            const Instance inst = solomon(name).truncated(k);
            const double oracle = partition_optimum(inst);
            const Solution cw = clarke_wright(inst);
            ExactBackend exact;
            const Solution out = tabu_search(cw, inst, exact, quick_params(3));
            EXPECT_TRUE(out.feasible());
            EXPECT_LE(out.total_distance, cw.total_distance + 1e-9);
            EXPECT_GE(out.total_distance, oracle - 1e-9);
            if (k == 3) {
                EXPECT_NEAR(out.total_distance, oracle, 1e-9);
            }
        }
    }
}

TEST(TabuSearch, IncumbentTraceMonotone) {
    const Instance& inst = solomon("RC101");
    std::vector<TraceRecord> trace;
    SolverConfig config;
    config.tabu = quick_params(5);
    const Solution out = solve_cvrptw(inst, config, 5, [&](const TraceRecord& r) { trace.push_back(r); });
    ASSERT_FALSE(trace.empty());
    for (std::size_t i = 1; i < trace.size(); ++i) {
        EXPECT_LE(trace[i].incumbent, trace[i - 1].incumbent);
        EXPECT_EQ(trace[i].iteration, trace[i - 1].iteration + 1);
    }
    EXPECT_NEAR(trace.back().incumbent, out.total_distance, 1e-6);
}

TEST(TabuSearch, ExactSequencingNeverIncreasesDistance) {
    const Instance inst = solomon("C101").truncated(30);
    SolverConfig config;
    config.backend = BackendKind::exact;
    config.tabu = quick_params(9);
    config.tabu.sequence_period = 5;
    double previous = std::numeric_limits<double>::infinity();
    int adoptions = 0;
    solve_cvrptw(inst, config, 9, [&](const TraceRecord& r) {
        EXPECT_LE(r.incumbent, previous);
        previous = r.incumbent;
        adoptions += r.sequencer_adopted ? 1 : 0;
    });
    SUCCEED() << adoptions << " sequencer adoptions";
}

TEST(TabuSearch, FeasibleAndNoWorseThanInitial) {
    for (const char* name : {"C101", "R105", "RC107", "R202", "C205"}) {
        SCOPED_TRACE(name);
        const Instance& inst = solomon(name);
        SolverConfig config;
        config.tabu = quick_params(11);
        const Solution out = solve_cvrptw(inst, config, 11);
        EXPECT_TRUE(out.feasible());
        EXPECT_TRUE(verify_solution(out, inst).empty());
        EXPECT_LE(out.total_distance, clarke_wright(inst).total_distance + 1e-9);
    }
}

TEST(TabuSearch, DeterministicPerSeed) {
    const Instance& inst = solomon("R103");
    SolverConfig config;
    config.tabu = quick_params(0);
    const Solution a = solve_cvrptw(inst, config, 21);
    const Solution b = solve_cvrptw(inst, config, 21);
    EXPECT_EQ(a.routes, b.routes);
    EXPECT_EQ(a.total_distance, b.total_distance);
}

TEST(TabuParamsTest, Validation) {
    TabuParams p;
    EXPECT_NO_THROW(p.validate());
    p.tenure = p.max_iterations;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = TabuParams{};
    p.sequence_period = 0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = TabuParams{};
    p.diversification = -1.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}
