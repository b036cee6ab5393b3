#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include <twrouter/instance.hpp>

#include "test_support.hpp"

using namespace twrouter;
using twrouter::testing::raw_rows;
using twrouter::testing::solomon;

namespace {

    const char* const tiny_text =
        "TINY\n"
        "\n"
        "VEHICLE\n"
        "NUMBER     CAPACITY\n"
        "  3         50\n"
        "\n"
        "CUSTOMER\n"
        "CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME\n"
        "\n"
        "    0      0          0          0          0        100          0\n"
        "    1      3          4          10         0         50          5\n"
        "    2      6          8          20         10        60          5\n";

    std::string with_rows(const std::string& rows) {
        return "T\nVEHICLE\nNUMBER CAPACITY\n2 10\nCUSTOMER\nCUST NO. XCOORD. YCOORD. DEMAND READY TIME DUE DATE SERVICE TIME\n" +
               rows;
    }

    template <typename Fn>
    std::string error_text(Fn&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            return e.what();
        }
        return {};
    }

}  // namespace

TEST(ParseSolomon, C101Header) {
    const Instance& c101 = solomon("C101");
    EXPECT_EQ(c101.name(), "C101");
    EXPECT_EQ(c101.size(), 101u);
    EXPECT_EQ(c101.customer_count(), 100u);
    EXPECT_EQ(c101.capacity(), 200.0);
    EXPECT_EQ(c101.vehicle_count(), 25);
    EXPECT_EQ(c101.depot().x, 40.0);
    EXPECT_EQ(c101.depot().y, 50.0);
}

TEST(ParseSolomon, MatchesPlainStreamExtraction) {
    const auto rows = raw_rows("R101");
    const Instance& r101 = solomon("R101");
    ASSERT_EQ(rows.size(), r101.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Node& n = r101.nodes()[i];
        EXPECT_EQ(n.id, static_cast<NodeId>(rows[i][0]));
        EXPECT_EQ(n.x, rows[i][1]);
        EXPECT_EQ(n.y, rows[i][2]);
        EXPECT_EQ(n.demand, rows[i][3]);
        EXPECT_EQ(n.ready_time, rows[i][4]);
        EXPECT_EQ(n.due_time, rows[i][5]);
        EXPECT_EQ(n.service_time, rows[i][6]);
    }
}

TEST(ParseSolomon, TinyTextWithBlankLines) {
    const Instance inst = parse_solomon(tiny_text);
    EXPECT_EQ(inst.name(), "TINY");
    EXPECT_EQ(inst.size(), 3u);
    EXPECT_EQ(inst.capacity(), 50.0);
    EXPECT_EQ(inst.vehicle_count(), 3);
    EXPECT_EQ(inst.node(2).ready_time, 10.0);
    EXPECT_EQ(inst.cost(0, 1), 5.0);
    EXPECT_EQ(inst.cost(0, 2), 10.0);
}

TEST(ParseSolomon, CrlfLineEndings) {
    std::string text = tiny_text;
    std::string crlf;
    for (const char c : text) {
        if (c == '\n') {
            crlf += '\r';
        }
        crlf += c;
    }
    EXPECT_EQ(parse_solomon(crlf), parse_solomon(text));
}

TEST(ParseSolomon, OnlyDepotRowIsNoCustomers) {
    const std::string msg = error_text([] { parse_solomon(with_rows("0 0 0 0 0 100 0\n")); });
    EXPECT_NE(msg.find("no customers"), std::string::npos) << msg;
}

TEST(ParseSolomon, DueBeforeReadyIsValidationError) {
    EXPECT_THROW(parse_solomon(with_rows("0 0 0 0 0 100 0\n1 1 1 1 50 40 0\n")), ValidationError);
}

TEST(ParseSolomon, MalformedHeaderNamesLine) {
    try {
        parse_solomon("T\nVEHICLES\nNUMBER CAPACITY\n2 10\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(ParseSolomon, NonNumericFieldNamesLine) {
    try {
        parse_solomon(with_rows("0 0 0 0 0 100 0\n1 1 x 1 0 40 0\n"));
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 8u);
        EXPECT_NE(std::string(e.what()).find("non-numeric"), std::string::npos);
    }
}

TEST(ParseSolomon, MissingDepotRow) {
    const std::string msg = error_text([] { parse_solomon(with_rows("1 1 1 1 0 40 0\n2 1 1 1 0 40 0\n")); });
    EXPECT_NE(msg.find("missing depot"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 7"), std::string::npos) << msg;
}

TEST(ParseSolomon, DuplicateIdNamesBothLines) {
    try {
        parse_solomon(with_rows("0 0 0 0 0 100 0\n1 1 1 1 0 40 0\n1 2 2 1 0 40 0\n"));
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 9u);
        EXPECT_NE(std::string(e.what()).find("duplicate customer id 1"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("line 8"), std::string::npos);
    }
}

TEST(ParseSolomon, ShortRowRejected) {
    EXPECT_THROW(parse_solomon(with_rows("0 0 0 0 0 100 0\n1 1 1 1 0 40\n")), ParseError);
}

TEST(ParseSolomon, MissingFileIsParseError) {
    EXPECT_THROW(load_solomon("/nonexistent/instance.txt"), ParseError);
}

TEST(ParseSolomon, DeterministicForSameBytes) {
    EXPECT_EQ(load_solomon(twrouter::testing::data_path("RC205")), load_solomon(twrouter::testing::data_path("RC205")));
}

TEST(InstanceInvariants, AllSolomonFiles) {
    const auto names = twrouter::testing::all_solomon_names();
    ASSERT_EQ(names.size(), 56u);
    for (const auto& name : names) {
        SCOPED_TRACE(name);
        const Instance inst = load_solomon(twrouter::testing::data_path(name));
        EXPECT_EQ(inst.size(), raw_rows(name).size());
        EXPECT_EQ(inst.customer_count(), 100u);
        EXPECT_EQ(inst.depot().demand, 0.0);
        EXPECT_EQ(inst.depot().service_time, 0.0);
        const CostMatrix& m = inst.cost_matrix();
        for (NodeId i = 0; i < static_cast<NodeId>(inst.size()); ++i) {
            ASSERT_EQ(inst.node(i).id, i);
            ASSERT_LE(inst.node(i).ready_time, inst.node(i).due_time);
            ASSERT_EQ(m(i, i), 0.0);
            for (NodeId j = 0; j < static_cast<NodeId>(inst.size()); ++j) {
                ASSERT_EQ(m(i, j), m(j, i));
            }
        }
        // Triangle inequality on a deterministic sample of triples.
        for (NodeId i = 0; i < 101; i += 7) {
            for (NodeId j = 1; j < 101; j += 5) {
                for (NodeId k = 2; k < 101; k += 11) {
                    ASSERT_LE(m(i, k), m(i, j) + m(j, k) + 1e-9);
                }
            }
        }
    }
}

TEST(EuclideanCost, IdentityAndPythagorean) {
    const Node a{0, 0.0, 0.0, 0, 0, 0, 0};
    const Node b{1, 3.0, 4.0, 0, 0, 0, 0};
    EXPECT_EQ(euclidean_cost(a, a), 0.0);
    EXPECT_EQ(euclidean_cost(a, b), 5.0);
    EXPECT_EQ(euclidean_cost(b, a), 5.0);
}

TEST(EuclideanCost, C101DepotToFirstCustomer) {
    // Coordinates straight from the file: depot (40,50), customer 1 (45,68).
    const auto rows = raw_rows("C101");
    const double dx = rows[0][1] - rows[1][1];
    const double dy = rows[0][2] - rows[1][2];
    EXPECT_EQ(dx * dx + dy * dy, 349.0);
    EXPECT_EQ(solomon("C101").cost(0, 1), std::sqrt(349.0));
    EXPECT_NEAR(solomon("C101").cost(0, 1), 18.681541692269406, 1e-12);
}

TEST(BuildCostMatrix, SingleNode) {
    const std::vector<Node> nodes{{0, 2.0, 3.0, 0, 0, 0, 0}};
    const CostMatrix m = build_cost_matrix(nodes);
    EXPECT_EQ(m.size(), 1u);
    EXPECT_EQ(m(0, 0), 0.0);
}

TEST(BuildCostMatrix, TwoNodesSymmetric) {
    const std::vector<Node> nodes{{0, 1.0, 1.0, 0, 0, 0, 0}, {1, 4.0, 5.0, 0, 0, 0, 0}};
    const CostMatrix m = build_cost_matrix(nodes);
    EXPECT_EQ(m(0, 1), 5.0);
    EXPECT_EQ(m(1, 0), 5.0);
    EXPECT_EQ(m(0, 0), 0.0);
    EXPECT_EQ(m(1, 1), 0.0);
}

TEST(BuildCostMatrix, CollinearPoints) {
    const std::vector<Node> nodes{{0, 0.0, 0.0, 0, 0, 0, 0}, {1, 1.0, 0.0, 0, 0, 0, 0}, {2, 3.0, 0.0, 0, 0, 0, 0}};
    const CostMatrix m = build_cost_matrix(nodes);
    EXPECT_EQ(m(0, 1), 1.0);
    EXPECT_EQ(m(1, 2), 2.0);
    EXPECT_EQ(m(0, 2), 3.0);
}

TEST(InstanceConstruction, RejectsNonContiguousIds) {
    std::vector<Node> nodes{{0, 0, 0, 0, 0, 10, 0}, {2, 1, 1, 1, 0, 10, 0}};
    EXPECT_THROW(Instance("x", 1, 10, nodes), ValidationError);
}

TEST(InstanceConstruction, RejectsDepotDemand) {
    std::vector<Node> nodes{{0, 0, 0, 5, 0, 10, 0}, {1, 1, 1, 1, 0, 10, 0}};
    EXPECT_THROW(Instance("x", 1, 10, nodes), ValidationError);
}

TEST(InstanceConstruction, Truncation) {
    const Instance small = solomon("C101").truncated(5);
    EXPECT_EQ(small.customer_count(), 5u);
    EXPECT_EQ(small.name(), "C101.5");
    EXPECT_EQ(small.node(5), solomon("C101").node(5));
    EXPECT_EQ(small.cost(2, 4), solomon("C101").cost(2, 4));
    EXPECT_THROW(solomon("C101").truncated(0), std::invalid_argument);
    EXPECT_THROW(solomon("C101").truncated(101), std::invalid_argument);
}
