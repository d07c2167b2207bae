#include <gtest/gtest.h>

#include <random>

#include "imml/causal/do_calculus.hpp"
#include "imml/causal/graph.hpp"
#include "../support/oracles.hpp"

using namespace imml::causal;

namespace {

std::vector<std::string> strings(const std::vector<Path>& paths) {
    std::vector<std::string> out;
    for (const auto& p : paths) out.push_back(p.to_string());
    return out;
}

Dag chain() { return Dag::build({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}); }

}  // namespace

TEST(DagBuild, SingleNode) {
    Dag g = Dag::build({"A"}, {});
    EXPECT_EQ(g.size(), 1u);
    EXPECT_TRUE(g.edges().empty());
}

TEST(DagBuild, TwoModalityGraph) {
    Dag g = two_modality_dag();
    EXPECT_EQ(g.size(), 6u);
    EXPECT_EQ(g.edges().size(), 7u);
    EXPECT_FALSE(g.is_observed("K_P"));
    EXPECT_TRUE(g.is_observed("D_A"));
}

TEST(DagBuild, TwoCycleRejected) {
    EXPECT_THROW(Dag::build({"A", "B"}, {{"A", "B"}, {"B", "A"}}), CycleDetected);
}

TEST(DagBuild, LongCycleAndSelfLoopRejected) {
    EXPECT_THROW(Dag::build({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}, {"C", "A"}}), CycleDetected);
    EXPECT_THROW(Dag::build({"A"}, {{"A", "A"}}), CycleDetected);
}

TEST(DagBuild, UnknownEndpointAndBadNames) {
    EXPECT_THROW(Dag::build({"A"}, {{"A", "B"}}), UnknownNode);
    EXPECT_THROW(Dag::build({"A", "A"}, {}), InvalidGraph);
    EXPECT_THROW(Dag::build({""}, {}), InvalidGraph);
    EXPECT_THROW(Dag::build({"A"}, {}, {"Q"}), UnknownNode);
}

TEST(DagBuild, TopologicalOrderRespectsEdges) {
    Dag g = two_modality_dag();
    std::vector<std::size_t> pos(g.size());
    const auto& order = g.topological_order();
    for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = k;
    for (const auto& [a, b] : g.edges()) EXPECT_LT(pos[g.index_of(a)], pos[g.index_of(b)]);
}

TEST(DirectedPaths, Examples) {
    EXPECT_EQ(strings(directed_paths(chain(), "A", "C")), std::vector<std::string>{"A->B->C"});
    EXPECT_EQ(strings(directed_paths(two_modality_dag(), "D_P", "Y")), std::vector<std::string>{"D_P->Z->Y"});
    Dag collider = Dag::build({"A", "B", "C"}, {{"A", "C"}, {"B", "C"}});
    EXPECT_TRUE(directed_paths(collider, "A", "B").empty());
    EXPECT_THROW(directed_paths(chain(), "A", "Q"), UnknownNode);
}

TEST(BackdoorPaths, Examples) {
    Dag g = two_modality_dag();
    EXPECT_EQ(strings(backdoor_paths(g, "D_P", "Y")), std::vector<std::string>{"D_P<-K_P->Y"});
    auto zy = strings(backdoor_paths(g, "Z", "Y"));
    EXPECT_NE(std::find(zy.begin(), zy.end(), "Z<-D_A<-K_A->Y"), zy.end());
    EXPECT_NE(std::find(zy.begin(), zy.end(), "Z<-D_P<-K_P->Y"), zy.end());
    EXPECT_TRUE(backdoor_paths(chain(), "A", "C").empty());
}

TEST(Paths, DeterministicOrder) {
    Dag g = two_modality_dag();
    EXPECT_EQ(simple_paths(g, "D_P", "Y"), simple_paths(g, "D_P", "Y"));
    auto paths = simple_paths(g, "Z", "Y");
    EXPECT_TRUE(std::is_sorted(paths.begin(), paths.end()));
}

TEST(DSeparation, CanonicalStructures) {
    Dag ch = Dag::build({"X", "Y", "Z"}, {{"X", "Y"}, {"Y", "Z"}});
    EXPECT_TRUE(d_separated(ch, {"X"}, {"Z"}, {"Y"}));
    EXPECT_FALSE(d_separated(ch, {"X"}, {"Z"}, {}));
    Dag col = Dag::build({"X", "Y", "Z"}, {{"X", "Y"}, {"Z", "Y"}});
    EXPECT_TRUE(d_separated(col, {"X"}, {"Z"}, {}));
    EXPECT_FALSE(d_separated(col, {"X"}, {"Z"}, {"Y"}));
    Dag fork = Dag::build({"X", "Y", "Z"}, {{"Y", "X"}, {"Y", "Z"}});
    EXPECT_TRUE(d_separated(fork, {"X"}, {"Z"}, {"Y"}));
}

TEST(DSeparation, ColliderDescendantOpensPath) {
    Dag g = Dag::build({"X", "C", "Z", "D"}, {{"X", "C"}, {"Z", "C"}, {"C", "D"}});
    EXPECT_FALSE(d_separated(g, {"X"}, {"Z"}, {"D"}));
}

TEST(DSeparation, TwoModalityMatchesPathOracle) {
    Dag g = two_modality_dag();
    const bool expected = oracle::d_separated_by_paths(g, {"D_P"}, {"Y"}, {"Z", "K_P"});
    EXPECT_EQ(d_separated(g, {"D_P"}, {"Y"}, {"Z", "K_P"}), expected);
    EXPECT_FALSE(expected);
}

TEST(DSeparation, Errors) {
    Dag g = chain();
    EXPECT_THROW(d_separated(g, {"A"}, {"Q"}, {}), UnknownNode);
    EXPECT_THROW(d_separated(g, {"A"}, {"C"}, {"A"}), OverlappingSets);
    EXPECT_TRUE(d_separated(g, {}, {"C"}, {}));
}

TEST(DSeparationProperty, AgreesWithPathEnumeration) {
    std::mt19937_64 rng(20240611);
    int compared = 0;
    for (int trial = 0; trial < 1500 && compared < 600; ++trial) {
        const int n = std::uniform_int_distribution<int>(2, 6)(rng);
        Dag g = oracle::random_dag(rng, n, std::uniform_real_distribution<double>(0.2, 0.7)(rng));
        std::uniform_int_distribution<int> role(0, 3);
        NodeSet x, y, z;
        for (const auto& v : g.nodes()) {
            switch (role(rng)) {
                case 0: x.insert(v); break;
                case 1: y.insert(v); break;
                case 2: z.insert(v); break;
                default: break;
            }
        }
        if (x.empty() || y.empty()) continue;
        ASSERT_EQ(d_separated(g, x, y, z), oracle::d_separated_by_paths(g, x, y, z)) << "trial " << trial;
        ++compared;
    }
    EXPECT_GE(compared, 500);
}

TEST(DSeparationProperty, Symmetric) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        Dag g = oracle::random_dag(rng, 6, 0.4);
        EXPECT_EQ(d_separated(g, {"A"}, {"B"}, {"C", "D"}), d_separated(g, {"B"}, {"A"}, {"C", "D"}));
    }
}
