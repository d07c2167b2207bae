#include <gtest/gtest.h>

#include <random>

#include "imml/causal/criteria.hpp"
#include "imml/causal/do_calculus.hpp"
#include "../support/oracles.hpp"

using namespace imml::causal;

namespace {

std::vector<std::string> strings(const std::vector<Path>& paths) {
    std::vector<std::string> out;
    for (const auto& p : paths) out.push_back(p.to_string());
    return out;
}

Dag two_modality_with(const EdgeList& extra, const std::pair<NodeId, NodeId>* drop = nullptr) {
    Dag base = two_modality_dag();
    EdgeList edges;
    for (const auto& e : base.edges())
        if (!drop || e != *drop) edges.push_back(e);
    edges.insert(edges.end(), extra.begin(), extra.end());
    return Dag::build(base.nodes(), edges, base.observed());
}

}  // namespace

TEST(BackdoorCriterion, ConfounderAdjusted) {
    Dag g = Dag::build({"X", "Y", "Z"}, {{"Z", "X"}, {"Z", "Y"}, {"X", "Y"}});
    auto ok = check_backdoor_criterion(g, "X", "Y", {"Z"});
    EXPECT_TRUE(ok.satisfied);
    EXPECT_FALSE(ok.violated_condition);
    EXPECT_FALSE(ok.witness_path);

    auto bad = check_backdoor_criterion(g, "X", "Y", {});
    EXPECT_FALSE(bad.satisfied);
    EXPECT_EQ(bad.violated_condition, 2);
    ASSERT_TRUE(bad.witness_path);
    EXPECT_EQ(bad.witness_path->to_string(), "X<-Z->Y");
}

TEST(BackdoorCriterion, DescendantRejected) {
    Dag g = Dag::build({"X", "M", "Y"}, {{"X", "M"}, {"M", "Y"}});
    auto r = check_backdoor_criterion(g, "X", "Y", {"M"});
    EXPECT_FALSE(r.satisfied);
    EXPECT_EQ(r.violated_condition, 1);
}

TEST(BackdoorCriterion, TwoModalityUnobservedAdjustmentFlagged) {
    auto r = check_backdoor_criterion(two_modality_dag(), "D_P", "Y", {"K_P"});
    EXPECT_TRUE(r.satisfied);
    EXPECT_EQ(r.unobserved_adjustment, NodeSet{"K_P"});
}

TEST(FrontdoorCriterion, Canonical) {
    Dag g = Dag::build({"U", "X", "Z", "Y"}, {{"U", "X"}, {"U", "Y"}, {"X", "Z"}, {"Z", "Y"}}, {"X", "Z", "Y"});
    EXPECT_TRUE(check_frontdoor_criterion(g, "X", "Y", {"Z"}).satisfied);
    Dag ch = Dag::build({"X", "Z", "Y"}, {{"X", "Z"}, {"Z", "Y"}});
    EXPECT_TRUE(check_frontdoor_criterion(ch, "X", "Y", {"Z"}).satisfied);
}

TEST(FrontdoorCriterion, TwoModalityViolatedByBetaPath) {
    auto r = check_frontdoor_criterion(two_modality_dag(), "D_P", "Y", {"Z"});
    EXPECT_FALSE(r.satisfied);
    EXPECT_EQ(r.violated_condition, 3);
    ASSERT_TRUE(r.witness_path);
    EXPECT_EQ(r.witness_path->to_string(), "Z<-D_A<-K_A->Y");
}

TEST(FrontdoorCriterion, UninterceptedDirectPath) {
    Dag g = Dag::build({"X", "Z", "Y"}, {{"X", "Z"}, {"Z", "Y"}, {"X", "Y"}});
    auto r = check_frontdoor_criterion(g, "X", "Y", {"Z"});
    EXPECT_FALSE(r.satisfied);
    EXPECT_EQ(r.violated_condition, 1);
    EXPECT_EQ(r.witness_path->to_string(), "X->Y");
}

TEST(BetaCriterion, TwoModalitySatisfied) {
    auto r = check_beta_frontdoor_criterion(two_modality_dag(), "D_P", "Y", {"Z"}, {"D_A"});
    EXPECT_TRUE(r.satisfied);
    EXPECT_EQ(strings(r.alpha_paths), std::vector<std::string>{"D_P<-K_P->Y"});
    EXPECT_EQ(strings(r.beta_paths), std::vector<std::string>{"Z<-D_A<-K_A->Y"});
}

TEST(BetaCriterion, NoBetaPathReducesToFrontdoor) {
    const std::pair<NodeId, NodeId> drop{"K_A", "Y"};
    Dag g = two_modality_with({}, &drop);
    auto r = check_beta_frontdoor_criterion(g, "D_P", "Y", {"Z"}, {"D_A"});
    EXPECT_TRUE(r.satisfied);
    EXPECT_TRUE(r.beta_paths.empty());
    EXPECT_TRUE(check_frontdoor_criterion(g, "D_P", "Y", {"Z"}).satisfied);
}

TEST(BetaCriterion, BackdoorIntoMediatorViolatesCondition2) {
    Dag g = two_modality_with({{"K_P", "Z"}});
    auto r = check_beta_frontdoor_criterion(g, "D_P", "Y", {"Z"}, {"D_A"});
    EXPECT_FALSE(r.satisfied);
    EXPECT_EQ(r.violated_condition, 2);
    EXPECT_EQ(r.witness_path->to_string(), "D_P<-K_P->Z");
}

TEST(BetaCriterion, MissingDaViolatesCondition3) {
    auto r = check_beta_frontdoor_criterion(two_modality_dag(), "D_P", "Y", {"Z"}, {});
    EXPECT_FALSE(r.satisfied);
    EXPECT_EQ(r.violated_condition, 3);
}

TEST(BetaCriterion, UnobservedDaRejected) {
    Dag g = two_modality_dag({}, {"D_P", "Z", "Y"});
    EXPECT_THROW(check_beta_frontdoor_criterion(g, "D_P", "Y", {"Z"}, {"D_A"}), UnobservedDA);
}

TEST(BetaCriterion, DaMustFeedMediator) {
    // K_A is on the beta path but is not a parent of Z.
    Dag g = two_modality_dag({}, {"D_P", "D_A", "Z", "Y", "K_A"});
    auto r = check_beta_frontdoor_criterion(g, "D_P", "Y", {"Z"}, {"K_A"});
    EXPECT_FALSE(r.satisfied);
    EXPECT_EQ(r.violated_condition, 4);
}

TEST(Criteria, QueryValidation) {
    Dag g = two_modality_dag();
    EXPECT_THROW(check_backdoor_criterion(g, "D_P", "Q", {}), UnknownNode);
    EXPECT_THROW(check_frontdoor_criterion(g, "D_P", "Y", {"Y"}), OverlappingSets);
}

TEST(CriteriaProperty, FrontdoorImpliesBetaWithEmptyDa) {
    std::mt19937_64 rng(99);
    int checked = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        Dag g = oracle::random_dag(rng, 5, 0.45);
        const auto& nodes = g.nodes();
        const NodeId x = nodes[rng() % nodes.size()];
        const NodeId y = nodes[rng() % nodes.size()];
        if (x == y) continue;
        NodeSet z;
        for (const auto& n : nodes)
            if (n != x && n != y && rng() % 3 == 0) z.insert(n);
        bool zy_backdoor = false;
        for (const auto& zn : z)
            if (!backdoor_paths(g, zn, y).empty()) zy_backdoor = true;
        if (zy_backdoor) continue;
        if (!check_frontdoor_criterion(g, x, y, z).satisfied) continue;
        EXPECT_TRUE(check_beta_frontdoor_criterion(g, x, y, z, {}).satisfied);
        ++checked;
    }
    EXPECT_GT(checked, 20);
}

TEST(CriteriaProperty, SatisfiedReportsCarryNoWitness) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        Dag g = oracle::random_dag(rng, 5, 0.4);
        auto r = check_backdoor_criterion(g, "A", "B", {"C"});
        EXPECT_EQ(r.satisfied, !r.violated_condition.has_value());
        if (r.satisfied) {
            EXPECT_FALSE(r.witness_path);
        }
    }
}
