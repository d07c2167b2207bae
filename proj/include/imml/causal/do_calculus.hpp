#pragma once

#include <optional>
#include <string>
#include <vector>

#include "imml/causal/scm.hpp"

namespace imml::causal {

/// Incoming edges of `bar` and outgoing edges of `underbar` are removed.
struct SurgerySpec {
    NodeSet bar;
    NodeSet underbar;
};

/// Throws UnknownNode.
Dag surger(const Dag& g, const SurgerySpec& spec);

/// Graphical precondition of do-calculus rule 1, 2 or 3 for the query
/// P(y | do(x), z, w). Rule 3 bars only the members of z that are not
/// ancestors of w in the graph with x barred.
/// Throws UnknownNode, OverlappingSets, std::invalid_argument (rule).
bool rule_applicable(const Dag& g, int rule, const NodeSet& x, const NodeSet& y, const NodeSet& z,
                     const NodeSet& w);

/// Largest entry gap between the two sides of a rule's conclusion, computed
/// by mutilation on every (x, z, w) slice whose conditioning event has positive
/// mass on both sides.
double rule_conclusion_gap(const DiscreteScm& scm, int rule, const NodeSet& x, const NodeSet& y,
                           const NodeSet& z, const NodeSet& w);

inline constexpr double kStepTolerance = 1e-10;

struct StepReport {
    std::string step_label;
    ProbTable lhs;
    ProbTable rhs;
    double max_abs_diff = 0.0;
    bool passed = false;
    /// Graphical justification for the step, when it is one.
    std::optional<std::string> justification;
    std::optional<bool> rule_holds;
};

/// Variable names for the two-modality graph K_P -> D_P, K_A -> D_A,
/// D_P -> Z <- D_A, Z -> Y, K_P -> Y, K_A -> Y.
struct FrontDoorRoles {
    NodeId kp = "K_P";
    NodeId ka = "K_A";
    NodeId dp = "D_P";
    NodeId da = "D_A";
    NodeId z = "Z";
    NodeId y = "Y";
};

Dag two_modality_dag(const FrontDoorRoles& roles = {}, const NodeSet& observed = {"D_P", "D_A", "Z", "Y"});

/// Throws TopologyMismatch unless the graph is exactly the role graph.
void require_two_modality_topology(const Dag& g, const FrontDoorRoles& roles = {});

/// Enumerated joint against the product of its six factors, each factor read
/// back as a conditional of that joint.
StepReport verify_joint_decomposition(const DiscreteScm& scm, const FrontDoorRoles& roles = {},
                                      double tolerance = kStepTolerance);

/// Step "13" compares the mutilation oracle with the truncated sum; steps
/// "13a".."13f" compare consecutive lines of the elimination of K_P then K_A.
/// Tables are over (D_P, Y), one slice per intervened value.
std::vector<StepReport> verify_decomposition_chain(const DiscreteScm& scm, const FrontDoorRoles& roles = {},
                                                   double tolerance = kStepTolerance);

/// Steps "14a".."14g", with do-terms evaluated on mutilated models and each
/// rule-based step annotated with its graphical check.
std::vector<StepReport> verify_multiworld_chain(const DiscreteScm& scm, const FrontDoorRoles& roles = {},
                                                double tolerance = kStepTolerance);

}  // namespace imml::causal
