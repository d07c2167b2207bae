#pragma once

#include <optional>
#include <string>
#include <vector>

#include "imml/causal/graph.hpp"

namespace imml::causal {

/// Outcome of a graphical identification criterion.
///
/// When `satisfied` is false, `violated_condition` holds the 1-based index of
/// the first failing condition and `witness_path` (when one exists) a path
/// that demonstrates the failure.
struct CriterionReport {
    bool satisfied = true;
    std::optional<int> violated_condition;
    std::optional<Path> witness_path;
    std::string detail;
    /// Back-door paths linking the cause directly to the effect.
    std::vector<Path> alpha_paths;
    /// Back-door paths from the mediator to the effect that avoid the cause.
    std::vector<Path> beta_paths;
    /// Members of the adjustment set that are not observable. Structural
    /// satisfaction is still reported; the adjustment itself cannot be evaluated.
    NodeSet unobserved_adjustment;
};

/// Back-door criterion for (x, y) with adjustment set z.
/// Condition 1: no member of z descends from x.
/// Condition 2: z blocks every back-door path from x to y.
CriterionReport check_backdoor_criterion(const Dag& g, const NodeId& x, const NodeId& y,
                                         const NodeSet& z);

/// Classical front-door criterion for (x, y) with mediator set z.
/// 1: z intercepts every directed x -> y path.
/// 2: no back-door path from x to z is open (given the empty set).
/// 3: every back-door path from z to y is blocked by {x}.
CriterionReport check_frontdoor_criterion(const Dag& g, const NodeId& x, const NodeId& y,
                                          const NodeSet& z);

/// Beta-generalization front-door criterion with an observed set d_a on the
/// beta back-door paths. Conditions 1 and 2 are the front-door ones; then
/// 3: every back-door path from z to y is blocked by {x} united with d_a;
/// 4: every d_a node is a parent of some z node, is not a descendant of x,
///    and has no open back-door path into z.
/// Throws UnknownNode, OverlappingSets, UnobservedDA.
CriterionReport check_beta_frontdoor_criterion(const Dag& g, const NodeId& x, const NodeId& y,
                                               const NodeSet& z, const NodeSet& d_a);

}  // namespace imml::causal
