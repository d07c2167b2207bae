#pragma once

#include "imml/causal/criteria.hpp"
#include "imml/causal/scm.hpp"

namespace imml::causal {

// Adjustment evaluators. Each one reads only the observational joint
// restricted to observed variables, never a CPT directly, and returns a table
// over {y}. Unless `force` is set they refuse (CriterionViolated) when the
// matching graphical criterion fails. Every variable used must be observed
// (UnobservedVariable).

/// sum_z P(y | x, z) P(z). Terms whose conditioning event (x, z) has zero
/// mass contribute 0.
ProbTable backdoor_adjust(const DiscreteScm& scm, const NodeId& x, std::size_t x_val, const NodeId& y,
                          const NodeSet& z, bool force = false);

/// sum_z P(z | x) sum_x' P(y | x', z) P(x').
ProbTable frontdoor_adjust(const DiscreteScm& scm, const NodeId& x, std::size_t x_val, const NodeId& y,
                           const NodeSet& z, bool force = false);

/// sum_z sum_da sum_x' P(y | z, x', da) P(z | x, da) P(da) P(x').
/// Throws UnobservedDA when a d_a node is not observed.
///
/// Inner sums over x' only visit values with P(x', z, da) > 0 and renormalize
/// P(x') over them; under positivity this is the formula verbatim.
ProbTable beta_frontdoor_adjust(const DiscreteScm& scm, const NodeId& x, std::size_t x_val, const NodeId& y,
                                const NodeSet& z, const NodeSet& d_a, bool force = false);

}  // namespace imml::causal
