#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "imml/causal/graph.hpp"
#include "imml/causal/prob_table.hpp"

namespace imml::causal {

/// P(node | parents). `probs` is row-major over `parents` in the listed order
/// (last parent fastest); each row holds one entry per value of the node.
struct Cpt {
    std::vector<NodeId> parents;
    std::vector<double> probs;
};

inline constexpr std::size_t kDefaultCellCap = 10'000'000;
inline constexpr double kCptRowTolerance = 1e-12;

/// Discrete structural causal model: a Dag, a finite domain per node and a
/// conditional probability table per node.
class DiscreteScm {
public:
    /// Throws InvalidScm when a domain or CPT is missing, mis-shaped, negative
    /// or a row does not sum to 1 within kCptRowTolerance.
    DiscreteScm(Dag dag, std::map<NodeId, std::vector<std::string>> domains, std::map<NodeId, Cpt> cpts);

    const Dag& dag() const noexcept { return dag_; }
    const std::vector<std::string>& domain(const NodeId& node) const;
    std::size_t cardinality(const NodeId& node) const { return domain(node).size(); }
    const Cpt& cpt(const NodeId& node) const;
    const std::map<NodeId, std::vector<std::string>>& domains() const noexcept { return domains_; }
    const std::map<NodeId, Cpt>& cpts() const noexcept { return cpts_; }

    /// Throws ValueOutOfDomain.
    std::size_t value_index(const NodeId& node, const std::string& label) const;

private:
    Dag dag_;
    std::map<NodeId, std::vector<std::string>> domains_;
    std::map<NodeId, Cpt> cpts_;
};

/// Full joint as the product of CPT factors; variables follow dag().nodes().
/// Throws DomainTooLarge when the product domain exceeds `cell_cap`.
ProbTable joint(const DiscreteScm& scm, std::size_t cell_cap = kDefaultCellCap);

/// Joint restricted to the observed variables (in dag node order).
ProbTable observational(const DiscreteScm& scm, std::size_t cell_cap = kDefaultCellCap);

/// Graph mutilation: every assigned node loses its incoming edges and its CPT
/// becomes a point mass on the assigned value. Throws ValueOutOfDomain.
DiscreteScm intervene(const DiscreteScm& scm, const Assignment& assignments);

/// Ground-truth P(y | do(x = x_val)) by mutilation, joint and marginal.
ProbTable interventional(const DiscreteScm& scm, const NodeId& x, std::size_t x_val, const NodeId& y);

/// CPT rows drawn from a symmetric Dirichlet(1). Nodes missing from
/// `domain_sizes` get `default_size` values, labelled "0", "1", ...
DiscreteScm random_scm(const Dag& dag, const std::map<NodeId, std::size_t>& domain_sizes,
                       std::uint64_t seed, std::size_t default_size = 2);

}  // namespace imml::causal
