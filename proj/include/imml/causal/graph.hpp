#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "imml/causal/errors.hpp"

namespace imml::causal {

using NodeId = std::string;
/// Ordered so that every set-valued query iterates deterministically.
using NodeSet = std::set<NodeId>;
using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

/// Directed acyclic graph of named variables.
///
/// Immutable once built. Nodes keep their construction order (this is the
/// variable order used by joint tables); adjacency lists are sorted by node
/// name so that path enumeration is reproducible.
class Dag {
public:
    /// Validates names, edge endpoints and acyclicity, and caches a
    /// topological order (ties broken by node name).
    /// Throws InvalidGraph (empty or duplicate names), UnknownNode, CycleDetected.
    static Dag build(const std::vector<NodeId>& nodes, const EdgeList& edges,
                     const NodeSet& observed);

    /// Same graph with every node observed.
    static Dag build(const std::vector<NodeId>& nodes, const EdgeList& edges);

    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<NodeId>& nodes() const noexcept { return names_; }
    const NodeId& name(std::size_t index) const { return names_.at(index); }

    bool contains(const NodeId& node) const { return index_.contains(node); }
    /// Throws UnknownNode.
    std::size_t index_of(const NodeId& node) const;

    const std::vector<std::size_t>& parent_indices(std::size_t index) const { return parents_.at(index); }
    const std::vector<std::size_t>& child_indices(std::size_t index) const { return children_.at(index); }
    std::vector<NodeId> parents(const NodeId& node) const;
    std::vector<NodeId> children(const NodeId& node) const;

    bool has_edge(const NodeId& from, const NodeId& to) const;
    /// All edges, sorted lexicographically.
    EdgeList edges() const;

    const NodeSet& observed() const noexcept { return observed_; }
    bool is_observed(const NodeId& node) const { return observed_.contains(node); }

    const std::vector<std::size_t>& topological_order() const noexcept { return topo_; }

    /// Ancestors of the given nodes, the nodes themselves included.
    NodeSet ancestors(const NodeSet& nodes) const;
    /// Descendants of a node, the node itself included.
    NodeSet descendants(const NodeId& node) const;

    /// Throws UnknownNode for the first member of `nodes` not in the graph.
    void require_nodes(const NodeSet& nodes) const;

private:
    Dag() = default;

    std::vector<NodeId> names_;
    std::unordered_map<NodeId, std::size_t> index_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<std::size_t> topo_;
    NodeSet observed_;
};

enum class Step : std::uint8_t {
    Forward,   // nodes[k] -> nodes[k+1]
    Backward,  // nodes[k] <- nodes[k+1]
};

/// Simple path in the skeleton of a Dag, with the orientation of every edge.
struct Path {
    std::vector<NodeId> nodes;
    std::vector<Step> steps;

    bool contains(const NodeId& node) const;
    /// Arrow notation, e.g. "D_P<-K_P->Y".
    std::string to_string() const;

    friend auto operator<=>(const Path&, const Path&) = default;
    friend bool operator==(const Path&, const Path&) = default;
};

/// Every simple path between x and y ignoring orientation, sorted by node names.
std::vector<Path> simple_paths(const Dag& g, const NodeId& x, const NodeId& y);

/// Every simple directed path x -> ... -> y, sorted by node names.
std::vector<Path> directed_paths(const Dag& g, const NodeId& x, const NodeId& y);

/// Simple paths between x and y whose first edge points into x.
std::vector<Path> backdoor_paths(const Dag& g, const NodeId& x, const NodeId& y);

/// True when `path` is blocked by `given`: some chain or fork node is in
/// `given`, or some collider has neither itself nor a descendant in `given`.
bool is_blocked(const Dag& g, const Path& path, const NodeSet& given);

/// d-separation of node sets by reachability over the graph
/// (linear in the number of edges). Empty x or y is trivially separated.
/// Throws UnknownNode, OverlappingSets.
bool d_separated(const Dag& g, const NodeSet& x, const NodeSet& y, const NodeSet& given);

/// Throws OverlappingSets when any two of the sets share a node.
void require_disjoint(std::initializer_list<const NodeSet*> sets);

}  // namespace imml::causal
