#include "imml/causal/criteria.hpp"

#include <algorithm>

namespace imml::causal {

namespace {

void validate_query(const Dag& g, const NodeId& x, const NodeId& y, const NodeSet& z,
                    const NodeSet& extra = {}) {
    g.index_of(x);
    g.index_of(y);
    g.require_nodes(z);
    g.require_nodes(extra);
    if (x == y) throw OverlappingSets("cause and effect must differ");
    const NodeSet xs{x}, ys{y};
    require_disjoint({&xs, &ys, &z, &extra});
}

CriterionReport violation(int condition, std::optional<Path> witness, std::string detail) {
    CriterionReport r;
    r.satisfied = false;
    r.violated_condition = condition;
    r.witness_path = std::move(witness);
    r.detail = std::move(detail);
    return r;
}

NodeSet unobserved_members(const Dag& g, const NodeSet& s) {
    NodeSet out;
    for (const auto& n : s)
        if (!g.is_observed(n)) out.insert(n);
    return out;
}

bool intersects(const Path& p, const NodeSet& s) {
    return std::any_of(p.nodes.begin(), p.nodes.end(), [&](const NodeId& n) { return s.contains(n); });
}

// Directed x -> y path that avoids every node of z.
std::optional<Path> unintercepted_path(const Dag& g, const NodeId& x, const NodeId& y,
                                       const NodeSet& z) {
    for (auto& p : directed_paths(g, x, y)) {
        const bool hit = std::any_of(p.nodes.begin() + 1, p.nodes.end() - 1,
                                     [&](const NodeId& n) { return z.contains(n); });
        if (!hit) return std::move(p);
    }
    return std::nullopt;
}

// First back-door path from `from` to any node of `to` left open by `given`.
std::optional<Path> open_backdoor(const Dag& g, const NodeId& from, const NodeSet& to,
                                  const NodeSet& given) {
    std::vector<Path> open;
    for (const auto& t : to)
        for (auto& p : backdoor_paths(g, from, t))
            if (!is_blocked(g, p, given)) open.push_back(std::move(p));
    if (open.empty()) return std::nullopt;
    return *std::min_element(open.begin(), open.end());
}

std::optional<Path> open_backdoor_from_set(const Dag& g, const NodeSet& from, const NodeId& to,
                                           const NodeSet& given) {
    std::vector<Path> open;
    for (const auto& f : from)
        for (auto& p : backdoor_paths(g, f, to))
            if (!is_blocked(g, p, given)) open.push_back(std::move(p));
    if (open.empty()) return std::nullopt;
    return *std::min_element(open.begin(), open.end());
}

void classify_paths(const Dag& g, const NodeId& x, const NodeId& y, const NodeSet& z,
                    CriterionReport& r) {
    for (auto& p : backdoor_paths(g, x, y))
        if (!intersects(p, z)) r.alpha_paths.push_back(std::move(p));
    for (const auto& m : z)
        for (auto& p : backdoor_paths(g, m, y))
            if (!p.contains(x)) r.beta_paths.push_back(std::move(p));
    std::sort(r.beta_paths.begin(), r.beta_paths.end());
}

}  // namespace

CriterionReport check_backdoor_criterion(const Dag& g, const NodeId& x, const NodeId& y,
                                         const NodeSet& z) {
    validate_query(g, x, y, z);
    CriterionReport r;
    const NodeSet desc = g.descendants(x);
    for (const auto& n : z) {
        if (desc.contains(n)) {
            auto paths = directed_paths(g, x, n);
            r = violation(1, paths.empty() ? std::nullopt : std::optional<Path>(paths.front()),
                          "'" + n + "' is a descendant of '" + x + "'");
            break;
        }
    }
    if (r.satisfied) {
        for (auto& p : backdoor_paths(g, x, y)) {
            if (!is_blocked(g, p, z)) {
                r = violation(2, std::move(p), "back-door path left open by the adjustment set");
                break;
            }
        }
    }
    r.unobserved_adjustment = unobserved_members(g, z);
    return r;
}

CriterionReport check_frontdoor_criterion(const Dag& g, const NodeId& x, const NodeId& y,
                                          const NodeSet& z) {
    validate_query(g, x, y, z);
    CriterionReport r;
    if (auto p = unintercepted_path(g, x, y, z)) {
        r = violation(1, std::move(p), "directed path not intercepted by the mediator set");
    } else if (auto p2 = open_backdoor(g, x, z, {})) {
        r = violation(2, std::move(p2), "open back-door path from the cause to the mediator");
    } else if (auto p3 = open_backdoor_from_set(g, z, y, {x})) {
        r = violation(3, std::move(p3), "back-door path from the mediator to the effect not blocked by the cause");
    }
    classify_paths(g, x, y, z, r);
    r.unobserved_adjustment = unobserved_members(g, z);
    return r;
}

CriterionReport check_beta_frontdoor_criterion(const Dag& g, const NodeId& x, const NodeId& y,
                                               const NodeSet& z, const NodeSet& d_a) {
    validate_query(g, x, y, z, d_a);
    for (const auto& n : d_a)
        if (!g.is_observed(n)) throw UnobservedDA("d_a node '" + n + "' is not observed");

    CriterionReport r;
    NodeSet blockers = d_a;
    blockers.insert(x);
    if (auto p = unintercepted_path(g, x, y, z)) {
        r = violation(1, std::move(p), "directed path not intercepted by the mediator set");
    } else if (auto p2 = open_backdoor(g, x, z, {})) {
        r = violation(2, std::move(p2), "open back-door path from the cause to the mediator");
    } else if (auto p3 = open_backdoor_from_set(g, z, y, blockers)) {
        r = violation(3, std::move(p3), "back-door path from the mediator to the effect not blocked by the cause and d_a");
    } else {
        const NodeSet desc = g.descendants(x);
        for (const auto& a : d_a) {
            const auto kids = g.children(a);
            const bool feeds_mediator =
                std::any_of(kids.begin(), kids.end(), [&](const NodeId& c) { return z.contains(c); });
            if (!feeds_mediator) {
                r = violation(4, std::nullopt, "'" + a + "' is not a parent of the mediator set");
                break;
            }
            if (desc.contains(a)) {
                auto paths = directed_paths(g, x, a);
                r = violation(4, paths.front(), "'" + a + "' is a descendant of the cause");
                break;
            }
            if (auto p4 = open_backdoor(g, a, z, {})) {
                r = violation(4, std::move(p4), "open back-door path from '" + a + "' to the mediator");
                break;
            }
        }
    }
    classify_paths(g, x, y, z, r);
    r.unobserved_adjustment = unobserved_members(g, z);
    return r;
}

}  // namespace imml::causal
