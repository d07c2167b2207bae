#include "imml/causal/graph.hpp"

#include <algorithm>
#include <deque>
#include <queue>

namespace imml::causal {

Dag Dag::build(const std::vector<NodeId>& nodes, const EdgeList& edges, const NodeSet& observed) {
    Dag g;
    g.names_ = nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].empty()) throw InvalidGraph("node names must be non-empty");
        if (!g.index_.emplace(nodes[i], i).second)
            throw InvalidGraph("duplicate node '" + nodes[i] + "'");
    }
    g.parents_.assign(nodes.size(), {});
    g.children_.assign(nodes.size(), {});
    for (const auto& [from, to] : edges) {
        const std::size_t a = g.index_of(from);
        const std::size_t b = g.index_of(to);
        if (a == b) throw CycleDetected("self-loop on '" + from + "'");
        auto& ch = g.children_[a];
        if (std::find(ch.begin(), ch.end(), b) != ch.end()) continue;
        ch.push_back(b);
        g.parents_[b].push_back(a);
    }
    auto by_name = [&g](std::size_t a, std::size_t b) { return g.names_[a] < g.names_[b]; };
    for (auto& p : g.parents_) std::sort(p.begin(), p.end(), by_name);
    for (auto& c : g.children_) std::sort(c.begin(), c.end(), by_name);

    // Kahn's algorithm, smallest name first.
    std::vector<std::size_t> indegree(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) indegree[i] = g.parents_[i].size();
    auto cmp = [&g](std::size_t a, std::size_t b) { return g.names_[a] > g.names_[b]; };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> ready(cmp);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (indegree[i] == 0) ready.push(i);
    while (!ready.empty()) {
        const std::size_t v = ready.top();
        ready.pop();
        g.topo_.push_back(v);
        for (std::size_t c : g.children_[v])
            if (--indegree[c] == 0) ready.push(c);
    }
    if (g.topo_.size() != nodes.size()) throw CycleDetected("edge set contains a directed cycle");

    for (const auto& o : observed) {
        g.index_of(o);
        g.observed_.insert(o);
    }
    return g;
}

Dag Dag::build(const std::vector<NodeId>& nodes, const EdgeList& edges) {
    return build(nodes, edges, NodeSet(nodes.begin(), nodes.end()));
}

std::size_t Dag::index_of(const NodeId& node) const {
    auto it = index_.find(node);
    if (it == index_.end()) throw UnknownNode(node);
    return it->second;
}

std::vector<NodeId> Dag::parents(const NodeId& node) const {
    std::vector<NodeId> out;
    for (std::size_t p : parents_[index_of(node)]) out.push_back(names_[p]);
    return out;
}

std::vector<NodeId> Dag::children(const NodeId& node) const {
    std::vector<NodeId> out;
    for (std::size_t c : children_[index_of(node)]) out.push_back(names_[c]);
    return out;
}

bool Dag::has_edge(const NodeId& from, const NodeId& to) const {
    const auto& ch = children_[index_of(from)];
    const std::size_t b = index_of(to);
    return std::find(ch.begin(), ch.end(), b) != ch.end();
}

EdgeList Dag::edges() const {
    EdgeList out;
    for (std::size_t a = 0; a < size(); ++a)
        for (std::size_t b : children_[a]) out.emplace_back(names_[a], names_[b]);
    std::sort(out.begin(), out.end());
    return out;
}

NodeSet Dag::ancestors(const NodeSet& nodes) const {
    std::vector<bool> seen(size(), false);
    std::deque<std::size_t> work;
    for (const auto& n : nodes) {
        const std::size_t i = index_of(n);
        if (!seen[i]) {
            seen[i] = true;
            work.push_back(i);
        }
    }
    while (!work.empty()) {
        const std::size_t v = work.front();
        work.pop_front();
        for (std::size_t p : parents_[v])
            if (!seen[p]) {
                seen[p] = true;
                work.push_back(p);
            }
    }
    NodeSet out;
    for (std::size_t i = 0; i < size(); ++i)
        if (seen[i]) out.insert(names_[i]);
    return out;
}

NodeSet Dag::descendants(const NodeId& node) const {
    std::vector<bool> seen(size(), false);
    std::deque<std::size_t> work{index_of(node)};
    seen[work.front()] = true;
    while (!work.empty()) {
        const std::size_t v = work.front();
        work.pop_front();
        for (std::size_t c : children_[v])
            if (!seen[c]) {
                seen[c] = true;
                work.push_back(c);
            }
    }
    NodeSet out;
    for (std::size_t i = 0; i < size(); ++i)
        if (seen[i]) out.insert(names_[i]);
    return out;
}

void Dag::require_nodes(const NodeSet& nodes) const {
    for (const auto& n : nodes) index_of(n);
}

bool Path::contains(const NodeId& node) const {
    return std::find(nodes.begin(), nodes.end(), node) != nodes.end();
}

std::string Path::to_string() const {
    std::string out;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (k > 0) out += steps[k - 1] == Step::Forward ? "->" : "<-";
        out += nodes[k];
    }
    return out;
}

namespace {

enum class Walk { Any, Directed };

void extend(const Dag& g, std::size_t target, Walk walk, std::vector<std::size_t>& stack,
            std::vector<Step>& steps, std::vector<bool>& on_path, std::vector<Path>& out) {
    const std::size_t v = stack.back();
    if (v == target) {
        Path p;
        for (std::size_t i : stack) p.nodes.push_back(g.name(i));
        p.steps = steps;
        out.push_back(std::move(p));
        return;
    }
    auto visit = [&](std::size_t next, Step dir) {
        if (on_path[next]) return;
        on_path[next] = true;
        stack.push_back(next);
        steps.push_back(dir);
        extend(g, target, walk, stack, steps, on_path, out);
        steps.pop_back();
        stack.pop_back();
        on_path[next] = false;
    };
    for (std::size_t c : g.child_indices(v)) visit(c, Step::Forward);
    if (walk == Walk::Any)
        for (std::size_t p : g.parent_indices(v)) visit(p, Step::Backward);
}

std::vector<Path> enumerate(const Dag& g, const NodeId& x, const NodeId& y, Walk walk) {
    const std::size_t xi = g.index_of(x);
    const std::size_t yi = g.index_of(y);
    std::vector<Path> out;
    if (xi == yi) return out;
    std::vector<std::size_t> stack{xi};
    std::vector<Step> steps;
    std::vector<bool> on_path(g.size(), false);
    on_path[xi] = true;
    extend(g, yi, walk, stack, steps, on_path, out);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<Path> simple_paths(const Dag& g, const NodeId& x, const NodeId& y) {
    return enumerate(g, x, y, Walk::Any);
}

std::vector<Path> directed_paths(const Dag& g, const NodeId& x, const NodeId& y) {
    return enumerate(g, x, y, Walk::Directed);
}

std::vector<Path> backdoor_paths(const Dag& g, const NodeId& x, const NodeId& y) {
    std::vector<Path> out;
    for (auto& p : simple_paths(g, x, y))
        if (p.steps.front() == Step::Backward) out.push_back(std::move(p));
    return out;
}

bool is_blocked(const Dag& g, const Path& path, const NodeSet& given) {
    for (std::size_t k = 1; k + 1 < path.nodes.size(); ++k) {
        const NodeId& mid = path.nodes[k];
        const bool collider = path.steps[k - 1] == Step::Forward && path.steps[k] == Step::Backward;
        if (!collider) {
            if (given.contains(mid)) return true;
            continue;
        }
        const NodeSet desc = g.descendants(mid);
        const bool opened = std::any_of(desc.begin(), desc.end(),
                                        [&](const NodeId& d) { return given.contains(d); });
        if (!opened) return true;
    }
    return false;
}

void require_disjoint(std::initializer_list<const NodeSet*> sets) {
    std::vector<const NodeSet*> all(sets);
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j)
            for (const auto& n : *all[i])
                if (all[j]->contains(n))
                    throw OverlappingSets("node '" + n + "' appears in more than one set");
}

bool d_separated(const Dag& g, const NodeSet& x, const NodeSet& y, const NodeSet& given) {
    g.require_nodes(x);
    g.require_nodes(y);
    g.require_nodes(given);
    require_disjoint({&x, &y, &given});
    if (x.empty() || y.empty()) return true;

    const std::size_t n = g.size();
    std::vector<bool> in_given(n, false), has_given_desc(n, false), target(n, false);
    for (const auto& z : given) in_given[g.index_of(z)] = true;
    for (const auto& a : g.ancestors(given)) has_given_desc[g.index_of(a)] = true;
    for (const auto& t : y) target[g.index_of(t)] = true;

    // Ball passing: `up` means the ball arrived from a child, `down` from a parent.
    std::vector<bool> seen_up(n, false), seen_down(n, false);
    std::deque<std::pair<std::size_t, bool>> work;
    for (const auto& s : x) {
        const std::size_t i = g.index_of(s);
        seen_up[i] = true;
        work.emplace_back(i, true);
    }
    while (!work.empty()) {
        const auto [v, up] = work.front();
        work.pop_front();
        if (!in_given[v] && target[v]) return false;
        auto push = [&](std::size_t w, bool dir_up) {
            auto& seen = dir_up ? seen_up : seen_down;
            if (!seen[w]) {
                seen[w] = true;
                work.emplace_back(w, dir_up);
            }
        };
        if (up) {
            if (in_given[v]) continue;
            for (std::size_t p : g.parent_indices(v)) push(p, true);
            for (std::size_t c : g.child_indices(v)) push(c, false);
        } else {
            if (!in_given[v])
                for (std::size_t c : g.child_indices(v)) push(c, false);
            if (has_given_desc[v])
                for (std::size_t p : g.parent_indices(v)) push(p, true);
        }
    }
    return true;
}

}  // namespace imml::causal
