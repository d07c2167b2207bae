#include "imml/causal/scm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace imml::causal {

DiscreteScm::DiscreteScm(Dag dag, std::map<NodeId, std::vector<std::string>> domains,
                         std::map<NodeId, Cpt> cpts)
    : dag_(std::move(dag)), domains_(std::move(domains)), cpts_(std::move(cpts)) {
    for (const auto& [node, _] : domains_)
        if (!dag_.contains(node)) throw InvalidScm("domain given for unknown node '" + node + "'");
    for (const auto& [node, _] : cpts_)
        if (!dag_.contains(node)) throw InvalidScm("CPT given for unknown node '" + node + "'");

    for (const auto& node : dag_.nodes()) {
        auto d = domains_.find(node);
        if (d == domains_.end() || d->second.empty()) throw InvalidScm("node '" + node + "' has no domain");
        auto c = cpts_.find(node);
        if (c == cpts_.end()) throw InvalidScm("node '" + node + "' has no CPT");
        const Cpt& cpt = c->second;

        auto expected = dag_.parents(node);
        auto listed = cpt.parents;
        std::sort(listed.begin(), listed.end());
        if (listed != expected) throw InvalidScm("CPT parents of '" + node + "' do not match the graph");

        std::size_t rows = 1;
        for (const auto& p : cpt.parents) {
            auto pd = domains_.find(p);
            if (pd == domains_.end()) throw InvalidScm("parent '" + p + "' has no domain");
            rows *= pd->second.size();
        }
        const std::size_t card = d->second.size();
        if (cpt.probs.size() != rows * card)
            throw InvalidScm("CPT of '" + node + "' has " + std::to_string(cpt.probs.size()) +
                             " entries, expected " + std::to_string(rows * card));
        for (std::size_t r = 0; r < rows; ++r) {
            double total = 0.0;
            for (std::size_t v = 0; v < card; ++v) {
                const double p = cpt.probs[r * card + v];
                if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidScm("CPT of '" + node + "' has a negative or non-finite entry");
                total += p;
            }
            if (std::abs(total - 1.0) > kCptRowTolerance)
                throw InvalidScm("CPT row " + std::to_string(r) + " of '" + node + "' sums to " + std::to_string(total));
        }
    }
}

const std::vector<std::string>& DiscreteScm::domain(const NodeId& node) const {
    auto it = domains_.find(node);
    if (it == domains_.end()) throw UnknownNode(node);
    return it->second;
}

const Cpt& DiscreteScm::cpt(const NodeId& node) const {
    auto it = cpts_.find(node);
    if (it == cpts_.end()) throw UnknownNode(node);
    return it->second;
}

std::size_t DiscreteScm::value_index(const NodeId& node, const std::string& label) const {
    const auto& dom = domain(node);
    auto it = std::find(dom.begin(), dom.end(), label);
    if (it == dom.end()) throw ValueOutOfDomain("'" + label + "' is not in the domain of '" + node + "'");
    return static_cast<std::size_t>(it - dom.begin());
}

ProbTable joint(const DiscreteScm& scm, std::size_t cell_cap) {
    const Dag& g = scm.dag();
    std::vector<std::size_t> cards;
    double cells = 1.0;
    for (const auto& n : g.nodes()) {
        cards.push_back(scm.cardinality(n));
        cells *= static_cast<double>(cards.back());
    }
    if (cells > static_cast<double>(cell_cap))
        throw DomainTooLarge("joint has " + std::to_string(static_cast<long double>(cells)) + " cells, cap is " +
                             std::to_string(cell_cap));

    struct Factor {
        std::size_t node;
        std::vector<std::size_t> parent_pos;
        const std::vector<double>* probs;
    };
    std::vector<Factor> factors;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Cpt& cpt = scm.cpt(g.name(i));
        Factor f{i, {}, &cpt.probs};
        for (const auto& p : cpt.parents) f.parent_pos.push_back(g.index_of(p));
        factors.push_back(std::move(f));
    }

    ProbTable out(g.nodes(), cards);
    std::size_t cell = 0;
    for_each_assignment(cards, [&](std::span<const std::size_t> a) {
        double p = 1.0;
        for (const auto& f : factors) {
            std::size_t row = 0;
            for (std::size_t pp : f.parent_pos) row = row * cards[pp] + a[pp];
            p *= (*f.probs)[row * cards[f.node] + a[f.node]];
            if (p == 0.0) break;
        }
        out.values()[cell++] = p;
    });
    return out;
}

ProbTable observational(const DiscreteScm& scm, std::size_t cell_cap) {
    return marginal(joint(scm, cell_cap), scm.dag().observed());
}

DiscreteScm intervene(const DiscreteScm& scm, const Assignment& assignments) {
    const Dag& g = scm.dag();
    for (const auto& [node, value] : assignments) {
        g.index_of(node);
        if (value >= scm.cardinality(node))
            throw ValueOutOfDomain("value index " + std::to_string(value) + " out of range for '" + node + "'");
    }
    EdgeList kept;
    for (const auto& e : g.edges())
        if (!assignments.contains(e.second)) kept.push_back(e);
    Dag mutilated = Dag::build(g.nodes(), kept, g.observed());

    auto cpts = scm.cpts();
    for (const auto& [node, value] : assignments) {
        Cpt point;
        point.probs.assign(scm.cardinality(node), 0.0);
        point.probs[value] = 1.0;
        cpts[node] = std::move(point);
    }
    return DiscreteScm(std::move(mutilated), scm.domains(), std::move(cpts));
}

ProbTable interventional(const DiscreteScm& scm, const NodeId& x, std::size_t x_val, const NodeId& y) {
    scm.dag().index_of(y);
    return marginal(joint(intervene(scm, {{x, x_val}})), std::vector<NodeId>{y});
}

DiscreteScm random_scm(const Dag& dag, const std::map<NodeId, std::size_t>& domain_sizes,
                       std::uint64_t seed, std::size_t default_size) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    std::map<NodeId, std::vector<std::string>> domains;
    for (const auto& n : dag.nodes()) {
        auto it = domain_sizes.find(n);
        const std::size_t k = it == domain_sizes.end() ? default_size : it->second;
        std::vector<std::string> labels;
        for (std::size_t v = 0; v < k; ++v) labels.push_back(std::to_string(v));
        domains[n] = std::move(labels);
    }
    std::map<NodeId, Cpt> cpts;
    for (const auto& n : dag.nodes()) {
        Cpt cpt;
        cpt.parents = dag.parents(n);
        std::size_t rows = 1;
        for (const auto& p : cpt.parents) rows *= domains[p].size();
        const std::size_t k = domains[n].size();
        cpt.probs.resize(rows * k);
        for (std::size_t r = 0; r < rows; ++r) {
            double total = 0.0;
            for (std::size_t v = 0; v < k; ++v) total += cpt.probs[r * k + v] = expo(rng);
            for (std::size_t v = 0; v < k; ++v) cpt.probs[r * k + v] /= total;
        }
        cpts[n] = std::move(cpt);
    }
    return DiscreteScm(dag, std::move(domains), std::move(cpts));
}

}  // namespace imml::causal
