#include "imml/causal/prob_table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace imml::causal {

namespace {

std::size_t product(const std::vector<std::size_t>& cards) {
    return std::accumulate(cards.begin(), cards.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

ProbTable::ProbTable(std::vector<NodeId> variables, std::vector<std::size_t> cards,
                     std::vector<double> values)
    : vars_(std::move(variables)), cards_(std::move(cards)), values_(std::move(values)) {
    if (vars_.size() != cards_.size()) throw std::invalid_argument("one cardinality per variable required");
    if (values_.size() != product(cards_)) throw std::invalid_argument("value count does not match the product domain");
}

ProbTable::ProbTable(std::vector<NodeId> variables, std::vector<std::size_t> cards)
    : vars_(std::move(variables)), cards_(std::move(cards)) {
    if (vars_.size() != cards_.size()) throw std::invalid_argument("one cardinality per variable required");
    values_.assign(product(cards_), 0.0);
}

bool ProbTable::has(const NodeId& var) const {
    return std::find(vars_.begin(), vars_.end(), var) != vars_.end();
}

std::size_t ProbTable::position(const NodeId& var) const {
    auto it = std::find(vars_.begin(), vars_.end(), var);
    if (it == vars_.end()) throw UnknownVariable("table has no variable '" + var + "'");
    return static_cast<std::size_t>(it - vars_.begin());
}

std::size_t ProbTable::offset(std::span<const std::size_t> assignment) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < cards_.size(); ++k) off = off * cards_[k] + assignment[k];
    return off;
}

double ProbTable::at(const Assignment& assignment) const {
    std::vector<std::size_t> a(vars_.size());
    for (std::size_t k = 0; k < vars_.size(); ++k) {
        auto it = assignment.find(vars_[k]);
        if (it == assignment.end()) throw UnknownVariable("assignment misses '" + vars_[k] + "'");
        a[k] = it->second;
    }
    return at(std::span<const std::size_t>(a));
}

double ProbTable::sum() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0);
}

ProbTable marginal(const ProbTable& t, const std::vector<NodeId>& keep) {
    std::vector<std::size_t> pos, cards;
    for (const auto& v : keep) {
        pos.push_back(t.position(v));
        cards.push_back(t.cards()[pos.back()]);
    }
    ProbTable out(keep, cards);
    std::vector<std::size_t> sub(keep.size());
    std::size_t cell = 0;
    for_each_assignment(t.cards(), [&](std::span<const std::size_t> a) {
        for (std::size_t k = 0; k < pos.size(); ++k) sub[k] = a[pos[k]];
        out.at(std::span<const std::size_t>(sub)) += t.values()[cell++];
    });
    return out;
}

ProbTable marginal(const ProbTable& t, const NodeSet& keep) {
    for (const auto& v : keep) t.position(v);
    std::vector<NodeId> ordered;
    for (const auto& v : t.variables())
        if (keep.contains(v)) ordered.push_back(v);
    return marginal(t, ordered);
}

Conditional conditional(const ProbTable& t, const std::vector<NodeId>& target, const Assignment& given) {
    std::vector<std::pair<std::size_t, std::size_t>> fixed;
    for (const auto& [var, value] : given) {
        const std::size_t p = t.position(var);
        if (value >= t.cards()[p]) throw ValueOutOfDomain("value index out of range for '" + var + "'");
        fixed.emplace_back(p, value);
    }
    std::vector<std::size_t> pos, cards;
    for (const auto& v : target) {
        pos.push_back(t.position(v));
        cards.push_back(t.cards()[pos.back()]);
    }
    Conditional out{ProbTable(target, cards), false};
    std::vector<std::size_t> sub(target.size());
    std::size_t cell = 0;
    double mass = 0.0;
    for_each_assignment(t.cards(), [&](std::span<const std::size_t> a) {
        const double v = t.values()[cell++];
        for (const auto& [p, value] : fixed)
            if (a[p] != value) return;
        for (std::size_t k = 0; k < pos.size(); ++k) sub[k] = a[pos[k]];
        out.table.at(std::span<const std::size_t>(sub)) += v;
        mass += v;
    });
    if (mass > 0.0) {
        for (double& v : out.table.values()) v /= mass;
    } else {
        std::fill(out.table.values().begin(), out.table.values().end(), 0.0);
        out.zero_mass = true;
    }
    return out;
}

Conditional conditional(const ProbTable& t, const NodeSet& target, const Assignment& given) {
    for (const auto& v : target) t.position(v);
    std::vector<NodeId> ordered;
    for (const auto& v : t.variables())
        if (target.contains(v)) ordered.push_back(v);
    return conditional(t, ordered, given);
}

double max_abs_diff(const ProbTable& a, const ProbTable& b) {
    if (a.variables() != b.variables() || a.cards() != b.cards())
        throw std::invalid_argument("tables differ in variables or cardinalities");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(a.values()[i] - b.values()[i]);
        if (std::isnan(d)) return d;
        worst = std::max(worst, d);
    }
    return worst;
}

}  // namespace imml::causal
