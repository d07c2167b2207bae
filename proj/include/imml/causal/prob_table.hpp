#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "imml/causal/graph.hpp"

namespace imml::causal {

/// Value index per variable.
using Assignment = std::map<NodeId, std::size_t>;

/// Dense table over the product domain of an ordered list of variables.
/// Row-major: the last variable varies fastest.
class ProbTable {
public:
    ProbTable() = default;
    /// Throws std::invalid_argument when the value count does not match the cards.
    ProbTable(std::vector<NodeId> variables, std::vector<std::size_t> cards, std::vector<double> values);
    /// Zero-filled table.
    ProbTable(std::vector<NodeId> variables, std::vector<std::size_t> cards);

    const std::vector<NodeId>& variables() const noexcept { return vars_; }
    const std::vector<std::size_t>& cards() const noexcept { return cards_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    bool has(const NodeId& var) const;
    /// Throws UnknownVariable.
    std::size_t position(const NodeId& var) const;

    /// `assignment` lists one value index per variable, in variable order.
    std::size_t offset(std::span<const std::size_t> assignment) const;
    double at(std::span<const std::size_t> assignment) const { return values_[offset(assignment)]; }
    double& at(std::span<const std::size_t> assignment) { return values_[offset(assignment)]; }
    /// Lookup by name; every table variable must be assigned, extra entries are ignored.
    double at(const Assignment& assignment) const;

    double sum() const;

private:
    std::vector<NodeId> vars_;
    std::vector<std::size_t> cards_;
    std::vector<double> values_;
};

/// Calls fn(span of value indices) for every cell of the product domain, in
/// row-major order (last position fastest).
template <class Fn>
void for_each_assignment(std::span<const std::size_t> cards, Fn&& fn) {
    std::vector<std::size_t> a(cards.size(), 0);
    for (std::size_t c : cards)
        if (c == 0) return;
    while (true) {
        fn(std::span<const std::size_t>(a));
        std::size_t k = a.size();
        while (k > 0) {
            --k;
            if (++a[k] < cards[k]) break;
            a[k] = 0;
            if (k == 0) return;
        }
        if (a.empty()) return;
    }
}

/// Sum over every variable not in `keep`; the result follows the order of `keep`.
ProbTable marginal(const ProbTable& t, const std::vector<NodeId>& keep);
/// Same, with the kept variables in table order. Throws UnknownVariable.
ProbTable marginal(const ProbTable& t, const NodeSet& keep);

struct Conditional {
    ProbTable table;
    /// The conditioning event had zero probability; `table` is all zeros.
    bool zero_mass = false;
};

/// P(target | given). Variables of `target` appearing in `given` collapse to a
/// point mass on the given value. Throws UnknownVariable.
Conditional conditional(const ProbTable& t, const std::vector<NodeId>& target, const Assignment& given);
Conditional conditional(const ProbTable& t, const NodeSet& target, const Assignment& given);

/// Largest absolute entry difference. Throws std::invalid_argument when the
/// tables are not over the same variables and cards.
double max_abs_diff(const ProbTable& a, const ProbTable& b);

/// a / b, or 0 when b is not positive.
inline double ratio_or_zero(double a, double b) { return b > 0.0 ? a / b : 0.0; }

}  // namespace imml::causal
