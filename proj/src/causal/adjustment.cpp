#include "imml/causal/adjustment.hpp"

#include <algorithm>

namespace imml::causal {

namespace {

void require_observed(const Dag& g, const NodeSet& nodes) {
    for (const auto& n : nodes)
        if (!g.is_observed(n)) throw UnobservedVariable("'" + n + "' is not observed");
}

NodeSet concat_set(const NodeId& x, const NodeId& y, const NodeSet& z) {
    NodeSet out = z;
    out.insert(x);
    out.insert(y);
    return out;
}

void require_value(const DiscreteScm& scm, const NodeId& x, std::size_t x_val) {
    if (x_val >= scm.cardinality(x))
        throw ValueOutOfDomain("value index " + std::to_string(x_val) + " out of range for '" + x + "'");
}

void refuse_if_violated(const CriterionReport& r, const char* which, bool force) {
    if (r.satisfied || force) return;
    std::string msg = std::string(which) + " criterion violated at condition " +
                      std::to_string(r.violated_condition.value_or(0));
    if (r.witness_path) msg += " (" + r.witness_path->to_string() + ")";
    throw CriterionViolated(msg);
}

std::vector<std::size_t> cards_of(const DiscreteScm& scm, const std::vector<NodeId>& vars) {
    std::vector<std::size_t> out;
    for (const auto& v : vars) out.push_back(scm.cardinality(v));
    return out;
}

std::vector<NodeId> concat(std::initializer_list<std::vector<NodeId>> parts) {
    std::vector<NodeId> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

// Shared evaluator for the classical (d_a empty) and beta front-door sums.
ProbTable mediated_sum(const DiscreteScm& scm, const NodeId& x, std::size_t x_val, const NodeId& y,
                       const NodeSet& z, const NodeSet& d_a) {
    const std::vector<NodeId> zs(z.begin(), z.end());
    const std::vector<NodeId> ds(d_a.begin(), d_a.end());
    const ProbTable obs = observational(scm);
    const ProbTable m_xzdy = marginal(obs, concat({{x}, zs, ds, {y}}));
    const ProbTable m_xzd = marginal(m_xzdy, concat({{x}, zs, ds}));
    const ProbTable m_xd = marginal(m_xzd, concat({{x}, ds}));
    const ProbTable m_d = marginal(m_xd, ds);
    const ProbTable m_x = marginal(m_xd, std::vector<NodeId>{x});

    const std::size_t nx = scm.cardinality(x);
    const std::size_t ny = scm.cardinality(y);
    const auto z_cards = cards_of(scm, zs);
    const auto d_cards = cards_of(scm, ds);

    ProbTable out({y}, {ny});
    std::vector<std::size_t> xzd(1 + zs.size() + ds.size());
    std::vector<std::size_t> xd(1 + ds.size());
    std::vector<double> inner(ny);

    for_each_assignment(z_cards, [&](std::span<const std::size_t> za) {
        for_each_assignment(d_cards, [&](std::span<const std::size_t> da) {
            std::copy(za.begin(), za.end(), xzd.begin() + 1);
            std::copy(da.begin(), da.end(), xzd.begin() + 1 + zs.size());
            std::copy(da.begin(), da.end(), xd.begin() + 1);

            xzd[0] = x_val;
            xd[0] = x_val;
            const double p_z = ratio_or_zero(m_xzd.at(std::span<const std::size_t>(xzd)),
                                             m_xd.at(std::span<const std::size_t>(xd)));
            const double p_d = m_d.at(da);
            if (p_z * p_d == 0.0) return;

            std::fill(inner.begin(), inner.end(), 0.0);
            double weight = 0.0;
            std::vector<std::size_t> cell(xzd.size() + 1);
            for (std::size_t xp = 0; xp < nx; ++xp) {
                xzd[0] = xp;
                const double joint_mass = m_xzd.at(std::span<const std::size_t>(xzd));
                if (joint_mass <= 0.0) continue;
                const std::size_t xp_idx[1] = {xp};
                const double p_xp = m_x.at(std::span<const std::size_t>(xp_idx));
                weight += p_xp;
                std::copy(xzd.begin(), xzd.end(), cell.begin());
                for (std::size_t yv = 0; yv < ny; ++yv) {
                    cell.back() = yv;
                    inner[yv] += p_xp * m_xzdy.at(std::span<const std::size_t>(cell)) / joint_mass;
                }
            }
            if (weight <= 0.0) return;
            for (std::size_t yv = 0; yv < ny; ++yv) out.values()[yv] += p_z * p_d * inner[yv] / weight;
        });
    });
    return out;
}

}  // namespace

ProbTable backdoor_adjust(const DiscreteScm& scm, const NodeId& x, std::size_t x_val, const NodeId& y,
                          const NodeSet& z, bool force) {
    const Dag& g = scm.dag();
    refuse_if_violated(check_backdoor_criterion(g, x, y, z), "back-door", force);
    require_observed(g, concat_set(x, y, z));
    require_value(scm, x, x_val);

    const std::vector<NodeId> zs(z.begin(), z.end());
    const ProbTable obs = observational(scm);
    const ProbTable m_xzy = marginal(obs, concat({{x}, zs, {y}}));
    const ProbTable m_xz = marginal(m_xzy, concat({{x}, zs}));
    const ProbTable m_z = marginal(m_xz, zs);

    const std::size_t ny = scm.cardinality(y);
    ProbTable out({y}, {ny});
    std::vector<std::size_t> xz(1 + zs.size()), xzy(2 + zs.size());
    for_each_assignment(cards_of(scm, zs), [&](std::span<const std::size_t> za) {
        xz[0] = x_val;
        std::copy(za.begin(), za.end(), xz.begin() + 1);
        const double cond_mass = m_xz.at(std::span<const std::size_t>(xz));
        if (cond_mass <= 0.0) return;
        const double p_z = m_z.at(za);
        std::copy(xz.begin(), xz.end(), xzy.begin());
        for (std::size_t yv = 0; yv < ny; ++yv) {
            xzy.back() = yv;
            out.values()[yv] += m_xzy.at(std::span<const std::size_t>(xzy)) / cond_mass * p_z;
        }
    });
    return out;
}

ProbTable frontdoor_adjust(const DiscreteScm& scm, const NodeId& x, std::size_t x_val, const NodeId& y,
                           const NodeSet& z, bool force) {
    const Dag& g = scm.dag();
    refuse_if_violated(check_frontdoor_criterion(g, x, y, z), "front-door", force);
    require_observed(g, concat_set(x, y, z));
    require_value(scm, x, x_val);
    return mediated_sum(scm, x, x_val, y, z, {});
}

ProbTable beta_frontdoor_adjust(const DiscreteScm& scm, const NodeId& x, std::size_t x_val, const NodeId& y,
                                const NodeSet& z, const NodeSet& d_a, bool force) {
    const Dag& g = scm.dag();
    refuse_if_violated(check_beta_frontdoor_criterion(g, x, y, z, d_a), "beta front-door", force);
    require_observed(g, concat_set(x, y, z));
    for (const auto& n : d_a)
        if (!g.is_observed(n)) throw UnobservedDA("d_a node '" + n + "' is not observed");
    require_value(scm, x, x_val);
    return mediated_sum(scm, x, x_val, y, z, d_a);
}

}  // namespace imml::causal
