#include "imml/causal/do_calculus.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "imml/causal/criteria.hpp"

namespace imml::causal {

Dag surger(const Dag& g, const SurgerySpec& spec) {
    g.require_nodes(spec.bar);
    g.require_nodes(spec.underbar);
    EdgeList kept;
    for (const auto& [from, to] : g.edges())
        if (!spec.bar.contains(to) && !spec.underbar.contains(from)) kept.emplace_back(from, to);
    return Dag::build(g.nodes(), kept, g.observed());
}

namespace {

NodeSet unite(const NodeSet& a, const NodeSet& b) {
    NodeSet out = a;
    out.insert(b.begin(), b.end());
    return out;
}

template <class Fn>
void each_assignment(const DiscreteScm& scm, const std::vector<NodeId>& vars, Fn&& fn) {
    std::vector<std::size_t> cards;
    for (const auto& v : vars) cards.push_back(scm.cardinality(v));
    Assignment a;
    for_each_assignment(cards, [&](std::span<const std::size_t> values) {
        for (std::size_t k = 0; k < vars.size(); ++k) a[vars[k]] = values[k];
        fn(a);
    });
}

}  // namespace

bool rule_applicable(const Dag& g, int rule, const NodeSet& x, const NodeSet& y, const NodeSet& z,
                     const NodeSet& w) {
    for (const NodeSet* s : {&x, &y, &z, &w}) g.require_nodes(*s);
    require_disjoint({&x, &y, &z, &w});
    if (rule < 1 || rule > 3) throw std::invalid_argument("rule must be 1, 2 or 3");
    if (z.empty()) return true;

    const NodeSet given = unite(x, w);
    switch (rule) {
        case 1:
            return d_separated(surger(g, {x, {}}), y, z, given);
        case 2:
            return d_separated(surger(g, {x, z}), y, z, given);
        default: {
            const NodeSet anc = surger(g, {x, {}}).ancestors(w);
            NodeSet barred = x;
            for (const auto& n : z)
                if (!anc.contains(n)) barred.insert(n);
            return d_separated(surger(g, {barred, {}}), y, z, given);
        }
    }
}

double rule_conclusion_gap(const DiscreteScm& scm, int rule, const NodeSet& x, const NodeSet& y,
                           const NodeSet& z, const NodeSet& w) {
    const Dag& g = scm.dag();
    for (const NodeSet* s : {&x, &y, &z, &w}) g.require_nodes(*s);
    require_disjoint({&x, &y, &z, &w});
    if (rule < 1 || rule > 3) throw std::invalid_argument("rule must be 1, 2 or 3");

    const std::vector<NodeId> xs(x.begin(), x.end()), zs(z.begin(), z.end()), ws(w.begin(), w.end());
    double worst = 0.0;
    each_assignment(scm, xs, [&](const Assignment& xa) {
        const ProbTable jx = joint(intervene(scm, xa));
        each_assignment(scm, zs, [&](const Assignment& za) {
            Assignment xza = xa;
            xza.insert(za.begin(), za.end());
            const ProbTable jxz = rule == 1 ? ProbTable{} : joint(intervene(scm, xza));
            each_assignment(scm, ws, [&](const Assignment& wa) {
                Assignment zwa = za;
                zwa.insert(wa.begin(), wa.end());
                Conditional lhs, rhs;
                if (rule == 1) {
                    lhs = conditional(jx, y, zwa);
                    rhs = conditional(jx, y, wa);
                } else if (rule == 2) {
                    lhs = conditional(jxz, y, wa);
                    rhs = conditional(jx, y, zwa);
                } else {
                    lhs = conditional(jxz, y, wa);
                    rhs = conditional(jx, y, wa);
                }
                if (lhs.zero_mass || rhs.zero_mass) return;
                worst = std::max(worst, max_abs_diff(lhs.table, rhs.table));
            });
        });
    });
    return worst;
}

Dag two_modality_dag(const FrontDoorRoles& r, const NodeSet& observed) {
    return Dag::build({r.kp, r.ka, r.dp, r.da, r.z, r.y},
                      {{r.kp, r.dp}, {r.ka, r.da}, {r.dp, r.z}, {r.da, r.z}, {r.z, r.y}, {r.kp, r.y}, {r.ka, r.y}},
                      observed);
}

void require_two_modality_topology(const Dag& g, const FrontDoorRoles& r) {
    const Dag expected = two_modality_dag(r, {});
    NodeSet have(g.nodes().begin(), g.nodes().end());
    NodeSet want(expected.nodes().begin(), expected.nodes().end());
    if (have != want) throw TopologyMismatch("graph does not have exactly the six role variables");
    if (g.edges() != expected.edges()) throw TopologyMismatch("graph edges differ from the role graph");
}

namespace {

// P(target | given) as a table over given followed by target.
ProbTable cond_table(const ProbTable& j, const std::vector<NodeId>& given, const std::vector<NodeId>& target) {
    std::vector<NodeId> vars = given;
    vars.insert(vars.end(), target.begin(), target.end());
    ProbTable out = marginal(j, vars);
    const ProbTable denom = marginal(out, given);
    std::size_t block = 1;
    for (std::size_t k = given.size(); k < vars.size(); ++k) block *= out.cards()[k];
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = ratio_or_zero(out.values()[i], denom.values()[i / block]);
    return out;
}

// Conditional table of a do-expression, with every intervened value stacked:
// each mutilated joint contributes only on its own slice.
ProbTable do_table(const DiscreteScm& scm, const std::vector<NodeId>& intervened, const std::vector<NodeId>& given,
                   const std::vector<NodeId>& target) {
    ProbTable out;
    bool first = true;
    each_assignment(scm, intervened, [&](const Assignment& a) {
        ProbTable t = cond_table(joint(intervene(scm, a)), given, target);
        if (first) {
            out = std::move(t);
            first = false;
        } else {
            for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += t.values()[i];
        }
    });
    return out;
}

// CPT of `node` as a table over its parents followed by the node. Unlike a
// conditional read off the joint it is defined on zero-mass parent values.
ProbTable mechanism(const DiscreteScm& scm, const NodeId& node) {
    const Cpt& c = scm.cpt(node);
    std::vector<NodeId> vars = c.parents;
    vars.push_back(node);
    std::vector<std::size_t> cards;
    for (const auto& v : vars) cards.push_back(scm.cardinality(v));
    return ProbTable(vars, cards, c.probs);
}

// Right-hand side of the beta adjustment as a table over (D_P, Y), with the
// inner d' sum restricted to values where (z, d', d_a) has positive mass and
// P(d') renormalized over them.
ProbTable adjustment_line(const DiscreteScm& scm, const ProbTable& j, const FrontDoorRoles& r) {
    const ProbTable m = marginal(j, std::vector<NodeId>{r.dp, r.z, r.da, r.y});
    const ProbTable z_given = cond_table(j, {r.dp, r.da}, {r.z});
    const ProbTable da = marginal(j, std::vector<NodeId>{r.da});
    const ProbTable dp = marginal(j, std::vector<NodeId>{r.dp});
    const std::size_t nd = scm.cardinality(r.dp), nz = scm.cardinality(r.z), na = scm.cardinality(r.da),
                      ny = scm.cardinality(r.y);
    ProbTable out({r.dp, r.y}, {nd, ny});
    for (std::size_t zv = 0; zv < nz; ++zv)
        for (std::size_t av = 0; av < na; ++av) {
            std::vector<double> inner(ny, 0.0);
            double weight = 0.0;
            for (std::size_t d2 = 0; d2 < nd; ++d2) {
                double mass = 0.0;
                for (std::size_t yv = 0; yv < ny; ++yv) mass += m.values()[((d2 * nz + zv) * na + av) * ny + yv];
                if (mass <= 0.0) continue;
                weight += dp.values()[d2];
                for (std::size_t yv = 0; yv < ny; ++yv)
                    inner[yv] += dp.values()[d2] * m.values()[((d2 * nz + zv) * na + av) * ny + yv] / mass;
            }
            if (weight <= 0.0) continue;
            for (std::size_t d = 0; d < nd; ++d) {
                const double w = z_given.values()[(d * na + av) * nz + zv] * da.values()[av];
                for (std::size_t yv = 0; yv < ny; ++yv) out.values()[d * ny + yv] += w * inner[yv] / weight;
            }
        }
    return out;
}

struct Term {
    const ProbTable* table;
    std::vector<std::size_t> slots;
};

// Sums the product of terms over every slot not in `out_slots`.
ProbTable sum_product(const std::vector<std::size_t>& slot_cards, const std::vector<Term>& terms,
                      const std::vector<std::size_t>& out_slots, const std::vector<NodeId>& out_vars) {
    std::vector<std::size_t> cards(slot_cards.size(), 1);
    for (const auto& t : terms)
        for (std::size_t s : t.slots) cards[s] = slot_cards[s];
    std::vector<std::size_t> out_cards;
    for (std::size_t s : out_slots) {
        cards[s] = slot_cards[s];
        out_cards.push_back(slot_cards[s]);
    }
    ProbTable out(out_vars, out_cards);
    std::vector<std::size_t> idx, out_idx(out_slots.size());
    for_each_assignment(cards, [&](std::span<const std::size_t> a) {
        double p = 1.0;
        for (const auto& t : terms) {
            idx.resize(t.slots.size());
            for (std::size_t k = 0; k < t.slots.size(); ++k) idx[k] = a[t.slots[k]];
            p *= t.table->at(std::span<const std::size_t>(idx));
            if (p == 0.0) return;
        }
        for (std::size_t k = 0; k < out_slots.size(); ++k) out_idx[k] = a[out_slots[k]];
        out.at(std::span<const std::size_t>(out_idx)) += p;
    });
    return out;
}

StepReport compare(std::string label, ProbTable lhs, ProbTable rhs, double tolerance) {
    StepReport r;
    r.step_label = std::move(label);
    r.max_abs_diff = max_abs_diff(lhs, rhs);
    r.passed = r.max_abs_diff <= tolerance;
    r.lhs = std::move(lhs);
    r.rhs = std::move(rhs);
    return r;
}

}  // namespace

StepReport verify_joint_decomposition(const DiscreteScm& scm, const FrontDoorRoles& r, double tolerance) {
    const Dag& g = scm.dag();
    require_two_modality_topology(g, r);
    const ProbTable j = joint(scm);
    auto slot = [&](const NodeId& n) { return j.position(n); };

    const ProbTable p_ka = cond_table(j, {}, {r.ka});
    const ProbTable p_kp = cond_table(j, {}, {r.kp});
    const ProbTable p_da = cond_table(j, {r.ka}, {r.da});
    const ProbTable p_dp = cond_table(j, {r.kp}, {r.dp});
    const ProbTable p_z = cond_table(j, {r.da, r.dp}, {r.z});
    const ProbTable p_y = cond_table(j, {r.z, r.ka, r.kp}, {r.y});

    std::vector<std::size_t> all(j.variables().size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
    const ProbTable product = sum_product(j.cards(),
                                          {{&p_ka, {slot(r.ka)}},
                                           {&p_kp, {slot(r.kp)}},
                                           {&p_da, {slot(r.ka), slot(r.da)}},
                                           {&p_dp, {slot(r.kp), slot(r.dp)}},
                                           {&p_z, {slot(r.da), slot(r.dp), slot(r.z)}},
                                           {&p_y, {slot(r.z), slot(r.ka), slot(r.kp), slot(r.y)}}},
                                          all, j.variables());
    return compare("11", j, product, tolerance);
}

std::vector<StepReport> verify_decomposition_chain(const DiscreteScm& scm, const FrontDoorRoles& r,
                                                   double tolerance) {
    require_two_modality_topology(scm.dag(), r);
    const ProbTable j = joint(scm);

    // Slots: intervened d, summed d', K_P, K_A, D_A, Z, Y.
    enum : std::size_t { D, D2, KP, KA, DA, Z, Y };
    const std::vector<std::size_t> cards = {scm.cardinality(r.dp), scm.cardinality(r.dp), scm.cardinality(r.kp),
                                            scm.cardinality(r.ka), scm.cardinality(r.da), scm.cardinality(r.z),
                                            scm.cardinality(r.y)};
    const std::vector<NodeId> out_vars = {r.dp, r.y};

    // Factors that are a node's own mechanism come from its CPT.
    const ProbTable z_given_dpda = mechanism(scm, r.z);
    const ProbTable da_given_ka = mechanism(scm, r.da);
    const ProbTable ka = mechanism(scm, r.ka);
    const ProbTable kp = mechanism(scm, r.kp);
    const ProbTable y_given_zkakp = mechanism(scm, r.y);
    const ProbTable dp = cond_table(j, {}, {r.dp});
    const ProbTable da = cond_table(j, {}, {r.da});
    const ProbTable kp_given_dp = cond_table(j, {r.dp}, {r.kp});
    const ProbTable y_given_kpkazdp = cond_table(j, {r.kp, r.ka, r.z, r.dp}, {r.y});
    const ProbTable kp_given_dpzka = cond_table(j, {r.dp, r.z, r.ka}, {r.kp});
    const ProbTable y_given_kazdp = cond_table(j, {r.ka, r.z, r.dp}, {r.y});
    const ProbTable ka_given_da = cond_table(j, {r.da}, {r.ka});
    const ProbTable y_given_kazdpda = cond_table(j, {r.ka, r.z, r.dp, r.da}, {r.y});
    const ProbTable ka_given_dazdp = cond_table(j, {r.da, r.z, r.dp}, {r.ka});

    const std::map<NodeId, std::size_t> slot_of = {{r.kp, KP}, {r.ka, KA}, {r.dp, D}, {r.da, DA}, {r.z, Z}, {r.y, Y}};
    auto slots = [&](const ProbTable& t) {
        std::vector<std::size_t> out;
        for (const auto& v : t.variables()) out.push_back(slot_of.at(v));
        return out;
    };
    const Term t_z{&z_given_dpda, slots(z_given_dpda)};
    const Term t_y{&y_given_zkakp, slots(y_given_zkakp)};
    auto line = [&](std::vector<Term> terms) { return sum_product(cards, terms, {D, Y}, out_vars); };

    std::vector<ProbTable> lines;
    lines.push_back(do_table(scm, {r.dp}, {r.dp}, {r.y}));
    lines.push_back(line({t_z, {&da_given_ka, {KA, DA}}, {&ka, {KA}}, {&kp, {KP}}, t_y}));
    lines.push_back(line({t_y, {&kp_given_dp, {D2, KP}}, {&dp, {D2}}, t_z,
                          {&da_given_ka, {KA, DA}}, {&ka, {KA}}}));
    lines.push_back(line({{&y_given_kpkazdp, {KP, KA, Z, D2, Y}}, {&kp_given_dpzka, {D2, Z, KA, KP}}, {&dp, {D2}},
                          {&da_given_ka, {KA, DA}}, {&ka, {KA}}, t_z}));
    lines.push_back(line({{&y_given_kazdp, {KA, Z, D2, Y}}, {&dp, {D2}}, {&da_given_ka, {KA, DA}}, {&ka, {KA}}, t_z}));
    lines.push_back(line({{&y_given_kazdp, {KA, Z, D2, Y}}, {&dp, {D2}}, {&ka_given_da, {DA, KA}}, {&da, {DA}}, t_z}));
    lines.push_back(line({{&y_given_kazdpda, {KA, Z, D2, DA, Y}}, {&ka_given_dazdp, {DA, Z, D2, KA}}, t_z, {&dp, {D2}},
                          {&da, {DA}}}));
    lines.push_back(adjustment_line(scm, j, r));

    static const char* labels[] = {"13", "13a", "13b", "13c", "13d", "13e", "13f"};
    std::vector<StepReport> out;
    for (std::size_t k = 0; k + 1 < lines.size(); ++k) out.push_back(compare(labels[k], lines[k], lines[k + 1], tolerance));
    return out;
}

std::vector<StepReport> verify_multiworld_chain(const DiscreteScm& scm, const FrontDoorRoles& r, double tolerance) {
    const Dag& g = scm.dag();
    require_two_modality_topology(g, r);
    const ProbTable j = joint(scm);

    // Slots: intervened d, summed d', D_A, Z, Y.
    enum : std::size_t { D, D2, DA, Z, Y };
    const std::vector<std::size_t> cards = {scm.cardinality(r.dp), scm.cardinality(r.dp), scm.cardinality(r.da),
                                            scm.cardinality(r.z), scm.cardinality(r.y)};
    const std::vector<NodeId> out_vars = {r.dp, r.y};
    auto line = [&](std::vector<Term> terms) { return sum_product(cards, terms, {D, Y}, out_vars); };

    const ProbTable y_do_zda = do_table(scm, {r.dp}, {r.dp, r.z, r.da}, {r.y});
    const ProbTable zda_do = do_table(scm, {r.dp}, {r.dp}, {r.z, r.da});
    const ProbTable z_do_da = do_table(scm, {r.dp}, {r.dp, r.da}, {r.z});
    const ProbTable da_do = do_table(scm, {r.dp}, {r.dp}, {r.da});
    const ProbTable da = cond_table(j, {}, {r.da});
    const ProbTable z_given_dpda = cond_table(j, {r.dp, r.da}, {r.z});
    const ProbTable y_do_dp_do_z = do_table(scm, {r.dp, r.z}, {r.dp, r.z, r.da}, {r.y});
    const ProbTable y_do_z = do_table(scm, {r.z}, {r.z, r.da}, {r.y});

    const Term t_y_do{&y_do_zda, {D, Z, DA, Y}};
    const Term t_z_obs{&z_given_dpda, {D, DA, Z}};
    const Term t_da{&da, {DA}};

    std::vector<ProbTable> lines;
    lines.push_back(do_table(scm, {r.dp}, {r.dp}, {r.y}));
    lines.push_back(line({t_y_do, {&zda_do, {D, Z, DA}}}));
    lines.push_back(line({t_y_do, {&z_do_da, {D, DA, Z}}, {&da_do, {D, DA}}}));
    lines.push_back(line({t_y_do, {&z_do_da, {D, DA, Z}}, t_da}));
    lines.push_back(line({t_y_do, t_z_obs, t_da}));
    lines.push_back(line({{&y_do_dp_do_z, {D, Z, DA, Y}}, t_z_obs, t_da}));
    lines.push_back(line({{&y_do_z, {Z, DA, Y}}, t_z_obs, t_da}));
    lines.push_back(adjustment_line(scm, j, r));

    static const char* labels[] = {"14a", "14b", "14c", "14d", "14e", "14f", "14g"};
    std::vector<StepReport> out;
    for (std::size_t k = 0; k + 1 < lines.size(); ++k) out.push_back(compare(labels[k], lines[k], lines[k + 1], tolerance));

    auto justify = [&](std::size_t k, std::string text, bool holds) {
        out[k].justification = std::move(text);
        out[k].rule_holds = holds;
    };
    justify(2, "rule 3: (" + r.da + " _|_ " + r.dp + ") with " + r.dp + " barred",
            rule_applicable(g, 3, {}, {r.da}, {r.dp}, {}));
    justify(3, "rule 2: (" + r.z + " _|_ " + r.dp + " | " + r.da + ") with " + r.dp + " underbarred",
            rule_applicable(g, 2, {}, {r.z}, {r.dp}, {r.da}));
    justify(4, "rule 2: (" + r.y + " _|_ " + r.z + " | " + r.dp + ", " + r.da + ") with " + r.dp + " barred, " + r.z +
                   " underbarred",
            rule_applicable(g, 2, {r.dp}, {r.y}, {r.z}, {r.da}));
    justify(5, "rule 3: (" + r.y + " _|_ " + r.dp + " | " + r.z + ", " + r.da + ") with " + r.z + " and " + r.dp +
                   " barred",
            rule_applicable(g, 3, {r.z}, {r.y}, {r.dp}, {r.da}));
    justify(6, "back-door: {" + r.da + ", " + r.dp + "} blocks every back-door path from " + r.z + " to " + r.y,
            check_backdoor_criterion(g, r.z, r.y, {r.dp, r.da}).satisfied);
    return out;
}

}  // namespace imml::causal
