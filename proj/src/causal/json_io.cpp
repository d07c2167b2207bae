#include "imml/causal/json_io.hpp"

#include <fstream>

namespace imml::causal {

namespace {

constexpr const char* kCptLayout =
    "probs are row-major over the listed parents (last parent fastest); each row lists P(node=v | parents) for v in "
    "domain order";

}  // namespace

Dag dag_from_json(const json& j) {
    try {
        const auto nodes = j.at("nodes").get<std::vector<NodeId>>();
        EdgeList edges;
        for (const auto& e : j.value("edges", json::array())) {
            if (!e.is_array() || e.size() != 2) throw InvalidGraph("each edge must be a [from, to] pair");
            edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
        }
        if (!j.contains("observed")) return Dag::build(nodes, edges);
        const auto observed = j.at("observed").get<std::vector<NodeId>>();
        return Dag::build(nodes, edges, NodeSet(observed.begin(), observed.end()));
    } catch (const json::exception& e) {
        throw InvalidGraph(std::string("malformed graph JSON: ") + e.what());
    }
}

json to_json(const Dag& g) {
    json edges = json::array();
    for (const auto& [a, b] : g.edges()) edges.push_back({a, b});
    return {{"nodes", g.nodes()}, {"edges", edges}, {"observed", g.observed()}};
}

DiscreteScm scm_from_json(const json& j) {
    Dag g = dag_from_json(j);
    try {
        std::map<NodeId, std::vector<std::string>> domains;
        for (const auto& [node, labels] : j.at("domains").items()) {
            std::vector<std::string> values;
            for (const auto& l : labels) values.push_back(l.is_string() ? l.get<std::string>() : l.dump());
            domains[node] = std::move(values);
        }
        std::map<NodeId, Cpt> cpts;
        for (const auto& [node, c] : j.at("cpts").items())
            cpts[node] = Cpt{c.value("parents", std::vector<NodeId>{}), c.at("probs").get<std::vector<double>>()};
        return DiscreteScm(std::move(g), std::move(domains), std::move(cpts));
    } catch (const json::exception& e) {
        throw InvalidScm(std::string("malformed SCM JSON: ") + e.what());
    }
}

json to_json(const DiscreteScm& scm) {
    json out = to_json(scm.dag());
    out["cpt_layout"] = kCptLayout;
    out["domains"] = scm.domains();
    json cpts = json::object();
    for (const auto& [node, cpt] : scm.cpts()) cpts[node] = {{"parents", cpt.parents}, {"probs", cpt.probs}};
    out["cpts"] = cpts;
    return out;
}

json to_json(const ProbTable& t) {
    return {{"variables", t.variables()}, {"cards", t.cards()}, {"values", t.values()}};
}

json to_json(const Path& p) { return p.to_string(); }

json to_json(const CriterionReport& r) {
    json out = {{"satisfied", r.satisfied}};
    out["violated_condition"] = r.violated_condition ? json(*r.violated_condition) : json(nullptr);
    out["witness_path"] = r.witness_path ? to_json(*r.witness_path) : json(nullptr);
    if (!r.detail.empty()) out["detail"] = r.detail;
    json alpha = json::array(), beta = json::array();
    for (const auto& p : r.alpha_paths) alpha.push_back(to_json(p));
    for (const auto& p : r.beta_paths) beta.push_back(to_json(p));
    out["alpha_paths"] = alpha;
    out["beta_paths"] = beta;
    out["unobserved_adjustment"] = r.unobserved_adjustment;
    return out;
}

json to_json(const StepReport& r) {
    json out = {{"step_label", r.step_label},
                {"lhs", to_json(r.lhs)},
                {"rhs", to_json(r.rhs)},
                {"max_abs_diff", r.max_abs_diff},
                {"passed", r.passed}};
    if (r.justification) out["justification"] = *r.justification;
    if (r.rule_holds) out["rule_holds"] = *r.rule_holds;
    return out;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CausalError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw CausalError("'" + path + "' is not valid JSON: " + e.what());
    }
}

}  // namespace imml::causal
