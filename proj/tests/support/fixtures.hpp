#pragma once

#include <map>
#include <string>
#include <vector>

#include "imml/causal/do_calculus.hpp"
#include "imml/causal/scm.hpp"

namespace fixtures {

using namespace imml::causal;

inline std::vector<std::string> labels(std::size_t k) {
    std::vector<std::string> out;
    for (std::size_t v = 0; v < k; ++v) out.push_back(std::to_string(v));
    return out;
}

// CPT of a node that copies `parent` (same binary domain).
inline Cpt copy_of(const NodeId& parent) { return {{parent}, {1, 0, 0, 1}}; }

inline Cpt coin(double p1) { return {{}, {1 - p1, p1}}; }

// Binary two-modality model with D_P = K_P, D_A = K_A, Z = D_P and Y = Z.
inline DiscreteScm two_modality_copies(double p_kp = 0.3, double p_ka = 0.6) {
    Dag g = two_modality_dag();
    std::map<NodeId, std::vector<std::string>> dom;
    for (const auto& n : g.nodes()) dom[n] = labels(2);
    std::map<NodeId, Cpt> cpts;
    cpts["K_P"] = coin(p_kp);
    cpts["K_A"] = coin(p_ka);
    cpts["D_P"] = copy_of("K_P");
    cpts["D_A"] = copy_of("K_A");
    // Z over parents (D_A, D_P), last fastest: Z = D_P.
    cpts["Z"] = {{"D_A", "D_P"}, {1, 0, 0, 1, 1, 0, 0, 1}};
    // Y over parents (K_A, K_P, Z): Y = Z.
    std::vector<double> y;
    for (int r = 0; r < 8; ++r) {
        const int z = r % 2;
        y.push_back(z == 0 ? 1.0 : 0.0);
        y.push_back(z == 1 ? 1.0 : 0.0);
    }
    cpts["Y"] = {{"K_A", "K_P", "Z"}, y};
    return DiscreteScm(g, dom, cpts);
}

inline DiscreteScm uniform_scm(const Dag& g, std::size_t k = 2) {
    std::map<NodeId, std::vector<std::string>> dom;
    for (const auto& n : g.nodes()) dom[n] = labels(k);
    std::map<NodeId, Cpt> cpts;
    for (const auto& n : g.nodes()) {
        Cpt c;
        c.parents = g.parents(n);
        std::size_t rows = 1;
        for (std::size_t i = 0; i < c.parents.size(); ++i) rows *= k;
        c.probs.assign(rows * k, 1.0 / static_cast<double>(k));
        cpts[n] = c;
    }
    return DiscreteScm(g, dom, cpts);
}

}  // namespace fixtures
