#include "imml/harness/experiment.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace imml::harness {

namespace {

const json& section(const json& root, const char* name, const std::set<std::string>& keys) {
    static const json empty = json::object();
    if (!root.contains(name)) return empty;
    const json& s = root.at(name);
    if (!s.is_object()) throw std::invalid_argument(std::string("section '") + name + "' must be an object");
    for (auto it = s.begin(); it != s.end(); ++it)
        if (!keys.count(it.key())) throw std::invalid_argument(std::string("unknown key '") + name + "." + it.key() + "'");
    return s;
}

template <class T>
void read(const json& s, const char* key, T& out) {
    if (!s.contains(key)) return;
    try {
        out = s.at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad value for '") + key + "': " + e.what());
    }
}

}  // namespace

void ExperimentConfig::set_seed(std::uint64_t seed) {
    data.seed = seed;
    model.seed = seed;
    train.seed = seed;
}

ExperimentConfig experiment_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!std::set<std::string>{"data", "model", "loss", "optimizer", "sweep", "seed"}.count(it.key()))
            throw std::invalid_argument("unknown section '" + it.key() + "'");

    ExperimentConfig c;
    const auto& d = section(j, "data", {"n_train", "n_val", "n_test", "dim_p", "dim_a", "classes", "predominance",
                                        "noise_ratio", "separation"});
    read(d, "n_train", c.data.n_train);
    read(d, "n_val", c.data.n_val);
    read(d, "n_test", c.data.n_test);
    read(d, "dim_p", c.data.dim_p);
    read(d, "dim_a", c.data.dim_a);
    read(d, "classes", c.data.classes);
    read(d, "predominance", c.data.predominance);
    read(d, "noise_ratio", c.data.noise_ratio);
    read(d, "separation", c.data.separation);

    const auto& m = section(j, "model", {"hidden"});
    read(m, "hidden", c.model.hidden);

    const auto& l = section(j, "loss", {"tau", "gamma1", "gamma2", "n_unpaired", "beta_a", "beta_b", "proj_dim"});
    auto& lc = c.train.loss;
    read(l, "tau", lc.tau);
    read(l, "gamma1", lc.gamma1);
    read(l, "gamma2", lc.gamma2);
    read(l, "n_unpaired", lc.n_unpaired);
    read(l, "beta_a", lc.beta_a);
    read(l, "beta_b", lc.beta_b);
    read(l, "proj_dim", lc.proj_dim);
    c.model.proj_dim = lc.proj_dim;

    const auto& o = section(j, "optimizer", {"lr", "epochs", "batch_size", "divergence_limit"});
    read(o, "lr", c.train.lr);
    read(o, "epochs", c.train.epochs);
    read(o, "batch_size", c.train.batch_size);
    read(o, "divergence_limit", c.train.divergence_limit);

    const auto& s = section(j, "sweep", {"seeds", "gamma1", "gamma2", "mask_grid"});
    read(s, "seeds", c.sweep.seeds);
    read(s, "gamma1", c.sweep.gamma1);
    read(s, "gamma2", c.sweep.gamma2);
    read(s, "mask_grid", c.sweep.mask_grid);

    std::uint64_t seed = 0;
    read(j, "seed", seed);
    c.set_seed(seed);
    c.data.validate();
    lc.validate();
    return c;
}

json to_json(const ExperimentConfig& c) {
    const auto& l = c.train.loss;
    return {
        {"data",
         {{"n_train", c.data.n_train},
          {"n_val", c.data.n_val},
          {"n_test", c.data.n_test},
          {"dim_p", c.data.dim_p},
          {"dim_a", c.data.dim_a},
          {"classes", c.data.classes},
          {"predominance", c.data.predominance},
          {"noise_ratio", c.data.noise_ratio},
          {"separation", c.data.separation}}},
        {"model", {{"hidden", c.model.hidden}}},
        {"loss",
         {{"tau", l.tau},
          {"gamma1", l.gamma1},
          {"gamma2", l.gamma2},
          {"n_unpaired", l.n_unpaired},
          {"beta_a", l.beta_a},
          {"beta_b", l.beta_b},
          {"proj_dim", l.proj_dim}}},
        {"optimizer",
         {{"lr", c.train.lr},
          {"epochs", c.train.epochs},
          {"batch_size", c.train.batch_size},
          {"divergence_limit", c.train.divergence_limit}}},
        {"sweep",
         {{"seeds", c.sweep.seeds},
          {"gamma1", c.sweep.gamma1},
          {"gamma2", c.sweep.gamma2},
          {"mask_grid", c.sweep.mask_grid}}},
        {"seed", c.train.seed},
    };
}

TrainResult run_training(const ExperimentConfig& c, Dataset* data_out) {
    Dataset d = generate_synth(c.data);
    Model m = init_model(c.data.dim_p, c.data.dim_a, c.data.classes, c.model);
    TrainResult r = train(std::move(m), d, c.train);
    if (data_out) *data_out = std::move(d);
    return r;
}

Comparison compare_baseline_imml(const ExperimentConfig& c) {
    Comparison out;
    for (auto seed : c.sweep.seeds) {
        ExperimentConfig run = c;
        run.set_seed(seed);
        const Dataset d = generate_synth(run.data);
        const Model init = init_model(run.data.dim_p, run.data.dim_a, run.data.classes, run.model);

        TrainConfig base = run.train;
        base.loss.gamma1 = base.loss.gamma2 = 0.0;
        const Model baseline = train(init, d, base).model;
        out.baseline.push_back(evaluate(baseline, d.test, 0.0, 0.0, seed));

        double best_val = -1.0, best_test = 0.0;
        std::pair<double, double> best_g{0.0, 0.0};
        for (double g1 : c.sweep.gamma1)
            for (double g2 : c.sweep.gamma2) {
                TrainConfig tc = run.train;
                tc.loss.gamma1 = g1;
                tc.loss.gamma2 = g2;
                const Model trained = train(init, d, tc).model;
                const double val = evaluate(trained, d.val, 0.0, 0.0, seed);
                if (val > best_val) {
                    best_val = val;
                    best_test = evaluate(trained, d.test, 0.0, 0.0, seed);
                    best_g = {g1, g2};
                }
            }
        out.seeds.push_back(seed);
        out.imml.push_back(best_test);
        out.chosen_gammas.push_back(best_g);
    }
    const double n = static_cast<double>(out.seeds.size());
    for (std::size_t i = 0; i < out.seeds.size(); ++i) {
        out.mean_baseline += out.baseline[i] / n;
        out.mean_imml += out.imml[i] / n;
    }
    if (out.seeds.size() >= 2) {
        try {
            out.p_value = significance_test(out.baseline, out.imml).p_value;
            out.degenerate = out.baseline == out.imml;
        } catch (const DegenerateVariance& e) {
            out.p_value = e.p_value();
            out.degenerate = true;
        }
    }
    return out;
}

json to_json(const InequalityReport& r) {
    return {{"label", r.label},         {"instances", r.instances}, {"worst_lhs", r.worst_lhs},
            {"worst_rhs", r.worst_rhs}, {"worst_slack", r.worst_slack}, {"passed", r.passed}};
}

json to_json(const BoundReport& r) {
    json mods = json::array();
    for (const auto& m : r.modalities) mods.push_back({{"name", m.name}, {"mdke", m.mdke}, {"deviation", m.deviation}});
    json eps = json::array();
    for (const auto& [rv, e] : r.epsilon.samples) eps.push_back({{"R", rv}, {"epsilon", e}});
    json steps = json::array();
    for (const auto& s : r.step_checks) steps.push_back(to_json(s));
    return {{"gerror", r.gerror}, {"phi", r.phi},          {"modalities", mods},
            {"n_neg", r.n_neg},   {"log_term", r.log_term}, {"epsilon", {{"samples", eps}, {"slope", r.epsilon.slope}}},
            {"step_checks", steps}, {"passed", r.passed()}};
}

json to_json(const Comparison& c) {
    json gammas = json::array();
    for (const auto& [g1, g2] : c.chosen_gammas) gammas.push_back({g1, g2});
    return {{"seeds", c.seeds},
            {"baseline", c.baseline},
            {"imml", c.imml},
            {"chosen_gammas", gammas},
            {"mean_baseline", c.mean_baseline},
            {"mean_imml", c.mean_imml},
            {"p_value", c.p_value},
            {"degenerate", c.degenerate},
            {"improved", c.mean_imml >= c.mean_baseline}};
}

}  // namespace imml::harness
