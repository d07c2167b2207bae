// Command-line entry point: causal checks, do-calculus certification and the
// training laboratory. Exit 0 on success, 1 on a failed verification, 2 on
// usage or input errors.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "imml/causal/adjustment.hpp"
#include "imml/causal/json_io.hpp"
#include "imml/harness/experiment.hpp"
#include "imml/losses/gradient_audit.hpp"

namespace causal = imml::causal;
namespace harness = imml::harness;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr double kDefaultCausalTolerance = 1e-10;

// --tolerance wins, then IMML_TOLERANCE, then the built-in default.
double tolerance(double flag, double fallback) {
    if (flag >= 0.0) return flag;
    if (const char* env = std::getenv("IMML_TOLERANCE")) {
        try {
            std::size_t used = 0;
            const double v = std::stod(env, &used);
            if (used == std::string(env).size() && v >= 0.0) return v;
        } catch (const std::exception&) {
        }
        throw UsageError(std::string("IMML_TOLERANCE is not a non-negative number: ") + env);
    }
    return fallback;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot write " + path);
    f << text;
    if (!f) throw UsageError("cannot write " + path);
}

void emit(const json& j, const std::string& path) { emit(j.dump(2) + "\n", path); }

causal::NodeSet to_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

harness::ExperimentConfig load_experiment(const std::string& path, long long seed) {
    auto c = harness::experiment_from_json(causal::read_json_file(path));
    if (seed >= 0) c.set_seed(static_cast<std::uint64_t>(seed));
    return c;
}

std::vector<double> csv_column(const std::string& path, const std::string& column) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot read " + path);
    std::string line;
    if (!std::getline(f, line)) throw UsageError(path + " is empty");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    const auto it = std::find(header.begin(), header.end(), column);
    if (it == header.end()) throw UsageError(path + " has no column '" + column + "'");
    const auto idx = static_cast<std::size_t>(it - header.begin());
    std::vector<double> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        for (std::size_t i = 0; i <= idx; ++i)
            if (!std::getline(ss, cell, ',')) throw UsageError(path + ": short row '" + line + "'");
        try {
            out.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw UsageError(path + ": not a number '" + cell + "'");
        }
    }
    return out;
}

struct AdjustArgs {
    std::string scm, x, y, method = "beta", x_value, out;
    std::vector<std::string> z, da;
    bool force = false;
    double tol = -1.0;
};

int run_adjust(const AdjustArgs& a) {
    const auto scm = causal::scm_from_json(causal::read_json_file(a.scm));
    const double tol = tolerance(a.tol, kDefaultCausalTolerance);
    std::vector<std::size_t> values;
    if (!a.x_value.empty()) {
        values.push_back(scm.value_index(a.x, a.x_value));
    } else {
        for (std::size_t v = 0; v < scm.cardinality(a.x); ++v) values.push_back(v);
    }

    json report = {{"method", a.method}, {"x", a.x},   {"y", a.y},
                   {"z", a.z},           {"d_a", a.da}, {"tolerance", tol}};
    json results = json::array();
    double worst = 0.0;
    try {
        for (auto v : values) {
            causal::ProbTable adjusted;
            if (a.method == "backdoor")
                adjusted = causal::backdoor_adjust(scm, a.x, v, a.y, to_set(a.z), a.force);
            else if (a.method == "frontdoor")
                adjusted = causal::frontdoor_adjust(scm, a.x, v, a.y, to_set(a.z), a.force);
            else
                adjusted = causal::beta_frontdoor_adjust(scm, a.x, v, a.y, to_set(a.z), to_set(a.da), a.force);
            const auto oracle = causal::interventional(scm, a.x, v, a.y);
            const double diff = causal::max_abs_diff(adjusted, oracle);
            worst = std::max(worst, diff);
            results.push_back({{"x_value", scm.domain(a.x)[v]},
                               {"adjusted", causal::to_json(adjusted)},
                               {"oracle", causal::to_json(oracle)},
                               {"max_abs_diff", diff}});
        }
    } catch (const causal::CriterionViolated& e) {
        report["error"] = e.what();
        report["passed"] = false;
        emit(report, a.out);
        return 1;
    }
    report["results"] = results;
    report["max_abs_diff"] = worst;
    report["passed"] = worst <= tol;
    emit(report, a.out);
    return worst <= tol ? 0 : 1;
}

struct VerifyArgs {
    std::string graph, x, y, criterion = "beta", out;
    std::vector<std::string> z, da;
};

int run_verify(const VerifyArgs& a) {
    const auto g = causal::dag_from_json(causal::read_json_file(a.graph));
    causal::CriterionReport r;
    if (a.criterion == "backdoor")
        r = causal::check_backdoor_criterion(g, a.x, a.y, to_set(a.z));
    else if (a.criterion == "frontdoor")
        r = causal::check_frontdoor_criterion(g, a.x, a.y, to_set(a.z));
    else
        r = causal::check_beta_frontdoor_criterion(g, a.x, a.y, to_set(a.z), to_set(a.da));
    json j = causal::to_json(r);
    j["criterion"] = a.criterion;
    j["passed"] = r.satisfied;
    emit(j, a.out);
    return r.satisfied ? 0 : 1;
}

struct DsepArgs {
    std::string graph, out;
    std::vector<std::string> x, y, given;
};

int run_dsep(const DsepArgs& a) {
    const auto g = causal::dag_from_json(causal::read_json_file(a.graph));
    emit(json{{"d_separated", causal::d_separated(g, to_set(a.x), to_set(a.y), to_set(a.given))}}, a.out);
    return 0;
}

struct DocalcArgs {
    std::string scm, chain = "both", out;
    double tol = -1.0;
};

int run_docalc(const DocalcArgs& a) {
    const auto scm = causal::scm_from_json(causal::read_json_file(a.scm));
    const double tol = tolerance(a.tol, kDefaultCausalTolerance);
    const causal::FrontDoorRoles roles;
    json chains = json::object();
    bool ok = true;
    std::vector<causal::StepReport> decomposition, multiworld;
    auto add = [&](const std::string& name, const std::vector<causal::StepReport>& steps) {
        json arr = json::array();
        for (const auto& s : steps) {
            arr.push_back(causal::to_json(s));
            ok = ok && s.passed;
        }
        chains[name] = arr;
    };
    if (a.chain == "13" || a.chain == "both") {
        decomposition = causal::verify_decomposition_chain(scm, roles, tol);
        add("13", decomposition);
    }
    if (a.chain == "14" || a.chain == "both") {
        multiworld = causal::verify_multiworld_chain(scm, roles, tol);
        add("14", multiworld);
    }

    json j = {{"chains", chains}, {"tolerance", tol}};
    // Final lines against the beta adjustment, and against each other.
    const std::vector<const std::vector<causal::StepReport>*> finished = {&decomposition, &multiworld};
    double adj_diff = 0.0;
    for (const auto* steps : finished) {
        if (steps->empty()) continue;
        const auto& end = steps->back().rhs;
        for (std::size_t v = 0; v < scm.cardinality(roles.dp); ++v) {
            const auto adj = causal::beta_frontdoor_adjust(scm, roles.dp, v, roles.y, {roles.z}, {roles.da});
            for (std::size_t yv = 0; yv < scm.cardinality(roles.y); ++yv)
                adj_diff = std::max(adj_diff, std::abs(end.at({{roles.dp, v}, {roles.y, yv}}) - adj.at({{roles.y, yv}})));
        }
    }
    j["adjustment_diff"] = adj_diff;
    ok = ok && adj_diff <= tol;
    if (!decomposition.empty() && !multiworld.empty()) {
        const double d = causal::max_abs_diff(decomposition.back().rhs, multiworld.back().rhs);
        j["endpoint_diff"] = d;
        ok = ok && d <= tol;
    }
    j["passed"] = ok;
    emit(j, a.out);
    return ok ? 0 : 1;
}

struct RunArgs {
    std::string config, out;
    long long seed = -1;
    bool untrained = false;
};

int run_train(const RunArgs& a) {
    const auto c = load_experiment(a.config, a.seed);
    emit(harness::metrics_csv(harness::run_training(c).log), a.out);
    return 0;
}

int run_heatmap(const RunArgs& a) {
    const auto c = load_experiment(a.config, a.seed);
    harness::Dataset d;
    const auto r = harness::run_training(c, &d);
    emit(harness::heatmap_csv(harness::masking_sweep(r.model, d.test, c.sweep.mask_grid, c.train.seed)), a.out);
    return 0;
}

int run_bound(const RunArgs& a) {
    const auto c = load_experiment(a.config, a.seed);
    harness::Model m;
    harness::Dataset d;
    if (a.untrained) {
        d = harness::generate_synth(c.data);
        m = harness::init_model(c.data.dim_p, c.data.dim_a, c.data.classes, c.model);
    } else {
        m = harness::run_training(c, &d).model;
    }
    const auto r = harness::bound_report(m, d.test, c.train.loss, c.train.batch_size, c.train.seed);
    emit(harness::to_json(r), a.out);
    return r.passed() ? 0 : 1;
}

int run_compare(const RunArgs& a) {
    const auto c = load_experiment(a.config, -1);
    emit(harness::to_json(harness::compare_baseline_imml(c)), a.out);
    return 0;
}

struct GradArgs {
    std::size_t trials = 50;
    std::uint64_t seed = 0;
    double h = 1e-5;
    double tol = 1e-4;
    std::string out;
};

int run_gradcheck(const GradArgs& a) {
    const auto audit = imml::losses::audit_gradients(a.trials, a.seed, a.h);
    const bool ok = audit.mdke < a.tol && audit.beta < a.tol && audit.combined < a.tol;
    emit(json{{"trials", audit.trials},
              {"h", a.h},
              {"tolerance", a.tol},
              {"mdke", audit.mdke},
              {"beta", audit.beta},
              {"combined", audit.combined},
              {"passed", ok}},
         a.out);
    return ok ? 0 : 1;
}

struct TtestArgs {
    std::string a, b, column = "val_accuracy", out;
};

int run_ttest(const TtestArgs& a) {
    const auto xa = csv_column(a.a, a.column), xb = csv_column(a.b, a.column);
    json j = {{"column", a.column}, {"n", xa.size()}};
    try {
        const auto r = harness::significance_test(xa, xb);
        j.update({{"t", r.t}, {"p_value", r.p_value}, {"mean_diff", r.mean_diff}, {"degenerate", xa == xb}});
    } catch (const harness::DegenerateVariance& e) {
        j.update({{"t", nullptr}, {"p_value", e.p_value()}, {"mean_diff", e.mean_diff()}, {"degenerate", true}});
    }
    emit(j, a.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal adjustment checks and multimodal training laboratory"};
    app.require_subcommand(1);
    int code = 0;

    AdjustArgs adj;
    VerifyArgs ver;
    auto* scm = app.add_subcommand("scm", "Adjustment evaluation and criterion checks");
    scm->require_subcommand(1);
    auto* sa = scm->add_subcommand("adjust", "Evaluate an adjustment formula against the interventional oracle");
    sa->add_option("--scm", adj.scm, "SCM JSON file")->required();
    sa->add_option("--x", adj.x, "Treatment node")->required();
    sa->add_option("--y", adj.y, "Outcome node")->required();
    sa->add_option("--z", adj.z, "Adjustment or mediator nodes")->delimiter(',');
    sa->add_option("--da", adj.da, "Observed nodes on beta back-door paths")->delimiter(',');
    sa->add_option("--method", adj.method)->check(CLI::IsMember({"backdoor", "frontdoor", "beta"}));
    sa->add_option("--x-value", adj.x_value, "Single treatment label; default all");
    sa->add_flag("--force", adj.force, "Evaluate even when the criterion fails");
    sa->add_option("--tolerance", adj.tol);
    sa->add_option("--out", adj.out);
    sa->callback([&] { code = run_adjust(adj); });

    auto* sv = scm->add_subcommand("verify", "Check a graphical criterion");
    sv->add_option("--graph,--scm", ver.graph, "Graph or SCM JSON file")->required();
    sv->add_option("--x", ver.x)->required();
    sv->add_option("--y", ver.y)->required();
    sv->add_option("--z", ver.z)->delimiter(',');
    sv->add_option("--da", ver.da)->delimiter(',');
    sv->add_option("--criterion", ver.criterion)->check(CLI::IsMember({"backdoor", "frontdoor", "beta"}));
    sv->add_option("--out", ver.out);
    sv->callback([&] { code = run_verify(ver); });

    DsepArgs ds;
    auto* dsep = app.add_subcommand("dsep", "d-separation query");
    dsep->add_option("--graph", ds.graph)->required();
    dsep->add_option("--x", ds.x)->required()->delimiter(',');
    dsep->add_option("--y", ds.y)->required()->delimiter(',');
    dsep->add_option("--given", ds.given)->delimiter(',');
    dsep->add_option("--out", ds.out);
    dsep->callback([&] { code = run_dsep(ds); });

    DocalcArgs dc;
    auto* docalc = app.add_subcommand("docalc", "Derivation-chain certification");
    docalc->require_subcommand(1);
    auto* dv = docalc->add_subcommand("verify", "Verify the decomposition (13) and multi-world (14) chains");
    dv->add_option("--scm", dc.scm)->required();
    dv->add_option("--chain", dc.chain)->check(CLI::IsMember({"13", "14", "both"}));
    dv->add_option("--tolerance", dc.tol);
    dv->add_option("--out", dc.out);
    dv->callback([&] { code = run_docalc(dc); });

    RunArgs tr, hm, bd, cmp;
    auto add_run = [&](const char* name, const char* help, RunArgs& a) {
        auto* s = app.add_subcommand(name, help);
        s->add_option("--config", a.config, "Experiment JSON")->required();
        s->add_option("--seed", a.seed, "Overrides the config seed")->check(CLI::NonNegativeNumber);
        s->add_option("--out", a.out);
        return s;
    };
    add_run("train", "Train from a config; metrics CSV", tr)->callback([&] { code = run_train(tr); });
    add_run("heatmap", "Train, then sweep feature masks; heatmap CSV", hm)->callback([&] { code = run_heatmap(hm); });
    auto* bs = add_run("bound", "Generalization-bound components as JSON", bd);
    bs->add_flag("--untrained", bd.untrained, "Use the initial model");
    bs->callback([&] { code = run_bound(bd); });
    auto* cs = app.add_subcommand("compare", "Baseline against tuned IMML over the sweep seeds");
    cs->add_option("--config", cmp.config)->required();
    cs->add_option("--out", cmp.out);
    cs->callback([&] { code = run_compare(cmp); });

    GradArgs ga;
    auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the loss gradients");
    gc->add_option("--trials", ga.trials)->check(CLI::PositiveNumber);
    gc->add_option("--seed", ga.seed);
    gc->add_option("--step", ga.h, "Central-difference step h");
    gc->add_option("--tolerance", ga.tol);
    gc->add_option("--out", ga.out);
    gc->callback([&] { code = run_gradcheck(ga); });

    TtestArgs tt;
    auto* ts = app.add_subcommand("ttest", "Paired t-test over one column of two metrics CSVs");
    ts->add_option("--a", tt.a)->required();
    ts->add_option("--b", tt.b)->required();
    ts->add_option("--column", tt.column);
    ts->add_option("--out", tt.out);
    ts->callback([&] { code = run_ttest(tt); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return code;
}
