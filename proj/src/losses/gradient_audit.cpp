#include "imml/losses/gradient_audit.hpp"

#include <algorithm>

namespace imml::losses {

namespace {

Tensor random_tensor(std::mt19937_64& rng, std::size_t r, std::size_t c) {
    std::normal_distribution<double> g;
    std::vector<double> d(r * c);
    for (auto& v : d) v = g(rng);
    return Tensor::constant(r, c, std::move(d));
}

}  // namespace

GradientCase random_gradient_case(std::mt19937_64& rng, bool default_beta) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    GradientCase c;
    const std::size_t n = 2 + rng() % 5, d = 2 + rng() % 3, k = 2 + rng() % 3;
    c.cfg.tau = 0.2 + 0.8 * u(rng);
    c.cfg.n_unpaired = 1 + rng() % (n - 1);
    c.cfg.gamma1 = 0.1 + u(rng);
    c.cfg.gamma2 = 0.1 + 2.0 * u(rng);
    if (!default_beta) {
        c.cfg.beta_a = 0.5 + 2.5 * u(rng);
        c.cfg.beta_b = 0.5 + 2.5 * u(rng);
    }
    c.spec.kind = rng() % 2 ? FusionSpec::Kind::concat : FusionSpec::Kind::weighted_sum;
    for (std::size_t i = 0; i < n; ++i) c.labels.push_back(one_hot(rng() % k, k));
    c.sampler_seed = rng();
    const std::size_t fused = c.spec.kind == FusionSpec::Kind::concat ? 2 * d : d;
    c.points = {random_tensor(rng, n, d), random_tensor(rng, n, d), random_tensor(rng, fused, k),
                random_tensor(rng, d, k)};
    return c;
}

ObjectiveFn mdke_objective(const GradientCase& c) {
    return [&c](const std::vector<Tensor>& x) { return mdke_loss({x[0], x[1]}, c.cfg); };
}

ObjectiveFn beta_objective(const GradientCase& c) {
    return [&c](const std::vector<Tensor>& x) {
        std::mt19937_64 sampler(c.sampler_seed);
        return beta_loss(x[0], {x[1]}, c.labels, [&](const Tensor& z) { return ad::matmul(z, x[2]); }, c.cfg, c.spec,
                         sampler);
    };
}

ObjectiveFn combined_objective(const GradientCase& c) {
    return [&c](const std::vector<Tensor>& x) {
        const Tensor base = ad::softmax_xent(ad::matmul(x[0], x[3]), label_matrix(c.labels));
        return imml_loss(mdke_objective(c)(x), beta_objective(c)(x), base, c.cfg);
    };
}

std::vector<std::pair<double, double>> coordinate_gradients(const ObjectiveFn& f, const std::vector<Tensor>& points,
                                                            double h) {
    ad::Tape tape;
    std::vector<Tensor> leaves;
    for (const auto& p : points) leaves.push_back(tape.leaf(p));
    tape.backward(f(leaves));
    std::vector<std::pair<double, double>> out;
    for (std::size_t t = 0; t < points.size(); ++t) {
        const auto analytic = leaves[t].grad();
        for (std::size_t i = 0; i < points[t].size(); ++i) {
            auto at = [&](double delta) {
                auto moved = points;
                auto d = points[t].data();
                d[i] += delta;
                moved[t] = Tensor::constant(points[t].rows(), points[t].cols(), std::move(d));
                return f(moved).item();
            };
            out.emplace_back(analytic[i], (at(h) - at(-h)) / (2 * h));
        }
    }
    return out;
}

GradientAudit audit_gradients(std::size_t trials, std::uint64_t seed, double h) {
    std::mt19937_64 rng(seed);
    GradientAudit a;
    a.trials = trials;
    for (std::size_t t = 0; t < trials; ++t) {
        const GradientCase c = random_gradient_case(rng);
        a.mdke = std::max(a.mdke, ad::grad_check(mdke_objective(c), {c.points[0], c.points[1]}, h));
        a.beta = std::max(a.beta, ad::grad_check(beta_objective(c), c.points, h));
        a.combined = std::max(a.combined, ad::grad_check(combined_objective(c), c.points, h));
    }
    return a;
}

}  // namespace imml::losses
