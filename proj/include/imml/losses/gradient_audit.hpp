#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "imml/losses/losses.hpp"

namespace imml::losses {

using ObjectiveFn = std::function<Tensor(const std::vector<Tensor>&)>;

/// One random loss configuration. points = {h_p, h_a, predictor weights,
/// base classifier weights}.
struct GradientCase {
    LossConfig cfg;
    FusionSpec spec;
    std::vector<std::vector<double>> labels;
    std::uint64_t sampler_seed = 0;
    std::vector<Tensor> points;
};

/// Batch, dims, classes, tau, N, gammas, fusion kind and the Beta parameters
/// (in [0.5, 3]) all vary. With default_beta the Beta parameters keep their
/// defaults.
GradientCase random_gradient_case(std::mt19937_64& rng, bool default_beta = false);

/// The returned functions hold a reference to `c`.
ObjectiveFn mdke_objective(const GradientCase& c);
ObjectiveFn beta_objective(const GradientCase& c);
/// gamma1 L_mdke + gamma2 L_beta + cross-entropy of a linear classifier on h_p.
ObjectiveFn combined_objective(const GradientCase& c);

/// (analytic, central-difference) pairs for every coordinate of every point.
std::vector<std::pair<double, double>> coordinate_gradients(const ObjectiveFn& f, const std::vector<Tensor>& points,
                                                            double h);

struct GradientAudit {
    std::size_t trials = 0;
    double mdke = 0.0;
    double beta = 0.0;
    double combined = 0.0;
};

/// Worst grad_check error of each objective over `trials` random cases.
GradientAudit audit_gradients(std::size_t trials, std::uint64_t seed, double h);

}  // namespace imml::losses
