#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "imml/harness/model.hpp"
#include "imml/losses/losses.hpp"

namespace imml::harness {

using Rows = std::vector<std::vector<double>>;

inline constexpr double kInequalityTolerance = 1e-12;

/// Outcome of checking lhs <= rhs on every instance. Worst means smallest
/// slack rhs - lhs.
struct InequalityReport {
    std::string label;
    std::size_t instances = 0;
    double worst_lhs = 0.0;
    double worst_rhs = 0.0;
    double worst_slack = 0.0;
    bool passed = true;
};

/// Mean feature per class; a class with no rows gets the zero vector.
Rows class_means(const Rows& features, const std::vector<std::size_t>& y, std::size_t classes);

/// sqrt(E ||f - mu_y||^2) with mu_y the empirical class means.
double conditional_deviation(const Rows& features, const std::vector<std::size_t>& y, std::size_t classes);

/// -E<u, mu_y> - sqrt(E ||v - mu_y||^2) <= -E<u, v> for unit anchors u and
/// their partners v. One instance: the whole batch.
InequalityReport check_cauchy_schwarz_step(const Rows& anchors, const Rows& partners,
                                           const std::vector<std::size_t>& y, const Rows& means);

/// exp(<a, mu_y>) <= E_{x|y} exp(<a, f(x)>) for every class present and every anchor.
InequalityReport check_jensen_step(const Rows& features, const std::vector<std::size_t>& y, const Rows& means,
                                   const Rows& anchors);
/// Anchors are the features themselves.
InequalityReport check_jensen_step(const Rows& features, const std::vector<std::size_t>& y, const Rows& means);

/// CE(sum_m phi_m z^m, y) <= sum_m phi_m CE(z^m, y) per sample.
/// logits[m] holds one row per sample. Throws std::invalid_argument when phi
/// is off the simplex or shapes disagree.
InequalityReport check_convexity_step(const std::vector<Rows>& logits, const std::vector<double>& phi,
                                      const std::vector<std::size_t>& y);

struct EpsilonDecay {
    std::vector<std::pair<std::size_t, double>> samples;  // (R, eps(R))
    double slope = 0.0;                                    // least squares in log-log
};

/// eps(R) = mean over anchors and repetitions of |log mean_j exp(<a, z_j>) - LogE(a)|
/// with z_j drawn with replacement from `pool` and LogE the full-pool value.
EpsilonDecay estimate_epsilon(const Rows& anchors, const Rows& pool, const std::vector<std::size_t>& r_values,
                              std::size_t repetitions, std::mt19937_64& rng);

inline const std::vector<std::size_t> kEpsilonR = {4, 16, 64, 256, 1024};

struct ModalityBound {
    std::string name;
    double mdke = 0.0;       // per-anchor contrastive term against the next modality
    double deviation = 0.0;  // sqrt Var(Nf^m | y)
};

struct BoundReport {
    double gerror = 0.0;
    std::vector<double> phi;
    std::vector<ModalityBound> modalities;
    std::size_t n_neg = 0;
    double log_term = 0.0;  // log(N_neg / K)
    EpsilonDecay epsilon;
    std::vector<InequalityReport> step_checks;

    bool passed() const;
};

/// Every component on `s`. Contrastive terms use consecutive batches of
/// batch_size; eps(R) uses modality P features, the first 32 rows as anchors
/// and the rest as the pool.
BoundReport bound_report(const Model& m, const Split& s, const losses::LossConfig& cfg, std::size_t batch_size,
                         std::uint64_t seed);

}  // namespace imml::harness
