#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "imml/ad/tensor.hpp"

namespace imml::losses {

using ad::Tensor;

class LossError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonPositiveInput : public LossError {
public:
    using LossError::LossError;
};

class DimensionMismatch : public LossError {
public:
    using LossError::LossError;
};

class NonSimplexInput : public LossError {
public:
    using LossError::LossError;
};

class BatchTooSmall : public LossError {
public:
    using LossError::LossError;
};

class InvalidConfig : public LossError {
public:
    using LossError::LossError;
};

struct LossConfig {
    double tau = 0.5;
    double gamma1 = 0.1;
    double gamma2 = 0.1;
    std::size_t n_unpaired = 2;
    double beta_a = 0.1;
    double beta_b = 0.1;
    std::size_t proj_dim = 16;

    /// Throws InvalidConfig. Batch-size limits are checked where the batch is known.
    void validate() const;
};

struct FusionSpec {
    enum class Kind { concat, weighted_sum };
    Kind kind = Kind::concat;
    /// Empty means lambda is drawn from Beta(beta_a, beta_b) per fused pair.
    std::optional<double> fixed_lambda;
};

/// One row per fused (i, i') pair.
struct MixedBatch {
    Tensor fused;
    Tensor soft_labels;
    std::vector<double> lambdas;
    std::vector<std::size_t> predominant_rows;
    std::vector<std::size_t> auxiliary_rows;
};

enum class TargetLoss { cross_entropy, mse };

/// 1-based wrap ((x - 1) mod n) + 1.
long long mod_index(long long x, long long n);

/// lambda ~ Beta(a, b) through two gamma draws.
double sample_beta(std::mt19937_64& rng, double a, double b);

/// Contrastive term of anchors u against partners v. Both already unit rows.
Tensor mdke_pair_term(const Tensor& u, const Tensor& v, double tau);

/// Sum over m of the contrastive term between modality m and [m+1]_M.
/// projected[m] holds one row per sample.
Tensor mdke_loss(const std::vector<Tensor>& projected, const LossConfig& cfg);

/// F[lambda h_p, (1 - lambda) h_a^1 / (M - 1), ...] with one lambda per row.
Tensor fuse_unpaired(const Tensor& h_p, const std::vector<Tensor>& h_a, const std::vector<double>& lambdas,
                     const FusionSpec& spec);
Tensor fuse_unpaired(const Tensor& h_p, const std::vector<Tensor>& h_a, double lambda, const FusionSpec& spec);

std::vector<double> mixed_label(const std::vector<double>& y_p, const std::vector<std::vector<double>>& y_a,
                                double lambda);

/// Pairs every sample i with i' = [i+1]..[i+N] (1-based) and mixes features and labels.
MixedBatch mix_unpaired(const Tensor& h_p, const std::vector<Tensor>& h_a,
                        const std::vector<std::vector<double>>& labels, const LossConfig& cfg,
                        const FusionSpec& spec, std::mt19937_64& rng);

using Predictor = std::function<Tensor(const Tensor&)>;

/// Sum over mixed pairs of l(Y_z, predict(z)).
Tensor beta_loss(const Tensor& h_p, const std::vector<Tensor>& h_a, const std::vector<std::vector<double>>& labels,
                 const Predictor& predict, const LossConfig& cfg, const FusionSpec& spec, std::mt19937_64& rng,
                 TargetLoss loss = TargetLoss::cross_entropy);

/// gamma1 * mdke + gamma2 * beta + base.
Tensor imml_loss(const Tensor& mdke, const Tensor& beta, const Tensor& base, const LossConfig& cfg);

/// Rows of one-hot vectors as a constant tensor.
Tensor label_matrix(const std::vector<std::vector<double>>& labels);
std::vector<double> one_hot(std::size_t k, std::size_t classes);

}  // namespace imml::losses
