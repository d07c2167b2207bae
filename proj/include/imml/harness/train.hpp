#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imml/harness/model.hpp"
#include "imml/losses/losses.hpp"

namespace imml::harness {

struct TrainConfig {
    losses::LossConfig loss;
    double lr = 0.1;
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    /// Objective values above this count as divergence.
    double divergence_limit = 1e8;
    std::uint64_t seed = 0;
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double objective = 0.0;
    double mdke = 0.0;
    double beta = 0.0;
    double base = 0.0;
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
};

struct TrainResult {
    Model model;
    std::vector<EpochMetrics> log;
};

struct BatchObjective {
    Tensor objective;
    Tensor mdke;
    Tensor beta;
    Tensor base;
};

/// (gamma1 L_mdke + gamma2 L_beta + L) / N* for one minibatch. Loss terms with
/// a zero weight are skipped and reported as 0.
BatchObjective batch_objective(const Model& m, const Split& batch, std::size_t classes,
                               const losses::LossConfig& cfg, std::mt19937_64& rng);

/// Mini-batch gradient descent with a fixed step. Each epoch reshuffles the
/// training split and drops the last partial batch. Batches hold
/// min(batch_size, n_train) samples.
/// Throws losses::BatchTooSmall, NonFiniteLoss.
TrainResult train(Model model, const Dataset& data, const TrainConfig& cfg);

/// Accuracy after zeroing round(mask_p * hidden) random P feature dims and
/// round(mask_a * hidden) A dims. One mask per call, drawn from `seed`.
double evaluate(const Model& m, const Split& s, double mask_p, double mask_a, std::uint64_t seed);

struct HeatmapCell {
    double mask_p = 0.0;
    double mask_a = 0.0;
    double accuracy = 0.0;
};

std::vector<HeatmapCell> masking_sweep(const Model& m, const Split& s, const std::vector<double>& grid,
                                       std::uint64_t seed);

/// Fixed-point CSV text.
std::string metrics_csv(const std::vector<EpochMetrics>& log);
std::string heatmap_csv(const std::vector<HeatmapCell>& cells);

}  // namespace imml::harness
