#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "imml/harness/bounds.hpp"
#include "imml/harness/stats.hpp"
#include "imml/harness/train.hpp"

namespace imml::harness {

using nlohmann::json;

struct SweepConfig {
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<double> gamma1 = {0.1, 0.01};
    std::vector<double> gamma2 = {0.1, 1.0};
    std::vector<double> mask_grid = {0.0, 0.2, 0.4, 0.6, 0.8};
};

/// Sections "data", "model", "loss", "optimizer", "sweep"; every key optional.
struct ExperimentConfig {
    SynthConfig data;
    ModelConfig model;
    TrainConfig train;
    SweepConfig sweep;

    /// Same seed for data, initialization and training.
    void set_seed(std::uint64_t seed);
};

/// Throws std::invalid_argument on unknown keys or wrong types.
ExperimentConfig experiment_from_json(const json& j);
json to_json(const ExperimentConfig& c);

/// Data, model and training for one seed.
TrainResult run_training(const ExperimentConfig& c, Dataset* data_out = nullptr);

struct Comparison {
    std::vector<std::uint64_t> seeds;
    std::vector<double> baseline;
    std::vector<double> imml;
    std::vector<std::pair<double, double>> chosen_gammas;
    double mean_baseline = 0.0;
    double mean_imml = 0.0;
    double p_value = 1.0;
    bool degenerate = false;
};

/// Per seed: baseline (gamma1 = gamma2 = 0) test accuracy against the best
/// validation run over the gamma grid.
Comparison compare_baseline_imml(const ExperimentConfig& c);

json to_json(const InequalityReport& r);
json to_json(const BoundReport& r);
json to_json(const Comparison& c);

}  // namespace imml::harness
