#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "imml/ad/tensor.hpp"

namespace imml::harness {

using ad::Tensor;

class HarnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training objective became NaN, infinite or exceeded the divergence limit.
class NonFiniteLoss : public HarnessError {
public:
    using HarnessError::HarnessError;
};

struct SynthConfig {
    std::size_t n_train = 512;
    std::size_t n_val = 128;
    std::size_t n_test = 512;
    std::size_t dim_p = 8;
    std::size_t dim_a = 8;
    std::size_t classes = 2;
    /// Share of the class-mean separation given to modality P; A gets the rest.
    double predominance = 0.5;
    /// Standard deviation of extra Gaussian noise on both test modalities.
    double noise_ratio = 0.0;
    /// Class means of modality P have norm separation * predominance.
    double separation = 3.0;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument.
    void validate() const;
};

/// Paired bimodal samples. Row i of x_p and x_a share label y[i].
struct Split {
    Tensor x_p;
    Tensor x_a;
    std::vector<std::size_t> y;

    std::size_t size() const { return y.size(); }
    Split rows(const std::vector<std::size_t>& idx) const;
};

struct Dataset {
    Split train;
    Split val;
    Split test;
    std::size_t classes = 0;
};

/// Class-conditional Gaussians around orthogonal class means (random unit
/// means when a modality has fewer dims than classes). Labels are balanced
/// per split. noise_ratio perturbs the test split only, from its own stream,
/// so the clean part of every split is the same for any noise_ratio.
Dataset generate_synth(const SynthConfig& cfg);

/// Copy of `s` with N(0, sigma^2) added to every feature of both modalities.
Split add_noise(const Split& s, double sigma, std::uint64_t seed);

/// Labels as one-hot rows.
std::vector<std::vector<double>> one_hot_rows(const std::vector<std::size_t>& y, std::size_t classes);

}  // namespace imml::harness
