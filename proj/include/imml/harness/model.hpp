#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "imml/harness/data.hpp"

namespace imml::harness {

struct ModelConfig {
    std::size_t hidden = 64;
    std::size_t proj_dim = 16;
    std::uint64_t seed = 0;
};

/// Parameters of one modality branch: encoder tanh(x W + b), per-dimension
/// discriminative weights omega (1 x hidden) and projection head (hidden x proj_dim).
struct Branch {
    Tensor w;
    Tensor b;
    Tensor omega;
    Tensor proj;
};

/// Two branches (P first, then A), softmax-parameterized static fusion
/// weights and a linear classifier over the phi-weighted concatenation
/// [phi_p h_p, phi_a h_a].
struct Model {
    std::array<Branch, 2> branch;
    Tensor fusion_logits;  // 1 x 2
    Tensor cls_w;          // 2*hidden x K
    Tensor cls_b;          // 1 x K

    std::size_t hidden() const { return branch[0].omega.cols(); }
    std::size_t classes() const { return cls_b.cols(); }
    /// Every parameter slot, in a fixed order.
    std::vector<Tensor*> parameters();
    std::vector<double> phi() const;
};

Model init_model(std::size_t dim_p, std::size_t dim_a, std::size_t classes, const ModelConfig& cfg);

/// Per-dimension keep masks over the hidden features; empty means keep all.
struct FeatureMask {
    std::vector<double> p;
    std::vector<double> a;
};

struct Forward {
    std::array<Tensor, 2> gated;      // h_hat = f(x) * omega
    std::array<Tensor, 2> projected;  // xi = h_hat P, before normalization
    Tensor phi;                       // 1 x 2
    Tensor logits;
};

Forward forward(const Model& m, const Tensor& x_p, const Tensor& x_a, const FeatureMask& mask = {});

/// Classifier head on already fused rows [a, b] (rows x 2*hidden).
Tensor classify_fused(const Model& m, const Tensor& fused, const Tensor& phi);

/// Per-modality logits h_m G_m + c. Their phi-weighted sum equals the fused logits.
std::array<Tensor, 2> modality_logits(const Model& m, const Forward& f);

/// Argmax per row; ties go to the lowest class index.
std::vector<std::size_t> predict(const Tensor& logits);
double accuracy(const Tensor& logits, const std::vector<std::size_t>& y);

}  // namespace imml::harness
