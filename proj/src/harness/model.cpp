#include "imml/harness/model.hpp"

#include <cmath>
#include <random>

namespace imml::harness {

using namespace imml::ad;

namespace {

Tensor gaussian(std::size_t r, std::size_t c, double sd, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, sd);
    std::vector<double> d(r * c);
    for (auto& v : d) v = g(rng);
    return Tensor::constant(r, c, std::move(d));
}

// Repeats a 1 x c row n times.
Tensor tile(const Tensor& row, std::size_t n) { return matmul(Tensor::full(n, 1, 1.0), row); }

// 2 x 2h: row m is one over the columns of modality m.
Tensor block_indicator(std::size_t h) {
    std::vector<double> d(4 * h, 0.0);
    for (std::size_t j = 0; j < h; ++j) {
        d[j] = 1.0;
        d[2 * h + h + j] = 1.0;
    }
    return Tensor::constant(2, 2 * h, std::move(d));
}

Tensor gate(const Branch& b, const Tensor& x, const std::vector<double>& keep) {
    const Tensor h = ad::tanh(add_bias(matmul(x, b.w), b.b));
    Tensor gated = hadamard(h, tile(b.omega, x.rows()));
    if (!keep.empty()) {
        if (keep.size() != h.cols()) throw ShapeMismatch("mask length differs from hidden width");
        gated = hadamard(gated, tile(Tensor::row(keep), x.rows()));
    }
    return gated;
}

}  // namespace

std::vector<Tensor*> Model::parameters() {
    std::vector<Tensor*> out;
    for (auto& b : branch) {
        out.push_back(&b.w);
        out.push_back(&b.b);
        out.push_back(&b.omega);
        out.push_back(&b.proj);
    }
    out.push_back(&fusion_logits);
    out.push_back(&cls_w);
    out.push_back(&cls_b);
    return out;
}

std::vector<double> Model::phi() const { return softmax(fusion_logits).data(); }

Model init_model(std::size_t dim_p, std::size_t dim_a, std::size_t classes, const ModelConfig& cfg) {
    if (cfg.hidden == 0 || cfg.proj_dim == 0 || classes == 0)
        throw std::invalid_argument("model widths must be positive");
    std::mt19937_64 rng(cfg.seed);
    Model m;
    const std::size_t dims[2] = {dim_p, dim_a};
    for (int i = 0; i < 2; ++i) {
        auto& b = m.branch[i];
        b.w = gaussian(dims[i], cfg.hidden, 1.0 / std::sqrt(static_cast<double>(dims[i])), rng);
        b.b = Tensor::zeros(1, cfg.hidden);
        b.omega = Tensor::full(1, cfg.hidden, 1.0);
        b.proj = gaussian(cfg.hidden, cfg.proj_dim, 1.0 / std::sqrt(static_cast<double>(cfg.hidden)), rng);
    }
    m.fusion_logits = Tensor::zeros(1, 2);
    m.cls_w = gaussian(2 * cfg.hidden, classes, 0.1 / std::sqrt(static_cast<double>(cfg.hidden)), rng);
    m.cls_b = Tensor::zeros(1, classes);
    return m;
}

Tensor classify_fused(const Model& m, const Tensor& fused, const Tensor& phi) {
    const Tensor weights = tile(matmul(phi, block_indicator(m.hidden())), fused.rows());
    return add_bias(matmul(hadamard(fused, weights), m.cls_w), m.cls_b);
}

Forward forward(const Model& m, const Tensor& x_p, const Tensor& x_a, const FeatureMask& mask) {
    if (x_p.rows() != x_a.rows()) throw ShapeMismatch("modalities differ in row count");
    Forward f;
    f.gated = {gate(m.branch[0], x_p, mask.p), gate(m.branch[1], x_a, mask.a)};
    for (int i = 0; i < 2; ++i) f.projected[i] = matmul(f.gated[i], m.branch[i].proj);
    f.phi = softmax(m.fusion_logits);
    f.logits = classify_fused(m, concat_cols(f.gated[0], f.gated[1]), f.phi);
    return f;
}

std::array<Tensor, 2> modality_logits(const Model& m, const Forward& f) {
    const std::size_t h = m.hidden();
    std::array<Tensor, 2> out;
    for (std::size_t i = 0; i < 2; ++i) {
        std::vector<std::size_t> rows(h);
        for (std::size_t j = 0; j < h; ++j) rows[j] = i * h + j;
        out[i] = add_bias(matmul(f.gated[i], gather_rows(m.cls_w, rows)), m.cls_b);
    }
    return out;
}

std::vector<std::size_t> predict(const Tensor& logits) {
    std::vector<std::size_t> out(logits.rows(), 0);
    for (std::size_t i = 0; i < logits.rows(); ++i)
        for (std::size_t k = 1; k < logits.cols(); ++k)
            if (logits.at(i, k) > logits.at(i, out[i])) out[i] = k;
    return out;
}

double accuracy(const Tensor& logits, const std::vector<std::size_t>& y) {
    if (y.empty()) return 0.0;
    const auto p = predict(logits);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < y.size(); ++i) hit += p[i] == y[i];
    return static_cast<double>(hit) / static_cast<double>(y.size());
}

}  // namespace imml::harness
