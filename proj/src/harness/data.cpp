#include "imml/harness/data.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace imml::harness {

namespace {

using Rng = std::mt19937_64;

constexpr std::uint64_t kNoiseStream = 0x9e3779b97f4a7c15ULL;

std::vector<std::vector<double>> class_centers(std::size_t classes, std::size_t dim, double norm, Rng& rng) {
    std::vector<std::vector<double>> mu(classes, std::vector<double>(dim, 0.0));
    std::normal_distribution<double> g;
    for (std::size_t k = 0; k < classes; ++k) {
        if (classes <= dim) {
            mu[k][k] = norm;
            continue;
        }
        double n2 = 0.0;
        for (auto& v : mu[k]) {
            v = g(rng);
            n2 += v * v;
        }
        for (auto& v : mu[k]) v *= norm / std::sqrt(n2);
    }
    return mu;
}

Tensor sample(const std::vector<std::size_t>& y, const std::vector<std::vector<double>>& mu, Rng& rng) {
    const std::size_t dim = mu[0].size();
    std::normal_distribution<double> g;
    std::vector<double> d(y.size() * dim);
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t j = 0; j < dim; ++j) d[i * dim + j] = mu[y[i]][j] + g(rng);
    return Tensor::constant(y.size(), dim, std::move(d));
}

std::vector<std::size_t> balanced_labels(std::size_t n, std::size_t classes, Rng& rng) {
    std::vector<std::size_t> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = i % classes;
    std::shuffle(y.begin(), y.end(), rng);
    return y;
}

Tensor perturb(const Tensor& x, double sigma, Rng& rng) {
    std::normal_distribution<double> g;
    auto d = x.data();
    for (auto& v : d) v += sigma * g(rng);
    return Tensor::constant(x.rows(), x.cols(), std::move(d));
}

}  // namespace

void SynthConfig::validate() const {
    if (classes < 2) throw std::invalid_argument("need at least two classes");
    if (dim_p == 0 || dim_a == 0) throw std::invalid_argument("feature dims must be positive");
    if (!(predominance >= 0.0 && predominance <= 1.0)) throw std::invalid_argument("predominance must lie in [0, 1]");
    if (!(noise_ratio >= 0.0)) throw std::invalid_argument("noise_ratio must be non-negative");
    if (!(separation >= 0.0)) throw std::invalid_argument("separation must be non-negative");
}

Split Split::rows(const std::vector<std::size_t>& idx) const {
    Split out;
    out.x_p = ad::gather_rows(x_p, idx);
    out.x_a = ad::gather_rows(x_a, idx);
    for (auto i : idx) out.y.push_back(y[i]);
    return out;
}

Dataset generate_synth(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const auto mu_p = class_centers(cfg.classes, cfg.dim_p, cfg.separation * cfg.predominance, rng);
    const auto mu_a = class_centers(cfg.classes, cfg.dim_a, cfg.separation * (1.0 - cfg.predominance), rng);

    auto make = [&](std::size_t n) {
        Split s;
        s.y = balanced_labels(n, cfg.classes, rng);
        s.x_p = sample(s.y, mu_p, rng);
        s.x_a = sample(s.y, mu_a, rng);
        return s;
    };
    Dataset d;
    d.classes = cfg.classes;
    d.train = make(cfg.n_train);
    d.val = make(cfg.n_val);
    d.test = make(cfg.n_test);
    if (cfg.noise_ratio > 0.0) d.test = add_noise(d.test, cfg.noise_ratio, cfg.seed ^ kNoiseStream);
    return d;
}

Split add_noise(const Split& s, double sigma, std::uint64_t seed) {
    Rng rng(seed);
    Split out = s;
    out.x_p = perturb(s.x_p, sigma, rng);
    out.x_a = perturb(s.x_a, sigma, rng);
    return out;
}

std::vector<std::vector<double>> one_hot_rows(const std::vector<std::size_t>& y, std::size_t classes) {
    std::vector<std::vector<double>> out;
    out.reserve(y.size());
    for (auto k : y) {
        std::vector<double> row(classes, 0.0);
        row.at(k) = 1.0;
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace imml::harness
