#include "imml/losses/losses.hpp"

#include <cmath>
#include <string>

namespace imml::losses {

using namespace imml::ad;

namespace {

constexpr double kSimplexTol = 1e-6;

void require_simplex(const std::vector<double>& y, const char* what) {
    double s = 0.0;
    for (double v : y) {
        if (!(v >= -kSimplexTol)) throw NonSimplexInput(std::string(what) + " has a negative entry");
        s += v;
    }
    if (std::abs(s - 1.0) > kSimplexTol) throw NonSimplexInput(std::string(what) + " does not sum to 1");
}

void require_lambda(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
}

Tensor identity(std::size_t n) {
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 1.0;
    return Tensor::constant(n, n, std::move(d));
}

Tensor off_diagonal(std::size_t n) {
    std::vector<double> d(n * n, 1.0);
    for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0.0;
    return Tensor::constant(n, n, std::move(d));
}

}  // namespace

// -sum_i log( exp(s(u_i, v_i)) / (sum_i' exp(s(u_i, v_i')) + sum_{i' != i} exp(s(u_i, u_i'))) )
Tensor mdke_pair_term(const Tensor& u, const Tensor& v, double tau) {
    if (u.shape() != v.shape()) throw DimensionMismatch("paired features differ in shape");
    const std::size_t n = u.rows();
    const Tensor cross = exp(scale(matmul(u, transpose(v)), 1.0 / tau));
    const Tensor self = hadamard(exp(scale(matmul(u, transpose(u)), 1.0 / tau)), off_diagonal(n));
    const Tensor numer = row_sum(hadamard(cross, identity(n)));
    const Tensor denom = add(row_sum(cross), row_sum(self));
    return scale(sum(log(div(numer, denom))), -1.0);
}

void LossConfig::validate() const {
    if (!(tau > 0.0)) throw InvalidConfig("tau must be positive");
    if (n_unpaired < 1) throw InvalidConfig("n_unpaired must be at least 1");
    if (!(beta_a > 0.0 && beta_b > 0.0)) throw InvalidConfig("Beta parameters must be positive");
    if (proj_dim < 1) throw InvalidConfig("proj_dim must be at least 1");
}

long long mod_index(long long x, long long n) {
    if (x < 1 || n < 1) throw NonPositiveInput("mod_index needs x >= 1 and n >= 1");
    return (x - 1) % n + 1;
}

double sample_beta(std::mt19937_64& rng, double a, double b) {
    std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
    for (;;) {
        const double x = ga(rng), y = gb(rng);
        // Both draws can underflow to zero for small shape parameters.
        if (x + y > 0.0) return x / (x + y);
    }
}

Tensor mdke_loss(const std::vector<Tensor>& projected, const LossConfig& cfg) {
    cfg.validate();
    const std::size_t m_count = projected.size();
    if (m_count < 2) throw DimensionMismatch("mdke_loss needs at least two modalities");
    const std::size_t n = projected[0].rows(), d = projected[0].cols();
    if (n < 1) throw DimensionMismatch("mdke_loss needs a non-empty batch");
    for (const auto& p : projected)
        if (p.rows() != n || p.cols() != d) throw DimensionMismatch("projected features differ in shape");

    std::vector<Tensor> unit;
    for (const auto& p : projected) unit.push_back(l2_normalize(p));
    Tensor total = mdke_pair_term(unit[0], unit[1], cfg.tau);
    for (std::size_t m = 2; m <= m_count; ++m) {
        const auto next = static_cast<std::size_t>(mod_index(static_cast<long long>(m) + 1, static_cast<long long>(m_count)));
        total = add(total, mdke_pair_term(unit[m - 1], unit[next - 1], cfg.tau));
    }
    return total;
}

Tensor fuse_unpaired(const Tensor& h_p, const std::vector<Tensor>& h_a, const std::vector<double>& lambdas,
                     const FusionSpec& spec) {
    if (h_a.empty()) throw DimensionMismatch("fusion needs at least one auxiliary modality");
    if (lambdas.size() != h_p.rows()) throw DimensionMismatch("one lambda per row is required");
    for (double l : lambdas) require_lambda(l);
    for (const auto& a : h_a) {
        if (a.rows() != h_p.rows()) throw DimensionMismatch("fused features differ in row count");
        if (spec.kind == FusionSpec::Kind::weighted_sum && a.cols() != h_p.cols())
            throw DimensionMismatch("weighted_sum fusion needs equal feature dimensions");
    }
    const double share = 1.0 / static_cast<double>(h_a.size());
    std::vector<double> rest(lambdas.size());
    for (std::size_t i = 0; i < lambdas.size(); ++i) rest[i] = (1.0 - lambdas[i]) * share;

    Tensor out = scale_rows(h_p, lambdas);
    for (const auto& a : h_a) {
        const Tensor part = scale_rows(a, rest);
        out = spec.kind == FusionSpec::Kind::concat ? concat_cols(out, part) : add(out, part);
    }
    return out;
}

Tensor fuse_unpaired(const Tensor& h_p, const std::vector<Tensor>& h_a, double lambda, const FusionSpec& spec) {
    return fuse_unpaired(h_p, h_a, std::vector<double>(h_p.rows(), lambda), spec);
}

std::vector<double> mixed_label(const std::vector<double>& y_p, const std::vector<std::vector<double>>& y_a,
                                double lambda) {
    require_lambda(lambda);
    if (y_a.empty()) throw DimensionMismatch("mixed_label needs at least one auxiliary label");
    require_simplex(y_p, "predominant label");
    std::vector<double> out(y_p.size());
    for (std::size_t k = 0; k < y_p.size(); ++k) out[k] = lambda * y_p[k];
    const double share = (1.0 - lambda) / static_cast<double>(y_a.size());
    for (const auto& y : y_a) {
        if (y.size() != y_p.size()) throw DimensionMismatch("label vectors differ in length");
        require_simplex(y, "auxiliary label");
        for (std::size_t k = 0; k < y.size(); ++k) out[k] += share * y[k];
    }
    return out;
}

MixedBatch mix_unpaired(const Tensor& h_p, const std::vector<Tensor>& h_a,
                        const std::vector<std::vector<double>>& labels, const LossConfig& cfg,
                        const FusionSpec& spec, std::mt19937_64& rng) {
    cfg.validate();
    const std::size_t n = h_p.rows();
    if (n <= cfg.n_unpaired)
        throw BatchTooSmall("batch of " + std::to_string(n) + " needs more than " + std::to_string(cfg.n_unpaired) +
                            " samples");
    if (labels.size() != n) throw DimensionMismatch("one label per sample is required");
    if (spec.fixed_lambda) require_lambda(*spec.fixed_lambda);

    MixedBatch mb;
    std::vector<double> soft;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t step = 1; step <= cfg.n_unpaired; ++step) {
            const auto partner = static_cast<std::size_t>(
                                     mod_index(static_cast<long long>(i + 1 + step), static_cast<long long>(n))) -
                                 1;
            const double lambda = spec.fixed_lambda ? *spec.fixed_lambda : sample_beta(rng, cfg.beta_a, cfg.beta_b);
            mb.predominant_rows.push_back(i);
            mb.auxiliary_rows.push_back(partner);
            mb.lambdas.push_back(lambda);
            // Paired labels agree across modalities, so every auxiliary slot of
            // the partner carries the partner's label.
            const auto y = mixed_label(labels[i], std::vector<std::vector<double>>(h_a.size(), labels[partner]), lambda);
            soft.insert(soft.end(), y.begin(), y.end());
        }
    }
    std::vector<Tensor> aux;
    for (const auto& a : h_a) aux.push_back(gather_rows(a, mb.auxiliary_rows));
    mb.fused = fuse_unpaired(gather_rows(h_p, mb.predominant_rows), aux, mb.lambdas, spec);
    mb.soft_labels = Tensor::constant(mb.lambdas.size(), labels[0].size(), std::move(soft));
    return mb;
}

Tensor beta_loss(const Tensor& h_p, const std::vector<Tensor>& h_a, const std::vector<std::vector<double>>& labels,
                 const Predictor& predict, const LossConfig& cfg, const FusionSpec& spec, std::mt19937_64& rng,
                 TargetLoss loss) {
    const MixedBatch mb = mix_unpaired(h_p, h_a, labels, cfg, spec, rng);
    const Tensor out = predict(mb.fused);
    if (out.shape() != mb.soft_labels.shape()) throw DimensionMismatch("predictor output does not match label width");
    return loss == TargetLoss::cross_entropy ? softmax_xent(out, mb.soft_labels) : mse(out, mb.soft_labels);
}

Tensor imml_loss(const Tensor& mdke, const Tensor& beta, const Tensor& base, const LossConfig& cfg) {
    return add(add(scale(mdke, cfg.gamma1), scale(beta, cfg.gamma2)), base);
}

Tensor label_matrix(const std::vector<std::vector<double>>& labels) {
    if (labels.empty()) throw DimensionMismatch("no labels");
    std::vector<double> d;
    for (const auto& y : labels) {
        if (y.size() != labels[0].size()) throw DimensionMismatch("label vectors differ in length");
        d.insert(d.end(), y.begin(), y.end());
    }
    return Tensor::constant(labels.size(), labels[0].size(), std::move(d));
}

std::vector<double> one_hot(std::size_t k, std::size_t classes) {
    if (k >= classes) throw DimensionMismatch("class index out of range");
    std::vector<double> y(classes, 0.0);
    y[k] = 1.0;
    return y;
}

}  // namespace imml::losses
