#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "imml/losses/losses.hpp"
#include "imml/losses/gradient_audit.hpp"

using namespace imml::losses;
using imml::ad::Tape;
namespace ad = imml::ad;

namespace {

using Matrix = std::vector<std::vector<double>>;

Tensor to_tensor(const Matrix& m) {
    std::vector<double> d;
    for (const auto& r : m) d.insert(d.end(), r.begin(), r.end());
    return Tensor::constant(m.size(), m[0].size(), std::move(d));
}

Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
    std::normal_distribution<double> g;
    Matrix m(r, std::vector<double>(c));
    for (auto& row : m)
        for (auto& v : row) v = g(rng);
    return m;
}

double cos_sim(const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        ab += a[k] * b[k];
        aa += a[k] * a[k];
        bb += b[k] * b[k];
    }
    return ab / std::sqrt(aa * bb);
}

// Straight-line Eq. for the contrastive term, summed over m -> [m+1]_M.
double mdke_oracle(const std::vector<Matrix>& xi, double tau) {
    const std::size_t big_m = xi.size(), n = xi[0].size();
    double total = 0.0;
    for (std::size_t m = 0; m < big_m; ++m) {
        const std::size_t next = (m + 1) % big_m;
        for (std::size_t i = 0; i < n; ++i) {
            const double num = std::exp(cos_sim(xi[m][i], xi[next][i]) / tau);
            double den = 0.0;
            for (std::size_t ip = 0; ip < n; ++ip)
                for (std::size_t mp : {m, next}) {
                    if (ip == i && mp == m) continue;
                    den += std::exp(cos_sim(xi[m][i], xi[mp][ip]) / tau);
                }
            total -= std::log(num / den);
        }
    }
    return total;
}

Matrix random_orthogonal(std::mt19937_64& rng, std::size_t d) {
    Matrix q = random_matrix(rng, d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            double dot = 0;
            for (std::size_t k = 0; k < d; ++k) dot += q[i][k] * q[j][k];
            for (std::size_t k = 0; k < d; ++k) q[i][k] -= dot * q[j][k];
        }
        double n = 0;
        for (double v : q[i]) n += v * v;
        for (double& v : q[i]) v /= std::sqrt(n);
    }
    return q;
}

Matrix rotate(const Matrix& x, const Matrix& q) {
    Matrix out(x.size(), std::vector<double>(q.size(), 0.0));
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j)
            for (std::size_t k = 0; k < q.size(); ++k) out[i][j] += x[i][k] * q[j][k];
    return out;
}

std::vector<std::vector<double>> random_labels(std::mt19937_64& rng, std::size_t n, std::size_t k) {
    std::vector<std::vector<double>> y;
    for (std::size_t i = 0; i < n; ++i) y.push_back(one_hot(rng() % k, k));
    return y;
}

}  // namespace

TEST(ModIndex, Examples) {
    EXPECT_EQ(mod_index(3, 5), 3);
    EXPECT_EQ(mod_index(7, 5), 2);
    EXPECT_EQ(mod_index(10, 5), 5);
    EXPECT_EQ(mod_index(1, 1), 1);
    EXPECT_THROW(mod_index(0, 5), NonPositiveInput);
    EXPECT_THROW(mod_index(3, 0), NonPositiveInput);
    for (long long n = 1; n <= 9; ++n)
        for (long long x = 1; x <= 40; ++x) {
            const long long r = mod_index(x, n);
            EXPECT_GE(r, 1);
            EXPECT_LE(r, n);
            EXPECT_EQ((r - x) % n, 0);
            if (x <= n) {
                EXPECT_EQ(r, x);
            }
        }
}

TEST(Mdke, SingleSampleIsExactlyZero) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_matrix(rng, 1, 4), b = random_matrix(rng, 1, 4);
        EXPECT_EQ(mdke_loss({to_tensor(a), to_tensor(b)}, {}).item(), 0.0);
    }
}

TEST(Mdke, IdenticalUnitVectorsGiveFourLogThree) {
    const Matrix same = {{0.6, 0.8}, {0.6, 0.8}};
    EXPECT_NEAR(mdke_loss({to_tensor(same), to_tensor(same)}, {}).item(), 4.0 * std::log(3.0), 1e-9);
}

TEST(Mdke, MatchesStraightLineOracle) {
    std::mt19937_64 rng(11);
    for (std::size_t big_m : {2u, 3u}) {
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<Matrix> xi;
            std::vector<Tensor> t;
            for (std::size_t m = 0; m < big_m; ++m) {
                xi.push_back(random_matrix(rng, 2 + trial % 4, 3));
                t.push_back(to_tensor(xi.back()));
            }
            LossConfig cfg;
            cfg.tau = 0.2 + 0.1 * (trial % 5);
            EXPECT_NEAR(mdke_loss(t, cfg).item(), mdke_oracle(xi, cfg.tau), 1e-9);
        }
    }
}

TEST(Mdke, Errors) {
    Tensor a = Tensor::full(2, 3, 1.0);
    EXPECT_THROW(mdke_loss({a}, {}), DimensionMismatch);
    EXPECT_THROW(mdke_loss({a, Tensor::full(2, 4, 1.0)}, {}), DimensionMismatch);
    EXPECT_THROW(mdke_loss({a, Tensor::full(3, 3, 1.0)}, {}), DimensionMismatch);
    LossConfig bad;
    bad.tau = 0.0;
    EXPECT_THROW(mdke_loss({a, a}, bad), InvalidConfig);
}

TEST(MdkeProperty, NonNegativeAndRotationInvariant) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + trial % 6, d = 2 + trial % 4;
        const auto a = random_matrix(rng, n, d), b = random_matrix(rng, n, d);
        const double base = mdke_loss({to_tensor(a), to_tensor(b)}, {}).item();
        EXPECT_GE(base, 0.0);
        const auto q = random_orthogonal(rng, d);
        EXPECT_NEAR(mdke_loss({to_tensor(rotate(a, q)), to_tensor(rotate(b, q))}, {}).item(), base, 1e-9);
    }
}

TEST(Fusion, Examples) {
    Tensor hp = Tensor::row({1.0, 2.0}), ha = Tensor::row({3.0, 5.0}), ha2 = Tensor::row({7.0, 11.0});
    FusionSpec concat;
    EXPECT_EQ(fuse_unpaired(hp, {ha}, 1.0, concat).data(), (std::vector<double>{1.0, 2.0, 0.0, 0.0}));
    FusionSpec wsum{FusionSpec::Kind::weighted_sum, std::nullopt};
    EXPECT_EQ(fuse_unpaired(hp, {ha}, 0.0, wsum).data(), ha.data());
    const Tensor three = fuse_unpaired(hp, {ha, ha2}, 0.5, wsum);
    EXPECT_DOUBLE_EQ(three.at(0, 0), 0.5 * 1 + 0.25 * 3 + 0.25 * 7);
    EXPECT_DOUBLE_EQ(three.at(0, 1), 0.5 * 2 + 0.25 * 5 + 0.25 * 11);
    EXPECT_THROW(fuse_unpaired(hp, {Tensor::row({1.0, 2.0, 3.0})}, 0.5, wsum), DimensionMismatch);
    EXPECT_NO_THROW(fuse_unpaired(hp, {Tensor::row({1.0, 2.0, 3.0})}, 0.5, concat));
    EXPECT_THROW(fuse_unpaired(hp, {}, 0.5, concat), DimensionMismatch);
    EXPECT_THROW(fuse_unpaired(hp, {ha}, 1.5, concat), std::invalid_argument);
}

TEST(MixedLabel, Examples) {
    const auto y0 = one_hot(0, 3), y1 = one_hot(1, 3), y2 = one_hot(2, 3);
    EXPECT_EQ(mixed_label(y0, {y1}, 1.0), y0);
    EXPECT_EQ(mixed_label(y0, {y1}, 0.5), (std::vector<double>{0.5, 0.5, 0.0}));
    const auto three = mixed_label(y0, {y1, y2}, 0.3);
    EXPECT_NEAR(three[0], 0.3, 1e-15);
    EXPECT_NEAR(three[1], 0.35, 1e-15);
    EXPECT_NEAR(three[2], 0.35, 1e-15);
    EXPECT_THROW(mixed_label({0.5, 0.6}, {{1.0, 0.0}}, 0.5), NonSimplexInput);
    EXPECT_THROW(mixed_label({1.0, 0.0}, {{-0.1, 1.1}}, 0.5), NonSimplexInput);
    EXPECT_THROW(mixed_label({1.0, 0.0}, {{1.0, 0.0, 0.0}}, 0.5), DimensionMismatch);
}

TEST(MixedLabelProperty, StaysOnSimplex) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t k = 2 + rng() % 5, m = 1 + rng() % 3;
        std::vector<std::vector<double>> aux;
        for (std::size_t a = 0; a < m; ++a) aux.push_back(one_hot(rng() % k, k));
        const auto y = mixed_label(one_hot(rng() % k, k), aux, u(rng));
        double s = 0.0;
        for (double v : y) {
            ASSERT_GE(v, 0.0);
            s += v;
        }
        ASSERT_NEAR(s, 1.0, 1e-9);
    }
}

TEST(BetaSampler, MeanOfSymmetricBetaIsOneHalf) {
    std::mt19937_64 rng(2024);
    double s = 0.0;
    for (int k = 0; k < 100000; ++k) {
        const double l = sample_beta(rng, 0.1, 0.1);
        ASSERT_GE(l, 0.0);
        ASSERT_LE(l, 1.0);
        s += l;
    }
    EXPECT_NEAR(s / 100000.0, 0.5, 0.01);
}

TEST(BetaLoss, FixedLambdaOneIsPlainSupervisedLoss) {
    std::mt19937_64 rng(4);
    const std::size_t n = 5, dp = 3, da = 2, k = 3;
    const Tensor hp = to_tensor(random_matrix(rng, n, dp)), ha = to_tensor(random_matrix(rng, n, da));
    const Tensor w = to_tensor(random_matrix(rng, dp, k));
    const auto labels = random_labels(rng, n, k);
    // Reads only the predominant slot of the concatenated input.
    auto predict = [&](const Tensor& z) {
        std::vector<double> pick((dp + da) * k, 0.0);
        for (std::size_t r = 0; r < dp; ++r)
            for (std::size_t c = 0; c < k; ++c) pick[r * k + c] = w.at(r, c);
        return ad::matmul(z, Tensor::constant(dp + da, k, pick));
    };
    LossConfig cfg;
    cfg.n_unpaired = 1;
    FusionSpec spec{FusionSpec::Kind::concat, 1.0};
    std::mt19937_64 sampler(1);
    const double got = beta_loss(hp, {ha}, labels, predict, cfg, spec, sampler).item();
    const double expected = ad::softmax_xent(ad::matmul(hp, w), label_matrix(labels)).item();
    EXPECT_NEAR(got, expected, 1e-12);
}

TEST(BetaLoss, MatchesPairEnumeration) {
    // N* = 3, N = 2, lambda = 0.5, identity predictor on two classes.
    const Matrix hp = {{0.3, -0.2}, {1.1, 0.4}, {-0.7, 0.9}};
    const Matrix ha = {{0.5, 0.5}, {-0.3, 0.8}, {0.2, -1.0}};
    const std::vector<std::vector<double>> labels = {{1, 0}, {0, 1}, {1, 0}};
    double expected = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t step : {1u, 2u}) {
            const std::size_t j = (i + step) % 3;
            double z[2], y[2];
            for (std::size_t c = 0; c < 2; ++c) {
                z[c] = 0.5 * hp[i][c] + 0.5 * ha[j][c];
                y[c] = 0.5 * labels[i][c] + 0.5 * labels[j][c];
            }
            const double lse = std::log(std::exp(z[0]) + std::exp(z[1]));
            expected -= y[0] * (z[0] - lse) + y[1] * (z[1] - lse);
        }
    LossConfig cfg;
    FusionSpec spec{FusionSpec::Kind::weighted_sum, 0.5};
    std::mt19937_64 sampler(1);
    const double got =
        beta_loss(to_tensor(hp), {to_tensor(ha)}, labels, [](const Tensor& z) { return z; }, cfg, spec, sampler).item();
    EXPECT_NEAR(got, expected, 1e-12);
}

TEST(BetaLoss, PairingAndSampling) {
    std::mt19937_64 rng(6);
    const Tensor hp = to_tensor(random_matrix(rng, 4, 2)), ha = to_tensor(random_matrix(rng, 4, 2));
    const auto labels = random_labels(rng, 4, 2);
    LossConfig cfg;
    std::mt19937_64 s1(77), s2(77);
    const MixedBatch a = mix_unpaired(hp, {ha}, labels, cfg, {}, s1);
    const MixedBatch b = mix_unpaired(hp, {ha}, labels, cfg, {}, s2);
    EXPECT_EQ(a.predominant_rows, (std::vector<std::size_t>{0, 0, 1, 1, 2, 2, 3, 3}));
    EXPECT_EQ(a.auxiliary_rows, (std::vector<std::size_t>{1, 2, 2, 3, 3, 0, 0, 1}));
    EXPECT_EQ(a.lambdas, b.lambdas);
    EXPECT_EQ(a.fused.data(), b.fused.data());
    // Per-pair draws, not one lambda per batch.
    EXPECT_NE(a.lambdas[0], a.lambdas[1]);
    for (std::size_t r = 0; r < a.lambdas.size(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < 2; ++c) s += a.soft_labels.at(r, c);
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(BetaLoss, DeterministicUnderSeedAndBatchGuard) {
    std::mt19937_64 rng(9);
    const Tensor hp = to_tensor(random_matrix(rng, 6, 3)), ha = to_tensor(random_matrix(rng, 6, 3));
    const Tensor w = to_tensor(random_matrix(rng, 6, 2));
    const auto labels = random_labels(rng, 6, 2);
    auto predict = [&](const Tensor& z) { return ad::matmul(z, w); };
    LossConfig cfg;
    std::mt19937_64 s1(5), s2(5);
    EXPECT_EQ(beta_loss(hp, {ha}, labels, predict, cfg, {}, s1).item(),
              beta_loss(hp, {ha}, labels, predict, cfg, {}, s2).item());
    cfg.n_unpaired = 6;
    EXPECT_THROW(beta_loss(hp, {ha}, labels, predict, cfg, {}, s1), BatchTooSmall);
}

TEST(BetaLoss, MseTarget) {
    const Matrix hp = {{0.2, 0.8}, {0.9, 0.1}};
    const std::vector<std::vector<double>> labels = {{0, 1}, {1, 0}};
    LossConfig cfg;
    cfg.n_unpaired = 1;
    FusionSpec spec{FusionSpec::Kind::weighted_sum, 1.0};
    std::mt19937_64 s(1);
    const double got = beta_loss(to_tensor(hp), {to_tensor(hp)}, labels, [](const Tensor& z) { return z; }, cfg, spec,
                                 s, TargetLoss::mse)
                           .item();
    EXPECT_NEAR(got, (0.04 + 0.04) / 2 + (0.01 + 0.01) / 2, 1e-15);
}

TEST(ImmlLoss, Examples) {
    const Tensor m = Tensor::scalar(2.0), b = Tensor::scalar(3.0), base = Tensor::scalar(0.7);
    LossConfig cfg;
    cfg.gamma1 = cfg.gamma2 = 0.0;
    EXPECT_EQ(imml_loss(m, b, base, cfg).item(), 0.7);
    cfg.gamma1 = 1e-6;
    cfg.gamma2 = 1e4;
    EXPECT_NEAR(imml_loss(m, b, base, cfg).item(), 2e-6 + 3e4 + 0.7, 1e-9);
    const Tensor zero = Tensor::scalar(0.0);
    EXPECT_EQ(imml_loss(zero, zero, zero, cfg).item(), 0.0);
}

TEST(LossGradients, MdkeBetaAndCombinedPassGradCheck) {
    const auto audit = imml::losses::audit_gradients(50, 31, 1e-5);
    EXPECT_EQ(audit.trials, 50u);
    EXPECT_LT(audit.mdke, 1e-4);
    EXPECT_LT(audit.beta, 1e-4);
    EXPECT_LT(audit.combined, 1e-4);
}

// Beta(0.1, 0.1) puts most lambdas within 1e-4 of 0 or 1, which leaves many
// gradient entries below 1e-7. There the central difference is dominated by
// cancellation noise, so those entries are held to an absolute bound instead.
TEST(LossGradients, PaperBetaParametersAgreeWhereMeasurable) {
    std::mt19937_64 rng(57);
    int tiny = 0, measured = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto c = imml::losses::random_gradient_case(rng, true);
        for (const auto& f : {imml::losses::beta_objective(c), imml::losses::combined_objective(c)}) {
            for (const auto& [a, n] : imml::losses::coordinate_gradients(f, c.points, 1e-5)) {
                const double scale = std::max(std::abs(a), std::abs(n));
                if (scale >= 1e-6) {
                    EXPECT_LT(std::abs(a - n) / scale, 1e-4);
                    ++measured;
                } else {
                    EXPECT_LT(std::abs(a - n), 1e-9);
                    ++tiny;
                }
            }
        }
    }
    EXPECT_GT(measured, 1000);
    EXPECT_GT(tiny, 0);
}

TEST(Config, Validation) {
    LossConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.n_unpaired = 0;
    EXPECT_THROW(cfg.validate(), InvalidConfig);
    cfg = {};
    cfg.beta_b = 0.0;
    EXPECT_THROW(cfg.validate(), InvalidConfig);
    cfg = {};
    cfg.proj_dim = 0;
    EXPECT_THROW(cfg.validate(), InvalidConfig);
}
