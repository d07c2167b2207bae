#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "imml/ad/tensor.hpp"

using namespace imml::ad;

namespace {

Tensor random_tensor(std::mt19937_64& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> d(r * c);
    for (auto& v : d) v = u(rng);
    return Tensor::constant(r, c, std::move(d));
}

// Weighted sum with fixed random weights, so no coordinate gets a gradient
// that vanishes by symmetry.
Tensor probe(const Tensor& t, const Tensor& w) { return sum(hadamard(t, w)); }

}  // namespace

TEST(Tensor, ConstructionAndShape) {
    Tensor t = Tensor::constant(2, 3, {1, 2, 3, 4, 5, 6});
    EXPECT_EQ(t.shape(), (Shape{2, 3}));
    EXPECT_EQ(t.at(1, 2), 6.0);
    EXPECT_FALSE(t.requires_grad());
    EXPECT_THROW(Tensor::constant(2, 2, {1, 2, 3}), ShapeMismatch);
    EXPECT_THROW(t.item(), ShapeMismatch);
    EXPECT_EQ(Tensor::scalar(4.0).item(), 4.0);
}

TEST(Ops, HadamardWithOnesIsIdentity) {
    std::mt19937_64 rng(1);
    Tensor x = random_tensor(rng, 3, 4);
    EXPECT_EQ(hadamard(x, Tensor::full(3, 4, 1.0)).data(), x.data());
}

TEST(Ops, CosineOfVectorWithItselfIsOne) {
    std::mt19937_64 rng(2);
    for (double magnitude : {1e-6, 1.0, 1e6}) {
        Tensor x = scale(random_tensor(rng, 5, 7), magnitude);
        const Tensor c = cosine(x, x);
        for (double v : c.data()) EXPECT_NEAR(v, 1.0, 1e-14);
    }
}

TEST(Ops, SoftmaxXentUniformIsLogThree) {
    Tensor z = Tensor::row({0, 0, 0});
    Tensor t = Tensor::row({1.0 / 3, 1.0 / 3, 1.0 / 3});
    EXPECT_NEAR(softmax_xent(z, t).item(), std::log(3.0), 1e-15);
}

TEST(Ops, SoftmaxXentMatchesStraightLineFormula) {
    Tensor z = Tensor::constant(2, 3, {1.0, -2.0, 0.5, 3.0, 3.0, -1.0});
    Tensor t = Tensor::constant(2, 3, {0.2, 0.3, 0.5, 0.0, 1.0, 0.0});
    double expected = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < 3; ++k) s += std::exp(z.at(i, k));
        for (std::size_t k = 0; k < 3; ++k) expected -= t.at(i, k) * std::log(std::exp(z.at(i, k)) / s);
    }
    EXPECT_NEAR(softmax_xent(z, t).item(), expected, 1e-14);
}

TEST(Ops, MatmulAndTransposeValues) {
    Tensor a = Tensor::constant(2, 3, {1, 2, 3, 4, 5, 6});
    Tensor b = Tensor::constant(3, 2, {7, 8, 9, 10, 11, 12});
    EXPECT_EQ(matmul(a, b).data(), (std::vector<double>{58, 64, 139, 154}));
    EXPECT_EQ(transpose(a).data(), (std::vector<double>{1, 4, 2, 5, 3, 6}));
    EXPECT_THROW(matmul(a, a), ShapeMismatch);
}

TEST(Ops, L2NormalizeMatchesHandDerivative) {
    Tape tape;
    Tensor x = tape.leaf(1, 2, {3.0, 4.0});
    Tensor y = l2_normalize(x);
    EXPECT_NEAR(y.at(0, 0), 0.6, 1e-12);
    EXPECT_NEAR(y.at(0, 1), 0.8, 1e-12);
    tape.backward(sum(hadamard(y, Tensor::row({1.0, 0.0}))));
    // d(x0/|x|)/dx = (|x|^2 - x0^2, -x0 x1) / |x|^3
    EXPECT_NEAR(x.grad()[0], 16.0 / 125.0, 1e-12);
    EXPECT_NEAR(x.grad()[1], -12.0 / 125.0, 1e-12);
}

TEST(Ops, ShapeAndNormErrors) {
    Tensor a = Tensor::zeros(2, 3), b = Tensor::zeros(3, 2);
    EXPECT_THROW(add(a, b), ShapeMismatch);
    EXPECT_THROW(hadamard(a, b), ShapeMismatch);
    EXPECT_THROW(add_bias(a, Tensor::zeros(1, 2)), ShapeMismatch);
    EXPECT_THROW(concat_cols(a, b), ShapeMismatch);
    EXPECT_THROW(gather_rows(a, {2}), ShapeMismatch);
    EXPECT_THROW(scale_rows(a, {1.0}), ShapeMismatch);
    EXPECT_THROW(softmax_xent(a, b), ShapeMismatch);
    EXPECT_THROW(l2_normalize(a), DegenerateNorm);
    EXPECT_THROW(l2_normalize(Tensor::row({1e-13, 0.0})), DegenerateNorm);
    EXPECT_THROW(cosine(Tensor::row({1.0, 0.0}), Tensor::row({0.0, 0.0})), DegenerateNorm);
    EXPECT_THROW(log(Tensor::row({1.0, -1.0})), NonFiniteValue);
    EXPECT_THROW(div(Tensor::row({1.0}), Tensor::row({0.0})), NonFiniteValue);
}

TEST(Tape, AccumulatesReusedInputs) {
    Tape tape;
    Tensor x = tape.leaf(1, 3, {1.0, 2.0, 3.0});
    tape.backward(sum(add(hadamard(x, x), x)));
    EXPECT_EQ(x.grad(), (std::vector<double>{3.0, 5.0, 7.0}));
}

TEST(Tape, BackwardRunsOnceAndOnlyOnItsOwnTape) {
    Tape tape, other;
    Tensor x = tape.leaf(1, 1, {2.0});
    Tensor y = sum(exp(x));
    tape.backward(y);
    EXPECT_THROW(tape.backward(y), TapeError);
    EXPECT_THROW(tape.leaf(1, 1, {0.0}), TapeError);

    Tensor u = other.leaf(1, 1, {1.0});
    Tape third;
    Tensor v = third.leaf(1, 1, {1.0});
    EXPECT_THROW(add(u, v), TapeError);
    EXPECT_THROW(third.backward(sum(u)), TapeError);
}

TEST(Tape, ConstantsNeverRecord) {
    Tape tape;
    Tensor x = tape.leaf(1, 2, {1.0, 2.0});
    const std::size_t before = tape.size();
    Tensor c = exp(Tensor::row({1.0, 2.0}));
    EXPECT_FALSE(c.requires_grad());
    EXPECT_EQ(tape.size(), before);
    Tensor y = hadamard(x, c);
    EXPECT_TRUE(y.requires_grad());
    EXPECT_EQ(tape.size(), before + 1);
}

TEST(Tape, UnreachedLeavesHaveZeroGradient) {
    Tape tape;
    Tensor x = tape.leaf(1, 2, {1.0, 2.0});
    Tensor unused = tape.leaf(1, 2, {5.0, 6.0});
    tape.backward(sum(x));
    EXPECT_FALSE(unused.has_grad());
    EXPECT_EQ(unused.grad(), (std::vector<double>{0.0, 0.0}));
}

TEST(GradCheck, QuadraticIsExactToSecondOrder) {
    const double err = grad_check([](const Tensor& x) { return sum(hadamard(x, x)); }, Tensor::scalar(3.0), 1e-5);
    EXPECT_LT(err, 1e-8);
}

TEST(GradCheck, Errors) {
    EXPECT_THROW(grad_check([](const Tensor& x) { return sum(exp(scale(x, 1000.0))); }, Tensor::scalar(1.0), 1e-5),
                 NonFiniteValue);
    EXPECT_THROW(grad_check([](const Tensor& x) { return x; }, Tensor::row({1.0, 2.0}), 1e-5), ShapeMismatch);
    EXPECT_THROW(grad_check([](const Tensor& x) { return sum(x); }, Tensor::scalar(1.0), 1e-2), std::invalid_argument);
}

TEST(GradCheck, DetectsAWrongGradient) {
    // A function whose recorded backward disagrees with its forward value.
    auto broken = [](const Tensor& x) {
        Tensor y = sum(hadamard(x, x));
        if (!x.requires_grad()) return scale(y, 1.1);
        return y;
    };
    EXPECT_GT(grad_check(broken, Tensor::row({0.5, -0.3}), 1e-5), 0.05);
}

// Every differentiable op against central differences on 50 random points.
TEST(GradCheckProperty, EveryOpAtFiftyRandomPoints) {
    std::mt19937_64 rng(99);
    using Fn = std::function<Tensor(const std::vector<Tensor>&)>;
    struct Case {
        const char* name;
        std::vector<Shape> shapes;
        Fn f;
        double lo = -1.0, hi = 1.0;
    };
    Tensor w23 = random_tensor(rng, 2, 3), w32 = random_tensor(rng, 3, 2), w22 = random_tensor(rng, 2, 2);
    Tensor w21 = random_tensor(rng, 2, 1), w25 = random_tensor(rng, 2, 5), w33 = random_tensor(rng, 3, 3);
    Tensor soft = Tensor::constant(2, 3, {0.2, 0.5, 0.3, 0.6, 0.1, 0.3});
    const std::vector<Case> cases = {
        {"matmul", {{2, 3}, {3, 2}}, [&](auto& x) { return probe(matmul(x[0], x[1]), w22); }},
        {"transpose", {{2, 3}}, [&](auto& x) { return probe(transpose(x[0]), w32); }},
        {"add", {{2, 3}, {2, 3}}, [&](auto& x) { return probe(add(x[0], x[1]), w23); }},
        {"sub", {{2, 3}, {2, 3}}, [&](auto& x) { return probe(sub(x[0], x[1]), w23); }},
        {"add_bias", {{2, 3}, {1, 3}}, [&](auto& x) { return probe(add_bias(x[0], x[1]), w23); }},
        {"scale", {{2, 3}}, [&](auto& x) { return probe(scale(x[0], -1.7), w23); }},
        {"hadamard", {{2, 3}, {2, 3}}, [&](auto& x) { return probe(hadamard(x[0], x[1]), w23); }},
        {"div", {{2, 3}, {2, 3}}, [&](auto& x) { return probe(div(x[0], x[1]), w23); }, 0.5, 2.0},
        {"scale_rows", {{2, 3}}, [&](auto& x) { return probe(scale_rows(x[0], {0.3, -2.0}), w23); }},
        {"concat_cols", {{2, 3}, {2, 2}}, [&](auto& x) { return probe(concat_cols(x[0], x[1]), w25); }},
        {"gather_rows", {{2, 3}}, [&](auto& x) { return probe(gather_rows(x[0], {1, 0, 1}), w33); }},
        {"tanh", {{2, 3}}, [&](auto& x) { return probe(tanh(x[0]), w23); }},
        {"exp", {{2, 3}}, [&](auto& x) { return probe(exp(x[0]), w23); }},
        {"log", {{2, 3}}, [&](auto& x) { return probe(log(x[0]), w23); }, 0.2, 2.0},
        {"sum", {{2, 3}}, [&](auto& x) { return sum(hadamard(x[0], x[0])); }},
        {"mean", {{2, 3}}, [&](auto& x) { return mean(exp(x[0])); }},
        {"row_sum", {{2, 3}}, [&](auto& x) { return probe(row_sum(x[0]), w21); }},
        {"l2_normalize", {{2, 3}}, [&](auto& x) { return probe(l2_normalize(x[0]), w23); }},
        {"cosine", {{2, 3}, {2, 3}}, [&](auto& x) { return probe(cosine(x[0], x[1]), w21); }},
        {"softmax", {{2, 3}}, [&](auto& x) { return probe(softmax(x[0]), w23); }},
        {"softmax_xent", {{2, 3}}, [&](auto& x) { return softmax_xent(x[0], soft); }},
        {"mse", {{2, 3}}, [&](auto& x) { return mse(x[0], w23); }},
    };
    for (const auto& c : cases) {
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<Tensor> points;
            for (const auto& s : c.shapes) points.push_back(random_tensor(rng, s[0], s[1], c.lo, c.hi));
            worst = std::max(worst, grad_check(c.f, points, 1e-5));
        }
        EXPECT_LT(worst, 1e-4) << c.name;
    }
}

TEST(Determinism, ForwardIsBitReproducible) {
    auto run = [] {
        std::mt19937_64 rng(5);
        Tensor a = random_tensor(rng, 4, 6), b = random_tensor(rng, 6, 3);
        return softmax_xent(tanh(matmul(l2_normalize(a), b)), Tensor::full(4, 3, 1.0 / 3)).item();
    };
    const double first = run();
    EXPECT_EQ(first, run());
}
