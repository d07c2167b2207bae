#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace imml::ad {

class AdError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeMismatch : public AdError {
public:
    using AdError::AdError;
};

/// l2_normalize or cosine saw a row whose norm is at most 1e-12.
class DegenerateNorm : public AdError {
public:
    using AdError::AdError;
};

class NonFiniteValue : public AdError {
public:
    using AdError::AdError;
};

class TapeError : public AdError {
public:
    using AdError::AdError;
};

/// Always rank 2: {rows, cols}. A scalar is 1x1, a row vector 1xn.
using Shape = std::vector<std::size_t>;

class Tape;

namespace detail {

struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until something flows into it
    bool requires_grad = false;
    Tape* tape = nullptr;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(const std::vector<double>&)> backward;

    void accumulate(std::size_t i, double g) {
        if (grad.empty()) grad.assign(data.size(), 0.0);
        grad[i] += g;
    }
};

}  // namespace detail

/// Handle to a dense row-major float64 matrix. Copies share storage.
class Tensor {
public:
    Tensor();
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

    static Tensor constant(std::size_t rows, std::size_t cols, std::vector<double> data);
    static Tensor full(std::size_t rows, std::size_t cols, double value);
    static Tensor zeros(std::size_t rows, std::size_t cols) { return full(rows, cols, 0.0); }
    static Tensor scalar(double value) { return full(1, 1, value); }
    /// Row vector; handy for weights and label vectors.
    static Tensor row(std::vector<double> values);

    const Shape& shape() const { return node_->shape; }
    std::size_t rows() const { return node_->shape[0]; }
    std::size_t cols() const { return node_->shape[1]; }
    std::size_t size() const { return node_->data.size(); }
    const std::vector<double>& data() const { return node_->data; }
    double at(std::size_t r, std::size_t c) const { return node_->data[r * cols() + c]; }
    /// Value of a 1x1 tensor.
    double item() const;

    bool requires_grad() const { return node_->requires_grad; }
    bool has_grad() const { return !node_->grad.empty(); }
    /// Gradient after backward; zeros if nothing reached this tensor.
    std::vector<double> grad() const;
    Tape* tape() const { return node_->tape; }

    const std::shared_ptr<detail::Node>& node() const { return node_; }

private:
    std::shared_ptr<detail::Node> node_;
};

/// Records operations on grad-tracking tensors. backward runs once.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Trainable input owned by this tape.
    Tensor leaf(std::size_t rows, std::size_t cols, std::vector<double> data);
    Tensor leaf(const Tensor& value) { return leaf(value.rows(), value.cols(), value.data()); }

    Tensor record(Shape shape, std::vector<double> data, std::vector<std::shared_ptr<detail::Node>> parents,
                  std::function<void(const std::vector<double>&)> backward);

    /// Seeds d(output)/d(output) = 1 and walks the recording in reverse.
    void backward(const Tensor& output);

    std::size_t size() const { return nodes_.size(); }

private:
    std::vector<std::shared_ptr<detail::Node>> nodes_;
    bool consumed_ = false;
};

// Matrix ops. Shapes must agree exactly; the only broadcast is add_bias.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// a is r x c, bias is 1 x c.
Tensor add_bias(const Tensor& a, const Tensor& bias);
Tensor scale(const Tensor& a, double s);
Tensor hadamard(const Tensor& a, const Tensor& b);
/// Elementwise a / b; throws NonFiniteValue on a zero divisor.
Tensor div(const Tensor& a, const Tensor& b);
/// Row r multiplied by the constant s[r].
Tensor scale_rows(const Tensor& a, const std::vector<double>& s);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor gather_rows(const Tensor& a, const std::vector<std::size_t>& rows);

Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
/// Throws NonFiniteValue on entries <= 0.
Tensor log(const Tensor& a);

/// 1x1 sum of all entries.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// r x 1 sums over columns.
Tensor row_sum(const Tensor& a);

inline constexpr double kNormEpsilon = 1e-12;

/// Row-wise x / sqrt(|x|^2 + 1e-12).
Tensor l2_normalize(const Tensor& a);
/// Row-wise cosine similarity, r x 1.
Tensor cosine(const Tensor& a, const Tensor& b);
/// Row-wise softmax.
Tensor softmax(const Tensor& a);
/// Sum over rows of -sum_k t_k log softmax(z)_k. Targets are constants on the simplex.
Tensor softmax_xent(const Tensor& logits, const Tensor& targets);
/// Sum over rows of the per-row mean squared error.
Tensor mse(const Tensor& pred, const Tensor& target);

/// Max relative error between reverse-mode and central-difference gradients of
/// a scalar function, over every coordinate of every point.
double grad_check(const std::function<Tensor(const std::vector<Tensor>&)>& f, const std::vector<Tensor>& points,
                  double h);
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& point, double h);

}  // namespace imml::ad
