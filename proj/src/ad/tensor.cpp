#include "imml/ad/tensor.hpp"

#include <cmath>

namespace imml::ad {

namespace {

std::shared_ptr<detail::Node> make_node(std::size_t rows, std::size_t cols, std::vector<double> data) {
    if (data.size() != rows * cols)
        throw ShapeMismatch("data length " + std::to_string(data.size()) + " does not match shape " +
                            std::to_string(rows) + "x" + std::to_string(cols));
    auto n = std::make_shared<detail::Node>();
    n->shape = {rows, cols};
    n->data = std::move(data);
    return n;
}

}  // namespace

Tensor::Tensor() : node_(make_node(0, 0, {})) {}

Tensor Tensor::constant(std::size_t rows, std::size_t cols, std::vector<double> data) {
    return Tensor(make_node(rows, cols, std::move(data)));
}

Tensor Tensor::full(std::size_t rows, std::size_t cols, double value) {
    return constant(rows, cols, std::vector<double>(rows * cols, value));
}

Tensor Tensor::row(std::vector<double> values) {
    const std::size_t n = values.size();
    return constant(1, n, std::move(values));
}

double Tensor::item() const {
    if (size() != 1) throw ShapeMismatch("item() needs a 1x1 tensor");
    return node_->data[0];
}

std::vector<double> Tensor::grad() const {
    if (node_->grad.empty()) return std::vector<double>(size(), 0.0);
    return node_->grad;
}

Tensor Tape::leaf(std::size_t rows, std::size_t cols, std::vector<double> data) {
    if (consumed_) throw TapeError("tape already ran backward");
    auto n = make_node(rows, cols, std::move(data));
    n->requires_grad = true;
    n->tape = this;
    nodes_.push_back(n);
    return Tensor(n);
}

Tensor Tape::record(Shape shape, std::vector<double> data, std::vector<std::shared_ptr<detail::Node>> parents,
                    std::function<void(const std::vector<double>&)> backward) {
    if (consumed_) throw TapeError("tape already ran backward");
    auto n = make_node(shape.at(0), shape.at(1), std::move(data));
    n->requires_grad = true;
    n->tape = this;
    n->parents = std::move(parents);
    n->backward = std::move(backward);
    nodes_.push_back(n);
    return Tensor(n);
}

void Tape::backward(const Tensor& output) {
    if (consumed_) throw TapeError("backward already ran on this tape");
    if (output.size() != 1) throw ShapeMismatch("backward needs a scalar output");
    if (output.tape() != this) throw TapeError("output was not recorded on this tape");
    consumed_ = true;
    output.node()->accumulate(0, 1.0);
    std::size_t start = nodes_.size();
    while (start > 0 && nodes_[start - 1] != output.node()) --start;
    for (std::size_t k = start; k-- > 0;) {
        auto& n = *nodes_[k];
        if (n.backward && !n.grad.empty()) n.backward(n.grad);
    }
}

}  // namespace imml::ad
