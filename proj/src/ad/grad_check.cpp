#include <algorithm>
#include <cmath>
#include <string>

#include "imml/ad/tensor.hpp"

namespace imml::ad {

namespace {

double finite_or_throw(double v, const char* what) {
    if (!std::isfinite(v)) throw NonFiniteValue(std::string("grad_check: non-finite ") + what);
    return v;
}

double evaluate(const std::function<Tensor(const std::vector<Tensor>&)>& f, const std::vector<Tensor>& points) {
    const Tensor out = f(points);
    if (out.size() != 1) throw ShapeMismatch("grad_check needs a scalar-valued function");
    return finite_or_throw(out.item(), "function value");
}

}  // namespace

double grad_check(const std::function<Tensor(const std::vector<Tensor>&)>& f, const std::vector<Tensor>& points,
                  double h) {
    if (!(h >= 1e-7 && h <= 1e-3)) throw std::invalid_argument("grad_check step must lie in [1e-7, 1e-3]");

    Tape tape;
    std::vector<Tensor> leaves;
    for (const auto& p : points) leaves.push_back(tape.leaf(p));
    const Tensor out = f(leaves);
    if (out.size() != 1) throw ShapeMismatch("grad_check needs a scalar-valued function");
    finite_or_throw(out.item(), "function value");
    if (out.requires_grad()) tape.backward(out);

    double worst = 0.0;
    for (std::size_t t = 0; t < points.size(); ++t) {
        const std::vector<double> analytic = leaves[t].grad();
        for (std::size_t i = 0; i < points[t].size(); ++i) {
            auto shifted = [&](double delta) {
                std::vector<Tensor> moved = points;
                std::vector<double> d = points[t].data();
                d[i] += delta;
                moved[t] = Tensor::constant(points[t].rows(), points[t].cols(), std::move(d));
                return evaluate(f, moved);
            };
            const double numeric = (shifted(h) - shifted(-h)) / (2.0 * h);
            const double a = finite_or_throw(analytic[i], "gradient");
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
            worst = std::max(worst, std::abs(a - numeric) / denom);
        }
    }
    return worst;
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& point, double h) {
    return grad_check([&](const std::vector<Tensor>& p) { return f(p[0]); }, std::vector<Tensor>{point}, h);
}

}  // namespace imml::ad
