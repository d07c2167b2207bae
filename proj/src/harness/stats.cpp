#include "imml/harness/stats.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "imml/harness/model.hpp"
#include "imml/losses/losses.hpp"

namespace imml::harness {

DegenerateVariance::DegenerateVariance(double mean_diff, double p_value)
    : HarnessError("paired differences are all " + std::to_string(mean_diff) + "; variance is zero"),
      mean_diff_(mean_diff),
      p_value_(p_value) {}

TTestResult significance_test(const std::vector<double>& run_a, const std::vector<double>& run_b) {
    if (run_a.size() != run_b.size()) throw std::invalid_argument("paired runs differ in length");
    if (run_a.size() < 2) throw std::invalid_argument("paired t-test needs at least two pairs");
    const std::size_t n = run_a.size();
    std::vector<double> d(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = run_b[i] - run_a[i];
        mean += d[i];
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    bool constant = true;
    for (double v : d) {
        ss += (v - mean) * (v - mean);
        constant = constant && v == d[0];
    }

    TTestResult r;
    r.n = n;
    r.mean_diff = mean;
    if (constant) {
        if (d[0] == 0.0) return r;
        throw DegenerateVariance(d[0], 0.0);
    }
    const double se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    r.t = mean / se;
    boost::math::students_t dist(static_cast<double>(n - 1));
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    return r;
}

double probe_accuracy(const Dataset& d, int modality, std::size_t steps, double lr) {
    if (modality != 0 && modality != 1) throw std::invalid_argument("modality must be 0 (P) or 1 (A)");
    const Split& tr = d.train;
    const Tensor& x = modality == 0 ? tr.x_p : tr.x_a;
    const Tensor targets = losses::label_matrix(one_hot_rows(tr.y, d.classes));
    Tensor w = Tensor::zeros(x.cols(), d.classes), b = Tensor::zeros(1, d.classes);
    const double inv_n = 1.0 / static_cast<double>(tr.size());
    for (std::size_t s = 0; s < steps; ++s) {
        ad::Tape tape;
        const Tensor lw = tape.leaf(w), lb = tape.leaf(b);
        tape.backward(ad::scale(ad::softmax_xent(ad::add_bias(ad::matmul(x, lw), lb), targets), inv_n));
        auto step = [&](const Tensor& value, const Tensor& leaf) {
            auto v = value.data();
            const auto g = leaf.grad();
            for (std::size_t j = 0; j < v.size(); ++j) v[j] -= lr * g[j];
            return Tensor::constant(value.rows(), value.cols(), std::move(v));
        };
        w = step(w, lw);
        b = step(b, lb);
    }
    const Tensor& xt = modality == 0 ? d.test.x_p : d.test.x_a;
    return accuracy(ad::add_bias(ad::matmul(xt, w), b), d.test.y);
}

}  // namespace imml::harness
