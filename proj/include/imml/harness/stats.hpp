#pragma once

#include <cstdint>
#include <vector>

#include "imml/harness/data.hpp"

namespace imml::harness {

/// Every paired difference is the same nonzero value. p_value is 0 and
/// mean_diff the common difference.
class DegenerateVariance : public HarnessError {
public:
    DegenerateVariance(double mean_diff, double p_value);
    double mean_diff() const noexcept { return mean_diff_; }
    double p_value() const noexcept { return p_value_; }

private:
    double mean_diff_;
    double p_value_;
};

struct TTestResult {
    double t = 0.0;
    double p_value = 1.0;
    double mean_diff = 0.0;  // mean of b - a
    std::size_t n = 0;
};

/// Two-sided paired Student t-test. All-zero differences give p = 1.
/// Throws std::invalid_argument on unequal or too short lists.
TTestResult significance_test(const std::vector<double>& run_a, const std::vector<double>& run_b);

/// Test accuracy of a softmax-regression probe fit by gradient descent on
/// one modality's training features. modality 0 is P, 1 is A.
double probe_accuracy(const Dataset& d, int modality, std::size_t steps = 300, double lr = 0.5);

}  // namespace imml::harness
