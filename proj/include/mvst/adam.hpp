#pragma once

#include "mvst/parameters.hpp"

#include <cstdint>
#include <vector>

namespace mvst {

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

/// Adam with decoupled weight decay (the decay is applied to the weights
/// directly, not folded into the gradient).
class Adam {
public:
    explicit Adam(AdamOptions options) : options_(options) {}

    /// Updates every parameter from its gradient, then zeroes the gradients.
    /// Throws NumericError if a parameter has no gradient.
    void step(ParameterStore& params);

    std::uint64_t steps() const { return step_; }
    const AdamOptions& options() const { return options_; }
    const std::vector<std::vector<double>>& first_moments() const { return m_; }
    const std::vector<std::vector<double>>& second_moments() const { return v_; }

private:
    AdamOptions options_;
    std::uint64_t step_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

} // namespace mvst
