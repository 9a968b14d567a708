#include "mvst/adam.hpp"

#include "mvst/error.hpp"

#include <cmath>

namespace mvst {

void Adam::step(ParameterStore& params)
{
    auto& list = params.parameters();
    for (const auto& p : list) {
        if (!p.tensor.has_grad()) {
            throw NumericError("adam: parameter '" + p.name + "' has no gradient");
        }
    }
    if (m_.empty()) {
        for (const auto& p : list) {
            m_.emplace_back(p.tensor.size(), 0.0);
            v_.emplace_back(p.tensor.size(), 0.0);
        }
    }
    if (m_.size() != list.size()) {
        throw DimensionError("adam: parameter set changed between steps");
    }

    ++step_;
    const auto& o = options_;
    const double t = static_cast<double>(step_);
    const double correction1 = 1.0 - std::pow(o.beta1, t);
    const double correction2 = 1.0 - std::pow(o.beta2, t);

    for (std::size_t i = 0; i < list.size(); ++i) {
        auto& tensor = list[i].tensor;
        auto w = tensor.mutable_values();
        auto g = tensor.grad();
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t j = 0; j < w.size(); ++j) {
            w[j] -= o.lr * o.weight_decay * w[j];
            m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g[j];
            v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g[j] * g[j];
            const double m_hat = m[j] / correction1;
            const double v_hat = v[j] / correction2;
            w[j] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
        }
        tensor.zero_grad();
    }
}

} // namespace mvst
