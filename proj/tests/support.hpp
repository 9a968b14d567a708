#pragma once

#include "mvst/ops.hpp"
#include "mvst/rng.hpp"
#include "mvst/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace mvst::testing {

inline std::vector<double> random_values(std::size_t n, Rng& rng, double scale = 1.0)
{
    std::vector<double> v(n);
    for (auto& x : v) {
        x = rng.uniform(-scale, scale);
    }
    return v;
}

inline Tensor random_leaf(Shape shape, Rng& rng, double scale = 1.0)
{
    const auto n = shape_size(shape);
    return Tensor::leaf(std::move(shape), random_values(n, rng, scale));
}

inline Tensor random_constant(Shape shape, Rng& rng, double scale = 1.0)
{
    const auto n = shape_size(shape);
    return Tensor::constant(std::move(shape), random_values(n, rng, scale));
}

/// Scalar probe sensitive to every output entry.
inline Tensor probe(const Tensor& out, std::uint64_t seed)
{
    Rng rng(seed);
    return sum(mul(out, random_constant(out.shape(), rng)));
}

struct GradCheck {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
};

/// Central differences on `coords` random coordinates of `leaves`, compared
/// with the reverse-mode gradient of the scalar `loss_fn()`.
inline GradCheck grad_check(const std::function<Tensor()>& loss_fn, std::vector<Tensor> leaves,
                            std::size_t coords, std::uint64_t seed, double h = 1e-5)
{
    for (auto& l : leaves) {
        l.grad_buffer();
        l.zero_grad();
    }
    backward(loss_fn());
    std::vector<std::vector<double>> analytic;
    for (auto& l : leaves) {
        analytic.emplace_back(l.grad().begin(), l.grad().end());
    }
    Rng rng(seed);
    GradCheck result;
    for (std::size_t i = 0; i < coords; ++i) {
        const auto li = static_cast<std::size_t>(rng.below(leaves.size()));
        auto values = leaves[li].mutable_values();
        const auto idx = static_cast<std::size_t>(rng.below(values.size()));
        const double saved = values[idx];
        values[idx] = saved + h;
        const double up = loss_fn().item();
        values[idx] = saved - h;
        const double down = loss_fn().item();
        values[idx] = saved;
        const double numeric = (up - down) / (2 * h);
        const double a = analytic[li][idx];
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
        result.max_rel_error = std::max(result.max_rel_error, rel);
        ++result.checked;
    }
    return result;
}

} // namespace mvst::testing
