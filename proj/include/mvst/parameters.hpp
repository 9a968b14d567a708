#pragma once

#include "mvst/rng.hpp"
#include "mvst/tensor.hpp"

#include <string>
#include <vector>

namespace mvst {

struct Parameter {
    std::string name;
    Tensor tensor;
};

/// Ordered, name-unique collection of trainable leaves.
///
/// Registration order is the iteration order for the optimizer and the
/// checkpoint, so it must not depend on anything but the model config.
class ParameterStore {
public:
    Tensor add(std::string name, Shape shape, std::vector<double> values);
    /// uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) initialization.
    Tensor add_uniform(std::string name, Shape shape, std::size_t fan_in, Rng& rng);
    Tensor add_filled(std::string name, Shape shape, double value);

    const std::vector<Parameter>& parameters() const { return params_; }
    std::vector<Parameter>& parameters() { return params_; }

    bool contains(const std::string& name) const;
    Tensor get(const std::string& name) const;
    std::size_t scalar_count() const;
    void zero_grad();

private:
    std::vector<Parameter> params_;
};

} // namespace mvst
