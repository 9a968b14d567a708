#include "mvst/parameters.hpp"

#include "mvst/error.hpp"

#include <algorithm>
#include <cmath>

namespace mvst {

Tensor ParameterStore::add(std::string name, Shape shape, std::vector<double> values)
{
    if (contains(name)) {
        throw ConfigError("duplicate parameter name '" + name + "'");
    }
    auto t = Tensor::leaf(std::move(shape), std::move(values));
    params_.push_back({std::move(name), t});
    return t;
}

Tensor ParameterStore::add_uniform(std::string name, Shape shape, std::size_t fan_in, Rng& rng)
{
    const double bound = std::sqrt(1.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    std::vector<double> values(shape_size(shape));
    for (auto& v : values) {
        v = rng.uniform(-bound, bound);
    }
    return add(std::move(name), std::move(shape), std::move(values));
}

Tensor ParameterStore::add_filled(std::string name, Shape shape, double value)
{
    auto n = shape_size(shape);
    return add(std::move(name), std::move(shape), std::vector<double>(n, value));
}

bool ParameterStore::contains(const std::string& name) const
{
    return std::any_of(params_.begin(), params_.end(),
                       [&](const Parameter& p) { return p.name == name; });
}

Tensor ParameterStore::get(const std::string& name) const
{
    for (const auto& p : params_) {
        if (p.name == name) {
            return p.tensor;
        }
    }
    throw ConfigError("no parameter named '" + name + "'");
}

std::size_t ParameterStore::scalar_count() const
{
    std::size_t n = 0;
    for (const auto& p : params_) {
        n += p.tensor.size();
    }
    return n;
}

void ParameterStore::zero_grad()
{
    for (auto& p : params_) {
        p.tensor.zero_grad();
    }
}

} // namespace mvst
