#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mvst {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

struct Node;

/// Dense row-major tensor of doubles with an optional gradient buffer.
///
/// A Tensor is a cheap handle onto a shared graph node. Operations in
/// ops.hpp build new nodes that remember their parents, and backward()
/// walks that graph in reverse topological order. Nodes that do not
/// require a gradient are never written to after construction.
class Tensor {
public:
    /// Called during backward() with the gradient of the node's output.
    using BackwardFn = std::function<void(std::span<const double> grad_out)>;

    Tensor() = default;

    static Tensor constant(Shape shape, std::vector<double> values);
    static Tensor zeros(Shape shape);
    static Tensor filled(Shape shape, double value);
    static Tensor scalar(double value);
    /// Leaf that accumulates gradients across backward passes.
    static Tensor leaf(Shape shape, std::vector<double> values);

    /// Result of a differentiable op. requires_grad is inherited from parents;
    /// when no parent needs a gradient the backward function is dropped.
    static Tensor from_op(Shape shape, std::vector<double> values,
                          std::vector<Tensor> parents, BackwardFn backward);

    bool defined() const noexcept { return node_ != nullptr; }
    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const;

    std::span<const double> values() const;
    /// Direct write access; only for leaves (optimizer updates, loading).
    std::span<double> mutable_values();
    double item() const;
    double at(std::size_t flat_index) const { return values()[flat_index]; }

    bool requires_grad() const;
    bool has_grad() const;
    std::span<const double> grad() const;
    /// Gradient storage, allocated (zeroed) on first use.
    std::span<double> grad_buffer() const;
    void zero_grad();
    void clear_grad();

    /// A new constant tensor holding a copy of this tensor's values.
    Tensor detach() const;

    const Node* node() const noexcept { return node_.get(); }

private:
    explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

    std::shared_ptr<Node> node_;

    friend void backward(const Tensor& loss);
};

struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<Tensor> parents;
    Tensor::BackwardFn backward;
};

/// Reverse-mode accumulation from a scalar loss into every reachable node
/// that requires a gradient. Gradients add up over repeated uses.
void backward(const Tensor& loss);

} // namespace mvst
