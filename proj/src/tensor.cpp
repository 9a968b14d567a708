#include "mvst/tensor.hpp"

#include "mvst/error.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace mvst {

std::size_t shape_size(const Shape& shape)
{
    std::size_t n = 1;
    for (auto d : shape) {
        n *= d;
    }
    return n;
}

std::string shape_string(const Shape& shape)
{
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) {
            out << 'x';
        }
        out << shape[i];
    }
    out << ']';
    return out.str();
}

namespace {

std::shared_ptr<Node> make_node(Shape shape, std::vector<double> values, bool requires_grad)
{
    if (shape_size(shape) != values.size()) {
        throw DimensionError("tensor shape " + shape_string(shape) + " holds "
                             + std::to_string(shape_size(shape)) + " values, got "
                             + std::to_string(values.size()));
    }
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->value = std::move(values);
    node->requires_grad = requires_grad;
    return node;
}

} // namespace

Tensor Tensor::constant(Shape shape, std::vector<double> values)
{
    return Tensor(make_node(std::move(shape), std::move(values), false));
}

Tensor Tensor::zeros(Shape shape)
{
    return filled(std::move(shape), 0.0);
}

Tensor Tensor::filled(Shape shape, double value)
{
    auto n = shape_size(shape);
    return constant(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value)
{
    return constant({}, {value});
}

Tensor Tensor::leaf(Shape shape, std::vector<double> values)
{
    return Tensor(make_node(std::move(shape), std::move(values), true));
}

Tensor Tensor::from_op(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                       BackwardFn backward)
{
    bool needs = std::any_of(parents.begin(), parents.end(),
                             [](const Tensor& p) { return p.requires_grad(); });
    auto node = make_node(std::move(shape), std::move(values), needs);
    if (needs) {
        node->parents = std::move(parents);
        node->backward = std::move(backward);
    }
    return Tensor(std::move(node));
}

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const
{
    if (axis >= node_->shape.size()) {
        throw DimensionError("axis " + std::to_string(axis) + " out of range for shape "
                             + shape_string(node_->shape));
    }
    return node_->shape[axis];
}

std::size_t Tensor::size() const { return node_->value.size(); }

std::span<const double> Tensor::values() const { return node_->value; }

std::span<double> Tensor::mutable_values() { return node_->value; }

double Tensor::item() const
{
    if (size() != 1) {
        throw DimensionError("item() on tensor of shape " + shape_string(shape()));
    }
    return node_->value[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const { return node_->grad; }

std::span<double> Tensor::grad_buffer() const
{
    if (node_->grad.empty()) {
        node_->grad.assign(node_->value.size(), 0.0);
    }
    return node_->grad;
}

void Tensor::zero_grad()
{
    std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::clear_grad() { node_->grad.clear(); }

Tensor Tensor::detach() const { return constant(node_->shape, node_->value); }

void backward(const Tensor& loss)
{
    if (!loss.defined() || loss.size() != 1) {
        throw DimensionError("backward() needs a scalar loss, got shape "
                             + (loss.defined() ? shape_string(loss.shape()) : std::string("<null>")));
    }
    if (!loss.requires_grad()) {
        return;
    }

    // Iterative post-order DFS gives a topological order (parents first).
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(loss.node_.get(), 0);
    seen.insert(loss.node_.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* parent = node->parents[next++].node_.get();
            if (parent->requires_grad && seen.insert(parent).second) {
                stack.emplace_back(parent, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    // Leaves accumulate across calls; intermediates start from zero each pass.
    for (Node* node : order) {
        if (node->backward || node->grad.empty()) {
            node->grad.assign(node->value.size(), 0.0);
        }
    }
    loss.node_->grad[0] += 1.0;

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (node->backward) {
            node->backward(node->grad);
        }
    }
}

} // namespace mvst
