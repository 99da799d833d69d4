#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lact::nn {

using Shape = std::vector<int>;

std::int64_t numel(const Shape& s);
std::string to_string(const Shape& s);

/// Graph node: value, lazily allocated gradient and the closure that pushes
/// this node's gradient into its parents.
template <class T>
struct Node {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void()> backward;

    std::vector<T>& ensure_grad()
    {
        if (grad.size() != value.size())
            grad.assign(value.size(), T(0));
        return grad;
    }
};

/// Gradient recording is on by default; a NoGradGuard turns it off for the
/// current thread (inference).
bool grad_enabled();

class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

/// When enabled, every op checks its output for NaN/Inf and throws NumericError.
void set_nan_check(bool enabled);
bool nan_check();

/// Shared handle to a graph node. Copies alias the same storage.
template <class T>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false);
    static Tensor scalar(T v) { return from({1}, {v}); }

    bool defined() const { return static_cast<bool>(node_); }
    const Shape& shape() const { return node_->shape; }
    int dim(int i) const { return node_->shape[static_cast<std::size_t>(i)]; }
    int rank() const { return static_cast<int>(node_->shape.size()); }
    std::int64_t numel() const { return static_cast<std::int64_t>(node_->value.size()); }

    std::span<T> data() { return node_->value; }
    std::span<const T> data() const { return node_->value; }
    std::vector<T>& values() { return node_->value; }
    const std::vector<T>& values() const { return node_->value; }
    T item() const { return node_->value.at(0); }

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool on) { node_->requires_grad = on; }
    /// Empty span until a backward pass reached this tensor.
    std::span<const T> grad() const { return node_->grad; }
    std::vector<T>& mutable_grad() { return node_->ensure_grad(); }
    void zero_grad() { node_->grad.assign(node_->value.size(), T(0)); }

    /// Reverse-mode sweep from this (scalar) tensor. The recorded graph is
    /// released afterwards; leaves keep their accumulated gradients.
    void backward();

    Node<T>* node() const { return node_.get(); }
    const std::shared_ptr<Node<T>>& ptr() const { return node_; }

private:
    std::shared_ptr<Node<T>> node_;
};

/// True when recording is on and any input requires a gradient.
template <class T>
bool needs_grad(std::initializer_list<const Tensor<T>*> inputs)
{
    if (!grad_enabled())
        return false;
    for (const Tensor<T>* t : inputs)
        if (t && t->defined() && t->requires_grad())
            return true;
    return false;
}

/// Connects `out` to its parents with the given backward closure.
template <class T>
void attach(Tensor<T>& out, std::initializer_list<const Tensor<T>*> inputs, std::function<void()> fn)
{
    Node<T>* n = out.node();
    n->requires_grad = true;
    for (const Tensor<T>* t : inputs)
        if (t && t->defined() && t->requires_grad())
            n->parents.push_back(t->ptr());
    n->backward = std::move(fn);
}

/// Throws NumericError naming `op` when the check is on and `v` has a non-finite entry.
template <class T>
void check_finite(std::span<const T> v, const char* op);

extern template class Tensor<float>;
extern template class Tensor<double>;

} // namespace lact::nn
