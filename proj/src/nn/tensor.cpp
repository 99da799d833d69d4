#include "lact/nn/tensor.hpp"

#include "lact/errors.hpp"

#include <cmath>
#include <unordered_set>

namespace lact::nn {

namespace {

thread_local bool g_grad_enabled = true;
bool g_nan_check = false;

} // namespace

std::int64_t numel(const Shape& s)
{
    std::int64_t n = 1;
    for (int d : s)
        n *= d;
    return n;
}

std::string to_string(const Shape& s)
{
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i)
            out += ", ";
        out += std::to_string(s[i]);
    }
    return out + ")";
}

bool grad_enabled()
{
    return g_grad_enabled;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled)
{
    g_grad_enabled = false;
}

NoGradGuard::~NoGradGuard()
{
    g_grad_enabled = previous_;
}

void set_nan_check(bool enabled)
{
    g_nan_check = enabled;
}

bool nan_check()
{
    return g_nan_check;
}

template <class T>
void check_finite(std::span<const T> v, const char* op)
{
    if (!g_nan_check)
        return;
    for (T x : v)
        if (!std::isfinite(x))
            throw NumericError(std::string("non-finite value produced by ") + op);
}

template void check_finite<float>(std::span<const float>, const char*);
template void check_finite<double>(std::span<const double>, const char*);

template <class T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad)
{
    auto n = std::make_shared<Node<T>>();
    n->value.assign(static_cast<std::size_t>(nn::numel(shape)), T(0));
    n->shape = std::move(shape);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

template <class T>
Tensor<T> Tensor<T>::from(Shape shape, std::vector<T> values, bool requires_grad)
{
    if (static_cast<std::int64_t>(values.size()) != nn::numel(shape))
        throw ShapeError("value count " + std::to_string(values.size()) + " does not match shape " +
                         nn::to_string(shape));
    auto n = std::make_shared<Node<T>>();
    n->shape = std::move(shape);
    n->value = std::move(values);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

template <class T>
void Tensor<T>::backward()
{
    if (numel() != 1)
        throw ShapeError("backward() needs a scalar, got shape " + nn::to_string(shape()));

    // Iterative post-order DFS gives a topological order (parents first).
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    std::vector<std::pair<Node<T>*, std::size_t>> stack{{node_.get(), 0}};
    seen.insert(node_.get());
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->parents.size()) {
            Node<T>* p = n->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second)
                stack.emplace_back(p, 0);
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    node_->ensure_grad()[0] = T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<T>* n = *it;
        if (n->backward) {
            n->ensure_grad();
            n->backward();
        }
    }
    for (Node<T>* n : order) {
        if (n->backward) {
            n->backward = nullptr;
            n->parents.clear();
        }
    }
}

template class Tensor<float>;
template class Tensor<double>;

} // namespace lact::nn
