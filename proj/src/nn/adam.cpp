#include "lact/nn/adam.hpp"

#include "lact/errors.hpp"

#include <cmath>
#include <map>

namespace lact::nn {

template <class T>
Adam<T>::Adam(NamedTensors<T> params, AdamOptions options) : params_(std::move(params)), options_(options)
{
    if (!(options_.lr >= 0.0) || !(options_.beta1 >= 0.0 && options_.beta1 < 1.0) ||
        !(options_.beta2 >= 0.0 && options_.beta2 < 1.0) || !(options_.eps > 0.0))
        throw UsageError("invalid Adam hyperparameters");
    for (const auto& [name, t] : params_) {
        m_.emplace_back(static_cast<std::size_t>(t.numel()), T(0));
        v_.emplace_back(static_cast<std::size_t>(t.numel()), T(0));
    }
}

template <class T>
void Adam<T>::step()
{
    ++step_;
    const double b1 = options_.beta1, b2 = options_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    for (std::size_t p = 0; p < params_.size(); ++p) {
        Tensor<T>& t = params_[p].second;
        const auto g = t.grad();
        auto& m = m_[p];
        auto& v = v_[p];
        auto& w = t.values();
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double gi = g.empty() ? 0.0 : static_cast<double>(g[i]);
            const double mi = b1 * m[i] + (1.0 - b1) * gi;
            const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
            m[i] = static_cast<T>(mi);
            v[i] = static_cast<T>(vi);
            const double mh = m[i] / c1, vh = v[i] / c2;
            w[i] = static_cast<T>(w[i] - options_.lr * mh / (std::sqrt(vh) + options_.eps));
        }
    }
}

template <class T>
void Adam<T>::zero_grad()
{
    for (auto& [name, t] : params_)
        t.zero_grad();
}

template <class T>
typename Adam<T>::State Adam<T>::state() const
{
    State s;
    s.step = step_;
    for (std::size_t p = 0; p < params_.size(); ++p) {
        s.m.emplace_back(params_[p].first, std::vector<float>(m_[p].begin(), m_[p].end()));
        s.v.emplace_back(params_[p].first, std::vector<float>(v_[p].begin(), v_[p].end()));
    }
    return s;
}

template <class T>
void Adam<T>::load_state(const State& s)
{
    auto index = [](const std::vector<std::pair<std::string, std::vector<float>>>& list) {
        std::map<std::string, const std::vector<float>*> out;
        for (const auto& [name, v] : list)
            out.emplace(name, &v);
        return out;
    };
    const auto m = index(s.m), v = index(s.v);
    if (m.size() != params_.size() || v.size() != params_.size())
        throw DataError("optimizer state does not cover the model parameters");
    for (std::size_t p = 0; p < params_.size(); ++p) {
        const std::string& name = params_[p].first;
        auto mi = m.find(name), vi = v.find(name);
        if (mi == m.end() || vi == v.end())
            throw DataError("optimizer state is missing '" + name + "'");
        if (mi->second->size() != m_[p].size() || vi->second->size() != v_[p].size())
            throw ShapeError("optimizer state for '" + name + "' has the wrong size");
        std::copy(mi->second->begin(), mi->second->end(), m_[p].begin());
        std::copy(vi->second->begin(), vi->second->end(), v_[p].begin());
    }
    step_ = s.step;
}

template class Adam<float>;
template class Adam<double>;

} // namespace lact::nn
