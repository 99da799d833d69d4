#include "lact/nn/gradcheck.hpp"

#include "lact/nn/ops.hpp"
#include "lact/rng.hpp"

#include <algorithm>
#include <cmath>

namespace lact::nn {

double GradCheckReport::worst() const
{
    double w = 0.0;
    for (double e : max_rel_error)
        w = std::max(w, e);
    return w;
}

GradCheckReport grad_check(const DoubleOp& op, std::vector<Tensor<double>> inputs, std::uint64_t seed,
                           double h_scale)
{
    for (auto& t : inputs) {
        t.set_requires_grad(true);
        t.zero_grad();
    }
    Tensor<double> probe;
    {
        NoGradGuard guard;
        probe = op(inputs);
    }
    Rng rng(seed);
    std::vector<double> r(static_cast<std::size_t>(probe.numel()));
    for (double& v : r)
        v = uniform(rng, -1.0, 1.0);

    auto objective = [&] {
        NoGradGuard guard;
        return weighted_sum(op(inputs), r).item();
    };

    Tensor<double> loss = weighted_sum(op(inputs), r);
    loss.backward();

    GradCheckReport report;
    for (auto& t : inputs) {
        const std::vector<double> analytic(t.grad().begin(), t.grad().end());
        double max_diff = 0.0, max_num = 0.0;
        for (std::size_t i = 0; i < t.values().size(); ++i) {
            const double x = t.values()[i];
            const double h = h_scale * (1.0 + std::abs(x));
            t.values()[i] = x + h;
            const double up = objective();
            t.values()[i] = x - h;
            const double down = objective();
            t.values()[i] = x;
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic.empty() ? 0.0 : analytic[i];
            max_diff = std::max(max_diff, std::abs(a - numeric));
            max_num = std::max(max_num, std::abs(numeric));
        }
        report.max_rel_error.push_back(max_num > 0.0 ? max_diff / max_num : max_diff);
    }
    return report;
}

} // namespace lact::nn
