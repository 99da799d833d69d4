#include "lact/nn/ops.hpp"

#include "lact/errors.hpp"
#include "lact/nn/kernels.hpp"

#include <cmath>
#include <numbers>

namespace lact::nn {

namespace {

template <class T>
void require_rank4(const Tensor<T>& x, const char* op)
{
    if (!x.defined() || x.rank() != 4)
        throw ShapeError(std::string(op) + ": expected an NCHW tensor");
}

template <class T>
Tensor<T> make_output(Shape shape)
{
    return Tensor<T>::zeros(std::move(shape));
}

} // namespace

// ---------------------------------------------------------------- conv2d

template <class T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, int stride, int pad)
{
    require_rank4(x, "conv2d");
    require_rank4(w, "conv2d weight");
    if (stride < 1 || pad < 0)
        throw ShapeError("conv2d: stride must be >= 1 and padding >= 0");
    if (w.dim(1) != x.dim(1) || w.dim(2) != w.dim(3))
        throw ShapeError("conv2d: weight " + to_string(w.shape()) + " does not fit input " + to_string(x.shape()));
    if (bias.defined() && bias.numel() != w.dim(0))
        throw ShapeError("conv2d: bias length does not match output channels");

    kernels::ConvShape s;
    s.batch = x.dim(0);
    s.in_channels = x.dim(1);
    s.in_h = x.dim(2);
    s.in_w = x.dim(3);
    s.out_channels = w.dim(0);
    s.kernel = w.dim(2);
    s.stride = stride;
    s.pad = pad;
    if (s.in_h + 2 * pad < s.kernel || s.in_w + 2 * pad < s.kernel)
        throw ShapeError("conv2d: kernel larger than padded input " + to_string(x.shape()));

    Tensor<T> out = make_output<T>({s.batch, s.out_channels, s.out_h(), s.out_w()});
    kernels::conv2d_forward(s, x.data().data(), w.data().data(), bias.defined() ? bias.data().data() : nullptr,
                            out.data().data());
    check_finite<T>(out.data(), "conv2d");

    if (needs_grad<T>({&x, &w, &bias})) {
        auto xn = x.ptr(), wn = w.ptr();
        auto bn = bias.defined() ? bias.ptr() : nullptr;
        Node<T>* on = out.node();
        attach(out, {&x, &w, &bias}, [xn, wn, bn, on, s] {
            const T* dy = on->grad.data();
            if (xn->requires_grad)
                kernels::conv2d_backward_input(s, dy, wn->value.data(), xn->ensure_grad().data(), true);
            if (wn->requires_grad || (bn && bn->requires_grad)) {
                std::vector<T> dw_scratch;
                T* dw = nullptr;
                if (wn->requires_grad) {
                    dw = wn->ensure_grad().data();
                } else {
                    dw_scratch.assign(wn->value.size(), T(0));
                    dw = dw_scratch.data();
                }
                T* db = (bn && bn->requires_grad) ? bn->ensure_grad().data() : nullptr;
                kernels::conv2d_backward_weight(s, xn->value.data(), dy, dw, db);
            }
        });
    }
    return out;
}

// ------------------------------------------------------ conv_transpose2d

template <class T>
Tensor<T> conv_transpose2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias, int stride, int pad)
{
    require_rank4(x, "conv_transpose2d");
    require_rank4(w, "conv_transpose2d weight");
    if (stride < 1 || pad < 0)
        throw ShapeError("conv_transpose2d: stride must be >= 1 and padding >= 0");
    if (w.dim(0) != x.dim(1) || w.dim(2) != w.dim(3))
        throw ShapeError("conv_transpose2d: weight " + to_string(w.shape()) + " does not fit input " +
                         to_string(x.shape()));
    if (bias.defined() && bias.numel() != w.dim(1))
        throw ShapeError("conv_transpose2d: bias length does not match output channels");

    const int k = w.dim(2);
    const int oh = (x.dim(2) - 1) * stride - 2 * pad + k;
    const int ow = (x.dim(3) - 1) * stride - 2 * pad + k;
    if (oh < 1 || ow < 1)
        throw ShapeError("conv_transpose2d: empty output");

    // The matching forward convolution maps the output space to the input space.
    kernels::ConvShape s;
    s.batch = x.dim(0);
    s.in_channels = w.dim(1);
    s.in_h = oh;
    s.in_w = ow;
    s.out_channels = w.dim(0);
    s.kernel = k;
    s.stride = stride;
    s.pad = pad;
    if (s.out_h() != x.dim(2) || s.out_w() != x.dim(3))
        throw ShapeError("conv_transpose2d: inconsistent stride/padding for input " + to_string(x.shape()));

    Tensor<T> out = make_output<T>({s.batch, s.in_channels, oh, ow});
    kernels::conv2d_backward_input(s, x.data().data(), w.data().data(), out.data().data(), false);
    const int pix = oh * ow;
    if (bias.defined()) {
        for (int n = 0; n < s.batch; ++n)
            for (int c = 0; c < s.in_channels; ++c) {
                T* p = out.data().data() + (static_cast<std::size_t>(n) * s.in_channels + c) * pix;
                const T b = bias.data()[c];
                for (int i = 0; i < pix; ++i)
                    p[i] += b;
            }
    }
    check_finite<T>(out.data(), "conv_transpose2d");

    if (needs_grad<T>({&x, &w, &bias})) {
        auto xn = x.ptr(), wn = w.ptr();
        auto bn = bias.defined() ? bias.ptr() : nullptr;
        Node<T>* on = out.node();
        attach(out, {&x, &w, &bias}, [xn, wn, bn, on, s, pix] {
            const T* dy = on->grad.data();
            if (xn->requires_grad) {
                std::vector<T> dx(xn->value.size());
                kernels::conv2d_forward(s, dy, wn->value.data(), static_cast<const T*>(nullptr), dx.data());
                auto& g = xn->ensure_grad();
                for (std::size_t i = 0; i < dx.size(); ++i)
                    g[i] += dx[i];
            }
            if (wn->requires_grad)
                kernels::conv2d_backward_weight(s, dy, xn->value.data(), wn->ensure_grad().data(),
                                                static_cast<T*>(nullptr));
            if (bn && bn->requires_grad) {
                auto& g = bn->ensure_grad();
                for (int n = 0; n < s.batch; ++n)
                    for (int c = 0; c < s.in_channels; ++c) {
                        const T* p = dy + (static_cast<std::size_t>(n) * s.in_channels + c) * pix;
                        T acc = T(0);
                        for (int i = 0; i < pix; ++i)
                            acc += p[i];
                        g[c] += acc;
                    }
            }
        });
    }
    return out;
}

// ------------------------------------------------------------ batch_norm

template <class T>
Tensor<T> batch_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, Tensor<T>& running_mean,
                     Tensor<T>& running_var, const BatchNormOptions& opt)
{
    require_rank4(x, "batch_norm");
    const int nb = x.dim(0), nc = x.dim(1), pix = x.dim(2) * x.dim(3);
    if (nb == 0)
        throw ShapeError("batch_norm: empty batch");
    if (gamma.numel() != nc || beta.numel() != nc || running_mean.numel() != nc || running_var.numel() != nc)
        throw ShapeError("batch_norm: parameter length does not match channel count");

    const std::int64_t m = static_cast<std::int64_t>(nb) * pix;
    std::vector<T> mean(nc), inv_std(nc);
    const T* xv = x.data().data();
    if (opt.training) {
        for (int c = 0; c < nc; ++c) {
            double s = 0.0;
            for (int n = 0; n < nb; ++n) {
                const T* p = xv + (static_cast<std::size_t>(n) * nc + c) * pix;
                for (int i = 0; i < pix; ++i)
                    s += p[i];
            }
            const double mu = s / static_cast<double>(m);
            double ss = 0.0;
            for (int n = 0; n < nb; ++n) {
                const T* p = xv + (static_cast<std::size_t>(n) * nc + c) * pix;
                for (int i = 0; i < pix; ++i) {
                    const double d = p[i] - mu;
                    ss += d * d;
                }
            }
            const double var = ss / static_cast<double>(m);
            mean[c] = static_cast<T>(mu);
            inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + opt.eps));
            const double unbiased = m > 1 ? var * static_cast<double>(m) / static_cast<double>(m - 1) : var;
            T& rm = running_mean.data()[c];
            T& rv = running_var.data()[c];
            rm = static_cast<T>((1.0 - opt.momentum) * rm + opt.momentum * mu);
            rv = static_cast<T>((1.0 - opt.momentum) * rv + opt.momentum * unbiased);
        }
    } else {
        for (int c = 0; c < nc; ++c) {
            mean[c] = running_mean.data()[c];
            inv_std[c] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(running_var.data()[c]) + opt.eps));
        }
    }

    Tensor<T> out = make_output<T>(x.shape());
    std::vector<T> xhat(x.values().size());
    for (int n = 0; n < nb; ++n)
        for (int c = 0; c < nc; ++c) {
            const std::size_t off = (static_cast<std::size_t>(n) * nc + c) * pix;
            const T g = gamma.data()[c], b = beta.data()[c], mu = mean[c], is = inv_std[c];
            for (int i = 0; i < pix; ++i) {
                const T h = (xv[off + i] - mu) * is;
                xhat[off + i] = h;
                out.data()[off + i] = g * h + b;
            }
        }
    check_finite<T>(out.data(), "batch_norm");

    if (needs_grad<T>({&x, &gamma, &beta})) {
        auto xn = x.ptr(), gn = gamma.ptr(), bn = beta.ptr();
        Node<T>* on = out.node();
        const bool training = opt.training;
        attach(out, {&x, &gamma, &beta},
               [xn, gn, bn, on, xhat = std::move(xhat), inv_std, nb, nc, pix, m, training] {
                   const T* dy = on->grad.data();
                   for (int c = 0; c < nc; ++c) {
                       double sdy = 0.0, sdyh = 0.0;
                       for (int n = 0; n < nb; ++n) {
                           const std::size_t off = (static_cast<std::size_t>(n) * nc + c) * pix;
                           for (int i = 0; i < pix; ++i) {
                               sdy += dy[off + i];
                               sdyh += static_cast<double>(dy[off + i]) * xhat[off + i];
                           }
                       }
                       if (gn->requires_grad)
                           gn->ensure_grad()[c] += static_cast<T>(sdyh);
                       if (bn->requires_grad)
                           bn->ensure_grad()[c] += static_cast<T>(sdy);
                       if (!xn->requires_grad)
                           continue;
                       auto& dx = xn->ensure_grad();
                       const T k = gn->value[c] * inv_std[c];
                       const T mdy = static_cast<T>(sdy / static_cast<double>(m));
                       const T mdyh = static_cast<T>(sdyh / static_cast<double>(m));
                       for (int n = 0; n < nb; ++n) {
                           const std::size_t off = (static_cast<std::size_t>(n) * nc + c) * pix;
                           for (int i = 0; i < pix; ++i)
                               dx[off + i] += training ? k * (dy[off + i] - mdy - xhat[off + i] * mdyh) : k * dy[off + i];
                       }
                   }
               });
    }
    return out;
}

// ------------------------------------------------------------------ gelu

template <class T>
Tensor<T> gelu(const Tensor<T>& x)
{
    Tensor<T> out = make_output<T>(x.shape());
    const std::size_t n = x.values().size();
    const T* xv = x.data().data();
    T* yv = out.data().data();
    for (std::size_t i = 0; i < n; ++i)
        yv[i] = static_cast<T>(0.5) * xv[i] * (T(1) + std::erf(xv[i] * static_cast<T>(std::numbers::sqrt2 / 2)));
    check_finite<T>(out.data(), "gelu");
    if (needs_grad<T>({&x})) {
        auto xn = x.ptr();
        Node<T>* on = out.node();
        attach(out, {&x}, [xn, on] {
            auto& dx = xn->ensure_grad();
            const T inv_sqrt2pi = static_cast<T>(0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
            for (std::size_t i = 0; i < dx.size(); ++i) {
                const T v = xn->value[i];
                const T cdf = static_cast<T>(0.5) * (T(1) + std::erf(v * static_cast<T>(std::numbers::sqrt2 / 2)));
                const T pdf = inv_sqrt2pi * std::exp(static_cast<T>(-0.5) * v * v);
                dx[i] += on->grad[i] * (cdf + v * pdf);
            }
        });
    }
    return out;
}

// ------------------------------------------------------ elementwise misc

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b)
{
    if (a.shape() != b.shape())
        throw ShapeError("add: shapes " + to_string(a.shape()) + " and " + to_string(b.shape()) + " differ");
    Tensor<T> out = make_output<T>(a.shape());
    for (std::size_t i = 0; i < out.values().size(); ++i)
        out.values()[i] = a.values()[i] + b.values()[i];
    check_finite<T>(out.data(), "add");
    if (needs_grad<T>({&a, &b})) {
        auto an = a.ptr(), bn = b.ptr();
        Node<T>* on = out.node();
        attach(out, {&a, &b}, [an, bn, on] {
            for (Node<T>* p : {an.get(), bn.get()}) {
                if (!p->requires_grad)
                    continue;
                auto& g = p->ensure_grad();
                for (std::size_t i = 0; i < g.size(); ++i)
                    g[i] += on->grad[i];
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> scale(const Tensor<T>& x, T factor)
{
    Tensor<T> out = make_output<T>(x.shape());
    for (std::size_t i = 0; i < out.values().size(); ++i)
        out.values()[i] = x.values()[i] * factor;
    check_finite<T>(out.data(), "scale");
    if (needs_grad<T>({&x})) {
        auto xn = x.ptr();
        Node<T>* on = out.node();
        attach(out, {&x}, [xn, on, factor] {
            auto& g = xn->ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i)
                g[i] += on->grad[i] * factor;
        });
    }
    return out;
}

template <class T>
Tensor<T> channel_scale(const Tensor<T>& x, const std::vector<T>& factors)
{
    require_rank4(x, "channel_scale");
    const int nb = x.dim(0), nc = x.dim(1), pix = x.dim(2) * x.dim(3);
    if (static_cast<int>(factors.size()) != nc)
        throw ShapeError("channel_scale: factor count does not match channels");
    Tensor<T> out = make_output<T>(x.shape());
    for (int n = 0; n < nb; ++n)
        for (int c = 0; c < nc; ++c) {
            const std::size_t off = (static_cast<std::size_t>(n) * nc + c) * pix;
            for (int i = 0; i < pix; ++i)
                out.values()[off + i] = x.values()[off + i] * factors[c];
        }
    check_finite<T>(out.data(), "channel_scale");
    if (needs_grad<T>({&x})) {
        auto xn = x.ptr();
        Node<T>* on = out.node();
        attach(out, {&x}, [xn, on, factors, nb, nc, pix] {
            auto& g = xn->ensure_grad();
            for (int n = 0; n < nb; ++n)
                for (int c = 0; c < nc; ++c) {
                    const std::size_t off = (static_cast<std::size_t>(n) * nc + c) * pix;
                    for (int i = 0; i < pix; ++i)
                        g[off + i] += on->grad[off + i] * factors[c];
                }
        });
    }
    return out;
}

template <class T>
Tensor<T> pad2d(const Tensor<T>& x, int top, int bottom, int left, int right)
{
    require_rank4(x, "pad2d");
    if (top < 0 || bottom < 0 || left < 0 || right < 0)
        throw ShapeError("pad2d: negative padding");
    const int nb = x.dim(0), nc = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int oh = h + top + bottom, ow = w + left + right;
    if (oh == h && ow == w)
        return x;
    Tensor<T> out = make_output<T>({nb, nc, oh, ow});
    const int planes = nb * nc;
    for (int p = 0; p < planes; ++p)
        for (int r = 0; r < h; ++r) {
            const T* src = x.data().data() + (static_cast<std::size_t>(p) * h + r) * w;
            T* dst = out.data().data() + (static_cast<std::size_t>(p) * oh + r + top) * ow + left;
            std::copy(src, src + w, dst);
        }
    if (needs_grad<T>({&x})) {
        auto xn = x.ptr();
        Node<T>* on = out.node();
        attach(out, {&x}, [xn, on, planes, h, w, oh, ow, top, left] {
            auto& g = xn->ensure_grad();
            for (int p = 0; p < planes; ++p)
                for (int r = 0; r < h; ++r) {
                    const T* src = on->grad.data() + (static_cast<std::size_t>(p) * oh + r + top) * ow + left;
                    T* dst = g.data() + (static_cast<std::size_t>(p) * h + r) * w;
                    for (int c = 0; c < w; ++c)
                        dst[c] += src[c];
                }
        });
    }
    return out;
}

template <class T>
Tensor<T> adaptive_avg_pool2d(const Tensor<T>& x, int out_h, int out_w)
{
    require_rank4(x, "adaptive_avg_pool2d");
    if (out_h < 1 || out_w < 1)
        throw ShapeError("adaptive_avg_pool2d: output size must be positive");
    const int nb = x.dim(0), nc = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (h == out_h && w == out_w)
        return x;
    auto bins = [](int in, int out) {
        std::vector<std::pair<int, int>> b(static_cast<std::size_t>(out));
        for (int i = 0; i < out; ++i)
            b[i] = {static_cast<int>((static_cast<std::int64_t>(i) * in) / out),
                    static_cast<int>((static_cast<std::int64_t>(i + 1) * in + out - 1) / out)};
        return b;
    };
    const auto rb = bins(h, out_h), cb = bins(w, out_w);
    Tensor<T> out = make_output<T>({nb, nc, out_h, out_w});
    const int planes = nb * nc;
    for (int p = 0; p < planes; ++p) {
        const T* src = x.data().data() + static_cast<std::size_t>(p) * h * w;
        T* dst = out.data().data() + static_cast<std::size_t>(p) * out_h * out_w;
        for (int i = 0; i < out_h; ++i)
            for (int j = 0; j < out_w; ++j) {
                T acc = T(0);
                for (int r = rb[i].first; r < rb[i].second; ++r)
                    for (int c = cb[j].first; c < cb[j].second; ++c)
                        acc += src[r * w + c];
                dst[i * out_w + j] =
                    acc / static_cast<T>((rb[i].second - rb[i].first) * (cb[j].second - cb[j].first));
            }
    }
    if (needs_grad<T>({&x})) {
        auto xn = x.ptr();
        Node<T>* on = out.node();
        attach(out, {&x}, [xn, on, rb, cb, planes, h, w, out_h, out_w] {
            auto& g = xn->ensure_grad();
            for (int p = 0; p < planes; ++p) {
                const T* dy = on->grad.data() + static_cast<std::size_t>(p) * out_h * out_w;
                T* dx = g.data() + static_cast<std::size_t>(p) * h * w;
                for (int i = 0; i < out_h; ++i)
                    for (int j = 0; j < out_w; ++j) {
                        const T share =
                            dy[i * out_w + j] /
                            static_cast<T>((rb[i].second - rb[i].first) * (cb[j].second - cb[j].first));
                        for (int r = rb[i].first; r < rb[i].second; ++r)
                            for (int c = cb[j].first; c < cb[j].second; ++c)
                                dx[r * w + c] += share;
                    }
            }
        });
    }
    return out;
}

// -------------------------------------------------------------- rotation

void rotation_cos_sin(double angle_deg, double& cos_a, double& sin_a)
{
    const double quarter = angle_deg / 90.0;
    if (quarter == std::round(quarter)) {
        static constexpr double c[4] = {1, 0, -1, 0}, s[4] = {0, 1, 0, -1};
        const int q = static_cast<int>(((static_cast<long long>(std::llround(quarter)) % 4) + 4) % 4);
        cos_a = c[q];
        sin_a = s[q];
        return;
    }
    const double t = angle_deg * std::numbers::pi / 180.0;
    cos_a = std::cos(t);
    sin_a = std::sin(t);
}

RotationSample rotation_source(int n, int row, int col, double cos_a, double sin_a)
{
    // Output p samples the input at R(-alpha) p, with y pointing up.
    const double c = 0.5 * (n - 1);
    const double x = col - c, y = c - row;
    const double xs = cos_a * x + sin_a * y;
    const double ys = -sin_a * x + cos_a * y;
    const double sc = c + xs, sr = c - ys;
    RotationSample s;
    s.r0 = static_cast<int>(std::floor(sr));
    s.c0 = static_cast<int>(std::floor(sc));
    s.fr = sr - s.r0;
    s.fc = sc - s.c0;
    return s;
}

template <class T>
Tensor<T> rotate_bilinear(const Tensor<T>& x, const std::vector<double>& angles_deg)
{
    require_rank4(x, "rotate_bilinear");
    const int nb = x.dim(0), nc = x.dim(1), n = x.dim(2);
    if (x.dim(3) != n)
        throw ShapeError("rotate_bilinear: spatial dims must be square, got " + to_string(x.shape()));
    if (static_cast<int>(angles_deg.size()) != nb)
        throw ShapeError("rotate_bilinear: one angle per sample required");

    // Per-sample sampling tables shared by all channels.
    struct Tap {
        int idx[4];
        T w[4];
    };
    const std::size_t pix = static_cast<std::size_t>(n) * n;
    auto taps = std::make_shared<std::vector<Tap>>(static_cast<std::size_t>(nb) * pix);
    std::vector<char> identity(static_cast<std::size_t>(nb), 0);
    for (int b = 0; b < nb; ++b) {
        double ca, sa;
        rotation_cos_sin(angles_deg[b], ca, sa);
        identity[b] = (ca == 1.0 && sa == 0.0);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                const RotationSample s = rotation_source(n, r, c, ca, sa);
                Tap& t = (*taps)[b * pix + static_cast<std::size_t>(r) * n + c];
                const int rr[4] = {s.r0, s.r0, s.r0 + 1, s.r0 + 1};
                const int cc[4] = {s.c0, s.c0 + 1, s.c0, s.c0 + 1};
                const double ww[4] = {(1 - s.fr) * (1 - s.fc), (1 - s.fr) * s.fc, s.fr * (1 - s.fc), s.fr * s.fc};
                for (int k = 0; k < 4; ++k) {
                    const bool inside = rr[k] >= 0 && rr[k] < n && cc[k] >= 0 && cc[k] < n;
                    t.idx[k] = inside ? rr[k] * n + cc[k] : 0;
                    t.w[k] = inside ? static_cast<T>(ww[k]) : T(0);
                }
            }
    }

    Tensor<T> out = make_output<T>(x.shape());
    for (int b = 0; b < nb; ++b)
        for (int ch = 0; ch < nc; ++ch) {
            const std::size_t off = (static_cast<std::size_t>(b) * nc + ch) * pix;
            const T* src = x.data().data() + off;
            T* dst = out.data().data() + off;
            if (identity[b]) {
                std::copy(src, src + pix, dst);
                continue;
            }
            const Tap* t = taps->data() + b * pix;
            for (std::size_t i = 0; i < pix; ++i)
                dst[i] = t[i].w[0] * src[t[i].idx[0]] + t[i].w[1] * src[t[i].idx[1]] +
                         t[i].w[2] * src[t[i].idx[2]] + t[i].w[3] * src[t[i].idx[3]];
        }
    check_finite<T>(out.data(), "rotate_bilinear");

    if (needs_grad<T>({&x})) {
        auto xn = x.ptr();
        Node<T>* on = out.node();
        attach(out, {&x}, [xn, on, taps, identity, nb, nc, pix] {
            auto& g = xn->ensure_grad();
            for (int b = 0; b < nb; ++b)
                for (int ch = 0; ch < nc; ++ch) {
                    const std::size_t off = (static_cast<std::size_t>(b) * nc + ch) * pix;
                    const T* dy = on->grad.data() + off;
                    T* dx = g.data() + off;
                    if (identity[b]) {
                        for (std::size_t i = 0; i < pix; ++i)
                            dx[i] += dy[i];
                        continue;
                    }
                    const Tap* t = taps->data() + b * pix;
                    for (std::size_t i = 0; i < pix; ++i)
                        for (int k = 0; k < 4; ++k)
                            dx[t[i].idx[k]] += t[i].w[k] * dy[i];
                }
        });
    }
    return out;
}

// ---------------------------------------------------------------- losses

template <class T>
Tensor<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target)
{
    if (pred.shape() != target.shape())
        throw ShapeError("mse_loss: shapes " + to_string(pred.shape()) + " and " + to_string(target.shape()) +
                         " differ");
    const std::size_t n = pred.values().size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(pred.values()[i]) - target.values()[i];
        acc += d * d;
    }
    Tensor<T> out = Tensor<T>::scalar(static_cast<T>(acc / static_cast<double>(n)));
    check_finite<T>(out.data(), "mse_loss");
    if (needs_grad<T>({&pred})) {
        auto pn = pred.ptr(), tn = target.ptr();
        Node<T>* on = out.node();
        attach(out, {&pred}, [pn, tn, on, n] {
            auto& g = pn->ensure_grad();
            const T k = static_cast<T>(2.0 / static_cast<double>(n)) * on->grad[0];
            for (std::size_t i = 0; i < n; ++i)
                g[i] += k * (pn->value[i] - tn->value[i]);
        });
    }
    return out;
}

template <class T>
Tensor<T> weighted_sum(const Tensor<T>& x, const std::vector<T>& weights)
{
    if (static_cast<std::int64_t>(weights.size()) != x.numel())
        throw ShapeError("weighted_sum: weight count does not match tensor size");
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        acc += static_cast<double>(weights[i]) * x.values()[i];
    Tensor<T> out = Tensor<T>::scalar(static_cast<T>(acc));
    if (needs_grad<T>({&x})) {
        auto xn = x.ptr();
        Node<T>* on = out.node();
        attach(out, {&x}, [xn, on, weights] {
            auto& g = xn->ensure_grad();
            for (std::size_t i = 0; i < weights.size(); ++i)
                g[i] += weights[i] * on->grad[0];
        });
    }
    return out;
}

#define LACT_INSTANTIATE(T)                                                                                   \
    template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int);             \
    template Tensor<T> conv_transpose2d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int);   \
    template Tensor<T> batch_norm<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&,        \
                                     Tensor<T>&, const BatchNormOptions&);                                    \
    template Tensor<T> gelu<T>(const Tensor<T>&);                                                             \
    template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                                            \
    template Tensor<T> scale<T>(const Tensor<T>&, T);                                                         \
    template Tensor<T> channel_scale<T>(const Tensor<T>&, const std::vector<T>&);                             \
    template Tensor<T> pad2d<T>(const Tensor<T>&, int, int, int, int);                                        \
    template Tensor<T> adaptive_avg_pool2d<T>(const Tensor<T>&, int, int);                                    \
    template Tensor<T> rotate_bilinear<T>(const Tensor<T>&, const std::vector<double>&);                      \
    template Tensor<T> mse_loss<T>(const Tensor<T>&, const Tensor<T>&);                                       \
    template Tensor<T> weighted_sum<T>(const Tensor<T>&, const std::vector<T>&);

LACT_INSTANTIATE(float)
LACT_INSTANTIATE(double)

#undef LACT_INSTANTIATE

} // namespace lact::nn
