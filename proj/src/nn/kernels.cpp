#include "lact/nn/kernels.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

namespace lact::nn::kernels {

namespace {

constexpr int kMR = 8;
template <class T>
constexpr int kNR = 128 / static_cast<int>(sizeof(T));  // two 512-bit vectors

// MR x NR register tile over packed panels: ap holds k groups of MR values,
// bp holds k groups of NR values.
template <class T>
inline void tile_packed(int k, const T* __restrict ap, const T* __restrict bp, T* c, int ldc, int mr, int nr,
                        bool accumulate)
{
    constexpr int NR = kNR<T>;
    T acc[kMR][NR] = {};
    for (int p = 0; p < k; ++p) {
        const T* a = ap + static_cast<std::size_t>(p) * kMR;
        const T* b = bp + static_cast<std::size_t>(p) * NR;
#pragma GCC unroll 8
        for (int r = 0; r < kMR; ++r) {
            const T av = a[r];
#pragma GCC unroll 32
            for (int q = 0; q < NR; ++q)
                acc[r][q] += av * b[q];
        }
    }
    if (mr == kMR && nr == NR) {
        if (accumulate) {
            for (int r = 0; r < kMR; ++r)
                for (int q = 0; q < NR; ++q)
                    c[r * ldc + q] += acc[r][q];
        } else {
            for (int r = 0; r < kMR; ++r)
                for (int q = 0; q < NR; ++q)
                    c[r * ldc + q] = acc[r][q];
        }
        return;
    }
    for (int r = 0; r < mr; ++r)
        for (int q = 0; q < nr; ++q)
            c[r * ldc + q] = accumulate ? c[r * ldc + q] + acc[r][q] : acc[r][q];
}

constexpr int kKC = 256;   // depth of a packed block
constexpr int kMC = 128;   // rows of A per packed block
constexpr int kNC = 1024;  // columns of B per packed block

// Packs A[i0:i0+mc, p0:p0+kc] (row stride lda) into MR-row panels.
template <class T>
void pack_a(int mc, int kc, const T* a, int lda, T* out)
{
    for (int i = 0; i < mc; i += kMR) {
        const int mr = std::min(kMR, mc - i);
        T* dst = out + static_cast<std::size_t>(i) * kc;
        for (int p = 0; p < kc; ++p) {
            int r = 0;
            for (; r < mr; ++r)
                dst[p * kMR + r] = a[static_cast<std::size_t>(i + r) * lda + p];
            for (; r < kMR; ++r)
                dst[p * kMR + r] = T(0);
        }
    }
}

// Packs B[p0:p0+kc, j0:j0+nc] (row stride ldb) into NR-column panels.
template <class T>
void pack_b(int kc, int nc, const T* b, int ldb, T* out)
{
    constexpr int NR = kNR<T>;
    for (int j = 0; j < nc; j += NR) {
        const int nr = std::min(NR, nc - j);
        T* dst = out + static_cast<std::size_t>(j) * kc;
        for (int p = 0; p < kc; ++p) {
            const T* src = b + static_cast<std::size_t>(p) * ldb + j;
            int q = 0;
            for (; q < nr; ++q)
                dst[p * NR + q] = src[q];
            for (; q < NR; ++q)
                dst[p * NR + q] = T(0);
        }
    }
}

template <class T>
void gemm_tiles(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate)
{
    constexpr int NR = kNR<T>;
    const bool par = static_cast<std::int64_t>(m) * n * k > (1 << 18);
    std::vector<T> bpack(static_cast<std::size_t>(kKC) * ((std::min(n, kNC) + NR - 1) / NR * NR));
    std::vector<T> apack(static_cast<std::size_t>(kKC) * ((std::min(m, kMC) + kMR - 1) / kMR * kMR));
    for (int jc = 0; jc < n; jc += kNC) {
        const int nc = std::min(kNC, n - jc);
        const int nt = (nc + NR - 1) / NR;
        for (int pc = 0; pc < k; pc += kKC) {
            const int kc = std::min(kKC, k - pc);
            const bool acc = accumulate || pc > 0;
            pack_b(kc, nc, b + static_cast<std::size_t>(pc) * n + jc, n, bpack.data());
            for (int ic = 0; ic < m; ic += kMC) {
                const int mc = std::min(kMC, m - ic);
                const int mt = (mc + kMR - 1) / kMR;
                pack_a(mc, kc, a + static_cast<std::size_t>(ic) * k + pc, k, apack.data());
#pragma omp parallel for collapse(2) schedule(static) if (par)
                for (int jt = 0; jt < nt; ++jt)
                    for (int it = 0; it < mt; ++it) {
                        const int i0 = it * kMR, j0 = jt * NR;
                        tile_packed(kc, apack.data() + static_cast<std::size_t>(i0) * kc,
                                    bpack.data() + static_cast<std::size_t>(j0) * kc,
                                    c + static_cast<std::size_t>(ic + i0) * n + jc + j0, n,
                                    std::min(kMR, mc - i0), std::min(NR, nc - j0), acc);
                    }
            }
        }
    }
}

template <class T>
void transpose(int rows, int cols, const T* in, T* out)
{
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            out[static_cast<std::size_t>(c) * rows + r] = in[static_cast<std::size_t>(r) * cols + c];
}

} // namespace

template <class T>
void gemm(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate)
{
    if (m <= 0 || n <= 0)
        return;
    if (k <= 0) {
        if (!accumulate)
            std::fill(c, c + static_cast<std::size_t>(m) * n, T(0));
        return;
    }
    gemm_tiles(m, n, k, a, b, c, accumulate);
}

template <class T>
void gemm_reference(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate)
{
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            T s = accumulate ? c[static_cast<std::size_t>(i) * n + j] : T(0);
            for (int p = 0; p < k; ++p)
                s += a[static_cast<std::size_t>(i) * k + p] * b[static_cast<std::size_t>(p) * n + j];
            c[static_cast<std::size_t>(i) * n + j] = s;
        }
}

template <class T>
void im2col(const ConvShape& s, const T* x, T* col, std::int64_t ld)
{
    const int oh = s.out_h(), ow = s.out_w(), k = s.kernel;
    if (ld <= 0)
        ld = s.out_pixels();
    for (int c = 0; c < s.in_channels; ++c)
        for (int ki = 0; ki < k; ++ki)
            for (int kj = 0; kj < k; ++kj) {
                T* row = col + (static_cast<std::size_t>(c * k + ki) * k + kj) * ld;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * s.stride - s.pad + ki;
                    T* dst = row + static_cast<std::size_t>(oy) * ow;
                    if (iy < 0 || iy >= s.in_h) {
                        std::fill(dst, dst + ow, T(0));
                        continue;
                    }
                    const T* src = x + (static_cast<std::size_t>(c) * s.in_h + iy) * s.in_w;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * s.stride - s.pad + kj;
                        dst[ox] = (ix >= 0 && ix < s.in_w) ? src[ix] : T(0);
                    }
                }
            }
}

template <class T>
void im2col_t(const ConvShape& s, const T* x, T* col_t)
{
    const int oh = s.out_h(), ow = s.out_w(), k = s.kernel, patch = s.patch();
    for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
            T* dst = col_t + static_cast<std::size_t>(oy * ow + ox) * patch;
            for (int c = 0; c < s.in_channels; ++c)
                for (int ki = 0; ki < k; ++ki) {
                    const int iy = oy * s.stride - s.pad + ki;
                    for (int kj = 0; kj < k; ++kj) {
                        const int ix = ox * s.stride - s.pad + kj;
                        *dst++ = (iy >= 0 && iy < s.in_h && ix >= 0 && ix < s.in_w)
                                     ? x[(static_cast<std::size_t>(c) * s.in_h + iy) * s.in_w + ix]
                                     : T(0);
                    }
                }
        }
}

template <class T>
void col2im(const ConvShape& s, const T* col, T* x, std::int64_t ld)
{
    const int oh = s.out_h(), ow = s.out_w(), k = s.kernel;
    if (ld <= 0)
        ld = s.out_pixels();
    for (int c = 0; c < s.in_channels; ++c)
        for (int ki = 0; ki < k; ++ki)
            for (int kj = 0; kj < k; ++kj) {
                const T* row = col + (static_cast<std::size_t>(c * k + ki) * k + kj) * ld;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * s.stride - s.pad + ki;
                    if (iy < 0 || iy >= s.in_h)
                        continue;
                    T* dst = x + (static_cast<std::size_t>(c) * s.in_h + iy) * s.in_w;
                    const T* src = row + static_cast<std::size_t>(oy) * ow;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * s.stride - s.pad + kj;
                        if (ix >= 0 && ix < s.in_w)
                            dst[ix] += src[ox];
                    }
                }
            }
}

// Samples are processed in groups laid side by side: columns g*pix..(g+1)*pix
// of every [rows x group*pix] buffer belong to sample g of the group, so each
// group is a single GEMM. Groups are sized to keep the column buffer in cache.

constexpr std::int64_t kColumnBudget = 1 << 19;  // elements

int group_size(const ConvShape& s)
{
    const std::int64_t per_sample = static_cast<std::int64_t>(s.patch()) * s.out_pixels();
    return static_cast<int>(std::clamp<std::int64_t>(kColumnBudget / std::max<std::int64_t>(per_sample, 1), 1,
                                                     s.batch));
}

template <class T>
void gather_channels(const ConvShape& s, int n0, int count, const T* y, T* out)
{
    const std::int64_t pix = s.out_pixels(), np = count * pix;
    for (int g = 0; g < count; ++g)
        for (int c = 0; c < s.out_channels; ++c) {
            const T* src = y + (n0 + g) * s.out_size() + c * pix;
            std::copy(src, src + pix, out + c * np + g * pix);
        }
}

template <class T>
void conv2d_forward(const ConvShape& s, const T* x, const T* w, const T* bias, T* y)
{
    const int patch = s.patch();
    const std::int64_t pix = s.out_pixels();
    const int group = group_size(s);
    std::vector<T> col(static_cast<std::size_t>(patch * group * pix));
    std::vector<T> out(static_cast<std::size_t>(s.out_channels * group * pix));
    for (int n0 = 0; n0 < s.batch; n0 += group) {
        const int count = std::min(group, s.batch - n0);
        const std::int64_t np = count * pix;
#pragma omp parallel for schedule(static) if (count > 1)
        for (int g = 0; g < count; ++g) {
            const T* xn = x + (n0 + g) * s.in_size();
            if (s.pointwise()) {
                for (int c = 0; c < s.in_channels; ++c)
                    std::copy(xn + c * pix, xn + (c + 1) * pix, col.data() + c * np + g * pix);
            } else {
                im2col(s, xn, col.data() + g * pix, np);
            }
        }
        gemm(s.out_channels, static_cast<int>(np), patch, w, col.data(), out.data(), false);
        for (int g = 0; g < count; ++g)
            for (int c = 0; c < s.out_channels; ++c) {
                const T* src = out.data() + c * np + g * pix;
                T* dst = y + (n0 + g) * s.out_size() + c * pix;
                const T b = bias ? bias[c] : T(0);
                for (std::int64_t i = 0; i < pix; ++i)
                    dst[i] = src[i] + b;
            }
    }
}

template <class T>
void conv2d_backward_input(const ConvShape& s, const T* dy, const T* w, T* dx, bool accumulate)
{
    const int patch = s.patch();
    const std::int64_t pix = s.out_pixels();
    const int group = group_size(s);
    std::vector<T> wt(static_cast<std::size_t>(patch) * s.out_channels);
    transpose(s.out_channels, patch, w, wt.data());
    std::vector<T> dyg(static_cast<std::size_t>(s.out_channels * group * pix));
    std::vector<T> col(static_cast<std::size_t>(patch * group * pix));
    for (int n0 = 0; n0 < s.batch; n0 += group) {
        const int count = std::min(group, s.batch - n0);
        const std::int64_t np = count * pix;
        gather_channels(s, n0, count, dy, dyg.data());
        gemm(patch, static_cast<int>(np), s.out_channels, wt.data(), dyg.data(), col.data(), false);
#pragma omp parallel for schedule(static) if (count > 1)
        for (int g = 0; g < count; ++g) {
            T* dxn = dx + (n0 + g) * s.in_size();
            if (!accumulate)
                std::fill(dxn, dxn + s.in_size(), T(0));
            if (s.pointwise()) {
                for (int c = 0; c < s.in_channels; ++c) {
                    const T* src = col.data() + c * np + g * pix;
                    T* dst = dxn + c * pix;
                    for (std::int64_t i = 0; i < pix; ++i)
                        dst[i] += src[i];
                }
            } else {
                col2im(s, col.data() + g * pix, dxn, np);
            }
        }
    }
}

template <class T>
void conv2d_backward_weight(const ConvShape& s, const T* x, const T* dy, T* dw, T* db)
{
    const int patch = s.patch();
    const std::int64_t pix = s.out_pixels();
    const int group = group_size(s);
    std::vector<T> dyg(static_cast<std::size_t>(s.out_channels * group * pix));
    std::vector<T> col_t(static_cast<std::size_t>(group * pix * patch));
    for (int n0 = 0; n0 < s.batch; n0 += group) {
        const int count = std::min(group, s.batch - n0);
        const std::int64_t np = count * pix;
        gather_channels(s, n0, count, dy, dyg.data());
#pragma omp parallel for schedule(static) if (count > 1)
        for (int g = 0; g < count; ++g) {
            T* dst = col_t.data() + g * pix * patch;
            if (s.pointwise())
                transpose(s.in_channels, static_cast<int>(pix), x + (n0 + g) * s.in_size(), dst);
            else
                im2col_t(s, x + (n0 + g) * s.in_size(), dst);
        }
        gemm(s.out_channels, patch, static_cast<int>(np), dyg.data(), col_t.data(), dw, true);
        if (db) {
            for (int c = 0; c < s.out_channels; ++c) {
                const T* d = dyg.data() + c * np;
                T acc = T(0);
                for (std::int64_t i = 0; i < np; ++i)
                    acc += d[i];
                db[c] += acc;
            }
        }
    }
}

template <class T>
void conv2d_forward_reference(const ConvShape& s, const T* x, const T* w, const T* bias, T* y)
{
    const int oh = s.out_h(), ow = s.out_w(), k = s.kernel;
    for (int n = 0; n < s.batch; ++n)
        for (int co = 0; co < s.out_channels; ++co)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    T acc = bias ? bias[co] : T(0);
                    for (int ci = 0; ci < s.in_channels; ++ci)
                        for (int ki = 0; ki < k; ++ki)
                            for (int kj = 0; kj < k; ++kj) {
                                const int iy = oy * s.stride - s.pad + ki, ix = ox * s.stride - s.pad + kj;
                                if (iy < 0 || iy >= s.in_h || ix < 0 || ix >= s.in_w)
                                    continue;
                                acc += w[((static_cast<std::size_t>(co) * s.in_channels + ci) * k + ki) * k + kj] *
                                       x[n * s.in_size() + (static_cast<std::size_t>(ci) * s.in_h + iy) * s.in_w + ix];
                            }
                    y[n * s.out_size() + (static_cast<std::size_t>(co) * oh + oy) * ow + ox] = acc;
                }
}

template <class T>
void conv2d_backward_input_reference(const ConvShape& s, const T* dy, const T* w, T* dx)
{
    const int oh = s.out_h(), ow = s.out_w(), k = s.kernel;
    std::fill(dx, dx + s.batch * s.in_size(), T(0));
    for (int n = 0; n < s.batch; ++n)
        for (int co = 0; co < s.out_channels; ++co)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    const T g = dy[n * s.out_size() + (static_cast<std::size_t>(co) * oh + oy) * ow + ox];
                    for (int ci = 0; ci < s.in_channels; ++ci)
                        for (int ki = 0; ki < k; ++ki)
                            for (int kj = 0; kj < k; ++kj) {
                                const int iy = oy * s.stride - s.pad + ki, ix = ox * s.stride - s.pad + kj;
                                if (iy < 0 || iy >= s.in_h || ix < 0 || ix >= s.in_w)
                                    continue;
                                dx[n * s.in_size() + (static_cast<std::size_t>(ci) * s.in_h + iy) * s.in_w + ix] +=
                                    g * w[((static_cast<std::size_t>(co) * s.in_channels + ci) * k + ki) * k + kj];
                            }
                }
}

template <class T>
void conv2d_backward_weight_reference(const ConvShape& s, const T* x, const T* dy, T* dw, T* db)
{
    const int oh = s.out_h(), ow = s.out_w(), k = s.kernel;
    for (int n = 0; n < s.batch; ++n)
        for (int co = 0; co < s.out_channels; ++co)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    const T g = dy[n * s.out_size() + (static_cast<std::size_t>(co) * oh + oy) * ow + ox];
                    if (db)
                        db[co] += g;
                    for (int ci = 0; ci < s.in_channels; ++ci)
                        for (int ki = 0; ki < k; ++ki)
                            for (int kj = 0; kj < k; ++kj) {
                                const int iy = oy * s.stride - s.pad + ki, ix = ox * s.stride - s.pad + kj;
                                if (iy < 0 || iy >= s.in_h || ix < 0 || ix >= s.in_w)
                                    continue;
                                dw[((static_cast<std::size_t>(co) * s.in_channels + ci) * k + ki) * k + kj] +=
                                    g * x[n * s.in_size() + (static_cast<std::size_t>(ci) * s.in_h + iy) * s.in_w + ix];
                            }
                }
}

#define LACT_INSTANTIATE(T)                                                                                  \
    template void gemm<T>(int, int, int, const T*, const T*, T*, bool);                                      \
    template void gemm_reference<T>(int, int, int, const T*, const T*, T*, bool);                            \
    template void im2col<T>(const ConvShape&, const T*, T*, std::int64_t);                                   \
    template void im2col_t<T>(const ConvShape&, const T*, T*);                                               \
    template void col2im<T>(const ConvShape&, const T*, T*, std::int64_t);                                   \
    template void conv2d_forward<T>(const ConvShape&, const T*, const T*, const T*, T*);                     \
    template void conv2d_backward_input<T>(const ConvShape&, const T*, const T*, T*, bool);                  \
    template void conv2d_backward_weight<T>(const ConvShape&, const T*, const T*, T*, T*);                   \
    template void conv2d_forward_reference<T>(const ConvShape&, const T*, const T*, const T*, T*);           \
    template void conv2d_backward_input_reference<T>(const ConvShape&, const T*, const T*, T*);              \
    template void conv2d_backward_weight_reference<T>(const ConvShape&, const T*, const T*, T*, T*);

LACT_INSTANTIATE(float)
LACT_INSTANTIATE(double)

#undef LACT_INSTANTIATE

} // namespace lact::nn::kernels
