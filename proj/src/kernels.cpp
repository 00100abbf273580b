#include "dipl0/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace dipl0::kernels {

namespace {

bool env_parallel() {
    const char* v = std::getenv("DIPL0_PARALLEL");
    if (!v) return false;
    return std::strcmp(v, "1") == 0 || std::strcmp(v, "true") == 0 || std::strcmp(v, "on") == 0;
}

bool g_parallel = env_parallel();

// Copies a plane set into a buffer with reflect padding p on both axes.
void reflect_pad(const double* in, int c, int h, int w, int p, double* out) {
    const int ph = h + 2 * p, pw = w + 2 * p;
    for (int ch = 0; ch < c; ++ch) {
        const double* src = in + static_cast<std::size_t>(ch) * h * w;
        double* dst = out + static_cast<std::size_t>(ch) * ph * pw;
        for (int y = 0; y < ph; ++y) {
            const double* row = src + static_cast<std::size_t>(reflect_index(y - p, h)) * w;
            double* drow = dst + static_cast<std::size_t>(y) * pw;
            for (int x = 0; x < pw; ++x) drow[x] = row[reflect_index(x - p, w)];
        }
    }
}

} // namespace

bool parallel_enabled() { return g_parallel; }
void set_parallel(bool enabled) { g_parallel = enabled; }

int reflect_index(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

void conv2d_forward(const double* in, int in_c, int h, int w,
                    const double* weights, const double* bias,
                    int out_c, int ksize, int stride, double* out) {
    const int pad = (ksize - 1) / 2;
    const int oh = h / stride, ow = w / stride;
    const int ph = h + 2 * pad, pw = w + 2 * pad;
    std::vector<double> padded(static_cast<std::size_t>(in_c) * ph * pw);
    reflect_pad(in, in_c, h, w, pad, padded.data());

    const bool par = g_parallel;
#pragma omp parallel for schedule(static) if (par)
    for (int oc = 0; oc < out_c; ++oc) {
        double* oplane = out + static_cast<std::size_t>(oc) * oh * ow;
        const double b = bias ? bias[oc] : 0.0;
        for (int i = 0; i < oh * ow; ++i) oplane[i] = b;
        for (int ic = 0; ic < in_c; ++ic) {
            const double* pplane = padded.data() + static_cast<std::size_t>(ic) * ph * pw;
            const double* wk = weights +
                ((static_cast<std::size_t>(oc) * in_c + ic) * ksize) * ksize;
            for (int ky = 0; ky < ksize; ++ky) {
                for (int kx = 0; kx < ksize; ++kx) {
                    const double wv = wk[ky * ksize + kx];
                    for (int oy = 0; oy < oh; ++oy) {
                        const double* prow = pplane +
                            static_cast<std::size_t>(oy * stride + ky) * pw + kx;
                        double* orow = oplane + static_cast<std::size_t>(oy) * ow;
                        for (int ox = 0; ox < ow; ++ox) orow[ox] += wv * prow[ox * stride];
                    }
                }
            }
        }
    }
}

void conv2d_backward(const double* in, int in_c, int h, int w,
                     const double* weights, int out_c, int ksize, int stride,
                     const double* dout, double* din, double* dweights, double* dbias) {
    const int pad = (ksize - 1) / 2;
    const int oh = h / stride, ow = w / stride;
    const int ph = h + 2 * pad, pw = w + 2 * pad;
    std::vector<double> padded(static_cast<std::size_t>(in_c) * ph * pw);
    reflect_pad(in, in_c, h, w, pad, padded.data());
    const bool par = g_parallel;

    if (dweights || dbias) {
#pragma omp parallel for schedule(static) if (par)
        for (int oc = 0; oc < out_c; ++oc) {
            const double* dplane = dout + static_cast<std::size_t>(oc) * oh * ow;
            if (dbias) {
                double acc = 0.0;
                for (int i = 0; i < oh * ow; ++i) acc += dplane[i];
                dbias[oc] = acc;
            }
            if (!dweights) continue;
            for (int ic = 0; ic < in_c; ++ic) {
                const double* pplane = padded.data() + static_cast<std::size_t>(ic) * ph * pw;
                double* dwk = dweights +
                    ((static_cast<std::size_t>(oc) * in_c + ic) * ksize) * ksize;
                for (int ky = 0; ky < ksize; ++ky) {
                    for (int kx = 0; kx < ksize; ++kx) {
                        double acc = 0.0;
                        for (int oy = 0; oy < oh; ++oy) {
                            const double* prow = pplane +
                                static_cast<std::size_t>(oy * stride + ky) * pw + kx;
                            const double* drow = dplane + static_cast<std::size_t>(oy) * ow;
                            for (int ox = 0; ox < ow; ++ox) acc += prow[ox * stride] * drow[ox];
                        }
                        dwk[ky * ksize + kx] = acc;
                    }
                }
            }
        }
    }

    if (din) {
        std::vector<double> dpadded(static_cast<std::size_t>(in_c) * ph * pw, 0.0);
#pragma omp parallel for schedule(static) if (par)
        for (int ic = 0; ic < in_c; ++ic) {
            double* dpplane = dpadded.data() + static_cast<std::size_t>(ic) * ph * pw;
            for (int oc = 0; oc < out_c; ++oc) {
                const double* dplane = dout + static_cast<std::size_t>(oc) * oh * ow;
                const double* wk = weights +
                    ((static_cast<std::size_t>(oc) * in_c + ic) * ksize) * ksize;
                for (int ky = 0; ky < ksize; ++ky) {
                    for (int kx = 0; kx < ksize; ++kx) {
                        const double wv = wk[ky * ksize + kx];
                        for (int oy = 0; oy < oh; ++oy) {
                            double* dprow = dpplane +
                                static_cast<std::size_t>(oy * stride + ky) * pw + kx;
                            const double* drow = dplane + static_cast<std::size_t>(oy) * ow;
                            for (int ox = 0; ox < ow; ++ox) dprow[ox * stride] += wv * drow[ox];
                        }
                    }
                }
            }
        }
        // Fold the padded gradient back through the reflection.
#pragma omp parallel for schedule(static) if (par)
        for (int ic = 0; ic < in_c; ++ic) {
            const double* dpplane = dpadded.data() + static_cast<std::size_t>(ic) * ph * pw;
            double* dplane = din + static_cast<std::size_t>(ic) * h * w;
            for (int i = 0; i < h * w; ++i) dplane[i] = 0.0;
            for (int y = 0; y < ph; ++y) {
                const int sy = reflect_index(y - pad, h);
                const double* drow = dpplane + static_cast<std::size_t>(y) * pw;
                double* dsrow = dplane + static_cast<std::size_t>(sy) * w;
                for (int x = 0; x < pw; ++x) dsrow[reflect_index(x - pad, w)] += drow[x];
            }
        }
    }
}

void instance_norm_forward(const double* in, int c, int hw,
                           const double* scale, const double* shift, double eps,
                           double* out, double* mean, double* inv_std) {
    const bool par = g_parallel;
#pragma omp parallel for schedule(static) if (par)
    for (int ch = 0; ch < c; ++ch) {
        const double* x = in + static_cast<std::size_t>(ch) * hw;
        double* y = out + static_cast<std::size_t>(ch) * hw;
        double mu = 0.0;
        for (int i = 0; i < hw; ++i) mu += x[i];
        mu /= hw;
        double var = 0.0;
        for (int i = 0; i < hw; ++i) {
            const double d = x[i] - mu;
            var += d * d;
        }
        var /= hw;
        const double istd = 1.0 / std::sqrt(var + eps);
        mean[ch] = mu;
        inv_std[ch] = istd;
        const double g = scale[ch], b = shift[ch];
        for (int i = 0; i < hw; ++i) y[i] = g * (x[i] - mu) * istd + b;
    }
}

void instance_norm_backward(const double* in, const double* mean, const double* inv_std,
                            const double* scale, const double* dout, int c, int hw,
                            double* din, double* dscale, double* dshift) {
    const bool par = g_parallel;
#pragma omp parallel for schedule(static) if (par)
    for (int ch = 0; ch < c; ++ch) {
        const double* x = in + static_cast<std::size_t>(ch) * hw;
        const double* dy = dout + static_cast<std::size_t>(ch) * hw;
        const double mu = mean[ch], istd = inv_std[ch];
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int i = 0; i < hw; ++i) {
            sum_dy += dy[i];
            sum_dy_xhat += dy[i] * (x[i] - mu) * istd;
        }
        if (dshift) dshift[ch] = sum_dy;
        if (dscale) dscale[ch] = sum_dy_xhat;
        if (din) {
            double* dx = din + static_cast<std::size_t>(ch) * hw;
            const double g = scale[ch];
            const double mean_dy = sum_dy / hw;
            const double mean_dy_xhat = sum_dy_xhat / hw;
            for (int i = 0; i < hw; ++i) {
                const double xhat = (x[i] - mu) * istd;
                dx[i] = g * istd * (dy[i] - mean_dy - xhat * mean_dy_xhat);
            }
        }
    }
}

void leaky_relu_forward(const double* in, std::size_t n, double slope, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : slope * in[i];
}

void leaky_relu_backward(const double* in, const double* dout, std::size_t n, double slope,
                         double* din) {
    for (std::size_t i = 0; i < n; ++i) din[i] = in[i] > 0.0 ? dout[i] : slope * dout[i];
}

void sigmoid_forward(const double* in, std::size_t n, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-in[i]));
}

void sigmoid_backward(const double* out, const double* dout, std::size_t n, double* din) {
    for (std::size_t i = 0; i < n; ++i) din[i] = dout[i] * out[i] * (1.0 - out[i]);
}

namespace {

// Source index pair and interpolation weight for one output coordinate of a
// half-pixel 2x bilinear upsample.
struct Lerp {
    int lo, hi;
    double t;
};

Lerp lerp_at(int o, int n) {
    const double src = (o + 0.5) * 0.5 - 0.5;
    double fl = std::floor(src);
    int lo = static_cast<int>(fl);
    double t = src - fl;
    int hi = lo + 1;
    if (lo < 0) lo = 0;
    if (hi > n - 1) hi = n - 1;
    if (lo > n - 1) lo = n - 1;
    return {lo, hi, t};
}

} // namespace

void upsample2x_forward(const double* in, int c, int h, int w, double* out) {
    const int oh = 2 * h, ow = 2 * w;
    std::vector<Lerp> ys(oh), xs(ow);
    for (int oy = 0; oy < oh; ++oy) ys[oy] = lerp_at(oy, h);
    for (int ox = 0; ox < ow; ++ox) xs[ox] = lerp_at(ox, w);
    const bool par = g_parallel;
#pragma omp parallel for schedule(static) if (par)
    for (int ch = 0; ch < c; ++ch) {
        const double* src = in + static_cast<std::size_t>(ch) * h * w;
        double* dst = out + static_cast<std::size_t>(ch) * oh * ow;
        for (int oy = 0; oy < oh; ++oy) {
            const Lerp& ly = ys[oy];
            const double* r0 = src + static_cast<std::size_t>(ly.lo) * w;
            const double* r1 = src + static_cast<std::size_t>(ly.hi) * w;
            double* drow = dst + static_cast<std::size_t>(oy) * ow;
            for (int ox = 0; ox < ow; ++ox) {
                const Lerp& lx = xs[ox];
                const double top = r0[lx.lo] * (1.0 - lx.t) + r0[lx.hi] * lx.t;
                const double bot = r1[lx.lo] * (1.0 - lx.t) + r1[lx.hi] * lx.t;
                drow[ox] = top * (1.0 - ly.t) + bot * ly.t;
            }
        }
    }
}

void upsample2x_backward(const double* dout, int c, int h, int w, double* din) {
    const int oh = 2 * h, ow = 2 * w;
    std::vector<Lerp> ys(oh), xs(ow);
    for (int oy = 0; oy < oh; ++oy) ys[oy] = lerp_at(oy, h);
    for (int ox = 0; ox < ow; ++ox) xs[ox] = lerp_at(ox, w);
    const bool par = g_parallel;
#pragma omp parallel for schedule(static) if (par)
    for (int ch = 0; ch < c; ++ch) {
        const double* dsrc = dout + static_cast<std::size_t>(ch) * oh * ow;
        double* ddst = din + static_cast<std::size_t>(ch) * h * w;
        for (int i = 0; i < h * w; ++i) ddst[i] = 0.0;
        for (int oy = 0; oy < oh; ++oy) {
            const Lerp& ly = ys[oy];
            const double* drow = dsrc + static_cast<std::size_t>(oy) * ow;
            double* d0 = ddst + static_cast<std::size_t>(ly.lo) * w;
            double* d1 = ddst + static_cast<std::size_t>(ly.hi) * w;
            for (int ox = 0; ox < ow; ++ox) {
                const Lerp& lx = xs[ox];
                const double g = drow[ox];
                d0[lx.lo] += g * (1.0 - ly.t) * (1.0 - lx.t);
                d0[lx.hi] += g * (1.0 - ly.t) * lx.t;
                d1[lx.lo] += g * ly.t * (1.0 - lx.t);
                d1[lx.hi] += g * ly.t * lx.t;
            }
        }
    }
}

} // namespace dipl0::kernels
