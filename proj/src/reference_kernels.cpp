#include "dipl0/reference_kernels.hpp"

#include "dipl0/kernels.hpp"

#include <cmath>
#include <cstddef>

namespace dipl0::reference {

using kernels::reflect_index;

void conv2d_forward(const double* in, int in_c, int h, int w,
                    const double* weights, const double* bias,
                    int out_c, int ksize, int stride, double* out) {
    const int pad = (ksize - 1) / 2;
    const int oh = h / stride, ow = w / stride;
    for (int oc = 0; oc < out_c; ++oc) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double acc = bias ? bias[oc] : 0.0;
                for (int ic = 0; ic < in_c; ++ic) {
                    for (int ky = 0; ky < ksize; ++ky) {
                        for (int kx = 0; kx < ksize; ++kx) {
                            const int iy = reflect_index(oy * stride + ky - pad, h);
                            const int ix = reflect_index(ox * stride + kx - pad, w);
                            acc += weights[((static_cast<std::size_t>(oc) * in_c + ic) * ksize + ky) * ksize + kx] *
                                   in[(static_cast<std::size_t>(ic) * h + iy) * w + ix];
                        }
                    }
                }
                out[(static_cast<std::size_t>(oc) * oh + oy) * ow + ox] = acc;
            }
        }
    }
}

void conv2d_backward(const double* in, int in_c, int h, int w,
                     const double* weights, int out_c, int ksize, int stride,
                     const double* dout, double* din, double* dweights, double* dbias) {
    const int pad = (ksize - 1) / 2;
    const int oh = h / stride, ow = w / stride;
    if (dbias) {
        for (int oc = 0; oc < out_c; ++oc) {
            double acc = 0.0;
            for (int i = 0; i < oh * ow; ++i) acc += dout[static_cast<std::size_t>(oc) * oh * ow + i];
            dbias[oc] = acc;
        }
    }
    if (dweights) {
        for (int oc = 0; oc < out_c; ++oc) {
            for (int ic = 0; ic < in_c; ++ic) {
                for (int ky = 0; ky < ksize; ++ky) {
                    for (int kx = 0; kx < ksize; ++kx) {
                        double acc = 0.0;
                        for (int oy = 0; oy < oh; ++oy) {
                            for (int ox = 0; ox < ow; ++ox) {
                                const int iy = reflect_index(oy * stride + ky - pad, h);
                                const int ix = reflect_index(ox * stride + kx - pad, w);
                                acc += in[(static_cast<std::size_t>(ic) * h + iy) * w + ix] *
                                       dout[(static_cast<std::size_t>(oc) * oh + oy) * ow + ox];
                            }
                        }
                        dweights[((static_cast<std::size_t>(oc) * in_c + ic) * ksize + ky) * ksize + kx] = acc;
                    }
                }
            }
        }
    }
    if (din) {
        for (int i = 0; i < in_c * h * w; ++i) din[i] = 0.0;
        for (int ic = 0; ic < in_c; ++ic) {
            for (int oc = 0; oc < out_c; ++oc) {
                for (int ky = 0; ky < ksize; ++ky) {
                    for (int kx = 0; kx < ksize; ++kx) {
                        const double wv =
                            weights[((static_cast<std::size_t>(oc) * in_c + ic) * ksize + ky) * ksize + kx];
                        for (int oy = 0; oy < oh; ++oy) {
                            for (int ox = 0; ox < ow; ++ox) {
                                const int iy = reflect_index(oy * stride + ky - pad, h);
                                const int ix = reflect_index(ox * stride + kx - pad, w);
                                din[(static_cast<std::size_t>(ic) * h + iy) * w + ix] +=
                                    wv * dout[(static_cast<std::size_t>(oc) * oh + oy) * ow + ox];
                            }
                        }
                    }
                }
            }
        }
    }
}

void instance_norm_forward(const double* in, int c, int hw,
                           const double* scale, const double* shift, double eps,
                           double* out, double* mean, double* inv_std) {
    for (int ch = 0; ch < c; ++ch) {
        const double* x = in + static_cast<std::size_t>(ch) * hw;
        double mu = 0.0;
        for (int i = 0; i < hw; ++i) mu += x[i];
        mu /= hw;
        double var = 0.0;
        for (int i = 0; i < hw; ++i) var += (x[i] - mu) * (x[i] - mu);
        var /= hw;
        const double istd = 1.0 / std::sqrt(var + eps);
        mean[ch] = mu;
        inv_std[ch] = istd;
        for (int i = 0; i < hw; ++i) {
            out[static_cast<std::size_t>(ch) * hw + i] = scale[ch] * (x[i] - mu) * istd + shift[ch];
        }
    }
}

void instance_norm_backward(const double* in, const double* mean, const double* inv_std,
                            const double* scale, const double* dout, int c, int hw,
                            double* din, double* dscale, double* dshift) {
    for (int ch = 0; ch < c; ++ch) {
        const double* x = in + static_cast<std::size_t>(ch) * hw;
        const double* dy = dout + static_cast<std::size_t>(ch) * hw;
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int i = 0; i < hw; ++i) {
            sum_dy += dy[i];
            sum_dy_xhat += dy[i] * (x[i] - mean[ch]) * inv_std[ch];
        }
        if (dshift) dshift[ch] = sum_dy;
        if (dscale) dscale[ch] = sum_dy_xhat;
        if (din) {
            for (int i = 0; i < hw; ++i) {
                const double xhat = (x[i] - mean[ch]) * inv_std[ch];
                din[static_cast<std::size_t>(ch) * hw + i] =
                    scale[ch] * inv_std[ch] *
                    (dy[i] - sum_dy / hw - xhat * sum_dy_xhat / hw);
            }
        }
    }
}

} // namespace dipl0::reference
