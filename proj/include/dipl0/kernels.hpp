#pragma once

#include <cstddef>

// Low-level numeric kernels for the network. All buffers are planar
// (channel-major, each plane row-major) doubles. Convolutions use reflect
// padding of (kernel-1)/2 on both axes; output dims are h/stride x w/stride
// and h must be divisible by the stride.
//
// Each kernel accumulates per output element in a fixed order, so results
// are bit-identical between the serial and the OpenMP execution paths (the
// parallel loops partition output elements without changing per-element
// order). Parallel execution is opt-in via DIPL0_PARALLEL=1 or
// set_parallel().
namespace dipl0::kernels {

bool parallel_enabled();
void set_parallel(bool enabled);

// weights layout: [out_c][in_c][k][k], bias: [out_c].
void conv2d_forward(const double* in, int in_c, int h, int w,
                    const double* weights, const double* bias,
                    int out_c, int ksize, int stride, double* out);

// din/dweights/dbias may be null to skip that output. din has the input's
// shape; dweights/dbias match the weight/bias layouts and are overwritten.
void conv2d_backward(const double* in, int in_c, int h, int w,
                     const double* weights, int out_c, int ksize, int stride,
                     const double* dout, double* din, double* dweights, double* dbias);

// Per-channel spatial standardization with learned scale/shift. mean and
// inv_std (1/sqrt(var+eps)) are cached per channel for the backward pass.
void instance_norm_forward(const double* in, int c, int hw,
                           const double* scale, const double* shift, double eps,
                           double* out, double* mean, double* inv_std);

void instance_norm_backward(const double* in, const double* mean, const double* inv_std,
                            const double* scale, const double* dout, int c, int hw,
                            double* din, double* dscale, double* dshift);

void leaky_relu_forward(const double* in, std::size_t n, double slope, double* out);
void leaky_relu_backward(const double* in, const double* dout, std::size_t n, double slope,
                         double* din);

void sigmoid_forward(const double* in, std::size_t n, double* out);
// Uses the forward output, d/dz sigmoid(z) = y(1-y).
void sigmoid_backward(const double* out, const double* dout, std::size_t n, double* din);

// Bilinear 2x upsampling with half-pixel sample positions, edges clamped.
// out is c x 2h x 2w.
void upsample2x_forward(const double* in, int c, int h, int w, double* out);
void upsample2x_backward(const double* dout, int c, int h, int w, double* din);

// Reflect index into [0, n): -1 -> 1, n -> n-2; degenerate n == 1 -> 0.
int reflect_index(int i, int n);

} // namespace dipl0::kernels
