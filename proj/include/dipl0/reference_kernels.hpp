#pragma once

#include <cstddef>

// Naive single-threaded counterparts of the kernels in kernels.hpp, written
// as direct gather loops with inline index reflection. They exist as an
// independently-readable reference for the parity tests and the kernel
// benchmark; production code calls dipl0::kernels.
namespace dipl0::reference {

void conv2d_forward(const double* in, int in_c, int h, int w,
                    const double* weights, const double* bias,
                    int out_c, int ksize, int stride, double* out);

void conv2d_backward(const double* in, int in_c, int h, int w,
                     const double* weights, int out_c, int ksize, int stride,
                     const double* dout, double* din, double* dweights, double* dbias);

void instance_norm_forward(const double* in, int c, int hw,
                           const double* scale, const double* shift, double eps,
                           double* out, double* mean, double* inv_std);

void instance_norm_backward(const double* in, const double* mean, const double* inv_std,
                            const double* scale, const double* dout, int c, int hw,
                            double* din, double* dscale, double* dshift);

} // namespace dipl0::reference
