#pragma once

#include "dipl0/image.hpp"

#include <vector>

namespace dipl0 {

// 10*log10(1/MSE) with MSE averaged over all pixels and channels; peak is 1
// because images are normalized. Identical inputs return +infinity.
double psnr(const ImageTensor& a, const ImageTensor& b);

// Mean local SSIM with an 11x11 Gaussian window (sigma 1.5), K1=0.01,
// K2=0.03, L=1, computed on valid window positions per channel and averaged
// across channels. Requires both dims >= 11.
double ssim(const ImageTensor& a, const ImageTensor& b);

struct MetricReport {
    double psnr = 0.0;  // +infinity when the images are identical
    double ssim = 0.0;
    std::vector<double> ssim_per_channel;

    bool operator==(const MetricReport&) const = default;
};

MetricReport compare(const ImageTensor& a, const ImageTensor& b);

} // namespace dipl0
