#include "dipl0/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dipl0 {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01; // (K1*L)^2
constexpr double kC2 = 0.03 * 0.03; // (K2*L)^2

// Normalized 11x11 Gaussian, built once.
const std::vector<double>& window_weights() {
    static const std::vector<double> w = [] {
        std::vector<double> v(kWindow * kWindow);
        const int r = kWindow / 2;
        double total = 0.0;
        for (int y = 0; y < kWindow; ++y)
            for (int x = 0; x < kWindow; ++x) {
                const double dy = y - r, dx = x - r;
                const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
                v[y * kWindow + x] = g;
                total += g;
            }
        for (double& g : v) g /= total;
        return v;
    }();
    return w;
}

double ssim_channel(const ImageTensor& a, const ImageTensor& b, int c) {
    const auto& w = window_weights();
    const int h = a.height(), wd = a.width();
    const double* pa = a.plane(c);
    const double* pb = b.plane(c);

    double total = 0.0;
    long positions = 0;
    for (int y = 0; y + kWindow <= h; ++y) {
        for (int x = 0; x + kWindow <= wd; ++x) {
            double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
            for (int wy = 0; wy < kWindow; ++wy) {
                const double* ra = pa + static_cast<std::size_t>(y + wy) * wd + x;
                const double* rb = pb + static_cast<std::size_t>(y + wy) * wd + x;
                const double* rw = w.data() + wy * kWindow;
                for (int wx = 0; wx < kWindow; ++wx) {
                    const double va = ra[wx], vb = rb[wx], g = rw[wx];
                    ma += g * va;
                    mb += g * vb;
                    maa += g * va * va;
                    mbb += g * vb * vb;
                    mab += g * va * vb;
                }
            }
            const double var_a = maa - ma * ma;
            const double var_b = mbb - mb * mb;
            const double cov = mab - ma * mb;
            const double num = (2.0 * ma * mb + kC1) * (2.0 * cov + kC2);
            const double den = (ma * ma + mb * mb + kC1) * (var_a + var_b + kC2);
            total += num / den;
            ++positions;
        }
    }
    return total / static_cast<double>(positions);
}

} // namespace

double psnr(const ImageTensor& a, const ImageTensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("psnr: shape mismatch");
    if (a.size() == 0) throw std::invalid_argument("psnr: empty image");
    const double mse = squared_distance(a, b) / static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const ImageTensor& a, const ImageTensor& b) {
    MetricReport r = compare(a, b);
    return r.ssim;
}

MetricReport compare(const ImageTensor& a, const ImageTensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("metrics: shape mismatch");
    if (a.height() < kWindow || a.width() < kWindow)
        throw std::invalid_argument("metrics: image smaller than the 11x11 ssim window");

    MetricReport report;
    report.psnr = psnr(a, b);
    report.ssim_per_channel.resize(a.channels());
    double total = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        report.ssim_per_channel[c] = ssim_channel(a, b, c);
        total += report.ssim_per_channel[c];
    }
    report.ssim = total / a.channels();
    return report;
}

} // namespace dipl0
