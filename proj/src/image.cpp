#include "dipl0/image.hpp"

#include <cmath>
#include <stdexcept>

namespace dipl0 {

ImageTensor::ImageTensor(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
    if (height < 1 || width < 1 || channels < 1) {
        throw std::invalid_argument("ImageTensor: dimensions must be positive");
    }
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

bool ImageTensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

bool ImageTensor::in_unit_range() const {
    for (double v : data_) {
        if (!(v >= 0.0 && v <= 1.0)) return false;
    }
    return true;
}

GradientField gradient(const ImageTensor& u) {
    const int h = u.height(), w = u.width(), c = u.channels();
    GradientField g{ImageTensor(h, w, c), ImageTensor(h, w, c)};
    for (int ch = 0; ch < c; ++ch) {
        const double* in = u.plane(ch);
        double* dx = g.dx.plane(ch);
        double* dy = g.dy.plane(ch);
        for (int y = 0; y < h; ++y) {
            const double* row = in + static_cast<std::size_t>(y) * w;
            double* dxr = dx + static_cast<std::size_t>(y) * w;
            for (int x = 0; x + 1 < w; ++x) dxr[x] = row[x + 1] - row[x];
            dxr[w - 1] = 0.0;
        }
        for (int y = 0; y + 1 < h; ++y) {
            const double* row = in + static_cast<std::size_t>(y) * w;
            const double* next = row + w;
            double* dyr = dy + static_cast<std::size_t>(y) * w;
            for (int x = 0; x < w; ++x) dyr[x] = next[x] - row[x];
        }
        // last row of dy stays zero
    }
    return g;
}

long l0_gradient_count(const ImageTensor& u, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("l0_gradient_count: epsilon must be >= 0");
    const int h = u.height(), w = u.width(), c = u.channels();
    long count = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double pooled = 0.0;
            for (int ch = 0; ch < c; ++ch) {
                const double* plane = u.plane(ch);
                const double v = plane[static_cast<std::size_t>(y) * w + x];
                if (x + 1 < w) pooled += std::abs(plane[static_cast<std::size_t>(y) * w + x + 1] - v);
                if (y + 1 < h) pooled += std::abs(plane[static_cast<std::size_t>(y + 1) * w + x] - v);
            }
            if (pooled > epsilon) ++count;
        }
    }
    return count;
}

long l0_difference_count(const ImageTensor& u, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("l0_difference_count: epsilon must be >= 0");
    const int h = u.height(), w = u.width(), c = u.channels();
    long count = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double dx = 0.0, dy = 0.0;
            for (int ch = 0; ch < c; ++ch) {
                const double* plane = u.plane(ch);
                const double v = plane[static_cast<std::size_t>(y) * w + x];
                if (x + 1 < w) dx += std::abs(plane[static_cast<std::size_t>(y) * w + x + 1] - v);
                if (y + 1 < h) dy += std::abs(plane[static_cast<std::size_t>(y + 1) * w + x] - v);
            }
            if (dx > epsilon) ++count;
            if (dy > epsilon) ++count;
        }
    }
    return count;
}

double eval_loss(const ImageTensor& f, const ImageTensor& u, double lambda, double epsilon) {
    if (!f.same_shape(u)) throw std::invalid_argument("eval_loss: shape mismatch");
    if (lambda < 0.0) throw std::invalid_argument("eval_loss: lambda must be >= 0");
    return squared_distance(f, u) + lambda * static_cast<double>(l0_gradient_count(u, epsilon));
}

ImageTensor axpy_combine(double a, const ImageTensor& u, double b, const ImageTensor& v) {
    if (!u.same_shape(v)) throw std::invalid_argument("axpy_combine: shape mismatch");
    ImageTensor out(u.height(), u.width(), u.channels());
    const std::size_t n = u.size();
    const double* up = u.data().data();
    const double* vp = v.data().data();
    double* op = out.data().data();
    for (std::size_t i = 0; i < n; ++i) op[i] = a * up[i] + b * vp[i];
    return out;
}

double squared_distance(const ImageTensor& a, const ImageTensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("squared_distance: shape mismatch");
    double acc = 0.0;
    const std::size_t n = a.size();
    const double* ap = a.data().data();
    const double* bp = b.data().data();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = ap[i] - bp[i];
        acc += d * d;
    }
    return acc;
}

double sum(const ImageTensor& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v;
    return acc;
}

} // namespace dipl0
