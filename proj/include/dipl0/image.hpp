#pragma once

#include <cstddef>
#include <vector>

namespace dipl0 {

// Dense real-valued image tensor in planar layout: one row-major H*W plane
// per channel, planes stored consecutively. Images entering or leaving the
// pipeline carry 1 (gray) or 3 (color) channels and intensities in [0,1];
// intermediate tensors (network activations, the fixed random network input,
// prox targets) may carry any channel count and leave the unit range.
class ImageTensor {
public:
    ImageTensor() = default;
    ImageTensor(int height, int width, int channels, double fill = 0.0);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    std::size_t size() const { return data_.size(); }
    long pixel_count() const { return static_cast<long>(height_) * width_; }

    double& at(int y, int x, int c) {
        return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
    }
    double at(int y, int x, int c) const {
        return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
    }

    double* plane(int c) { return data_.data() + static_cast<std::size_t>(c) * height_ * width_; }
    const double* plane(int c) const {
        return data_.data() + static_cast<std::size_t>(c) * height_ * width_;
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const ImageTensor& other) const {
        return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
    }

    bool all_finite() const;
    // True when every value lies in [0,1] and is finite.
    bool in_unit_range() const;

    bool operator==(const ImageTensor& other) const = default;

private:
    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

// Forward differences along each axis; the last column of dx and the last
// row of dy are zero (replicate boundary).
struct GradientField {
    ImageTensor dx;
    ImageTensor dy;
};

GradientField gradient(const ImageTensor& u);

// Number of pixels whose pooled absolute forward difference, summed over
// both axes and all channels, exceeds epsilon.
long l0_gradient_count(const ImageTensor& u, double epsilon = 1e-12);

// Number of forward-difference sites (one per 4-adjacent pixel pair, so up
// to 2 per pixel) whose channel-pooled absolute difference exceeds epsilon.
// This is the count under which merging two constant regions removes
// exactly their shared boundary pairs; the region-fusion prox objective
// uses it. l0_gradient_count pools both axes into one count per pixel.
long l0_difference_count(const ImageTensor& u, double epsilon = 1e-12);

// ||f - u||^2 + lambda * l0_gradient_count(u, epsilon). The squared norm is
// an unnormalized sum over all pixels and channels.
double eval_loss(const ImageTensor& f, const ImageTensor& u, double lambda,
                 double epsilon = 1e-12);

// Elementwise a*u + b*v, no clamping.
ImageTensor axpy_combine(double a, const ImageTensor& u, double b, const ImageTensor& v);

double squared_distance(const ImageTensor& a, const ImageTensor& b);
double sum(const ImageTensor& a);

} // namespace dipl0
