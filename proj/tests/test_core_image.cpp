#include "dipl0/image.hpp"

#include "dipl0/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

using dipl0::ImageTensor;

namespace {

ImageTensor row_image(const std::vector<double>& values) {
    ImageTensor img(1, static_cast<int>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i) img.at(0, static_cast<int>(i), 0) = values[i];
    return img;
}

ImageTensor random_image(int h, int w, int c, std::uint64_t seed) {
    ImageTensor img(h, w, c);
    dipl0::UniformRng rng(seed);
    for (double& v : img.data()) v = rng.next();
    return img;
}

} // namespace

TEST_CASE("tensor layout is planar with row-major planes") {
    ImageTensor img(2, 3, 2);
    img.at(0, 1, 0) = 1.0;
    img.at(1, 2, 1) = 2.0;
    CHECK(img.data()[1] == 1.0);            // plane 0, row 0, col 1
    CHECK(img.data()[2 * 3 + 1 * 3 + 2] == 2.0); // plane 1, row 1, col 2
    CHECK(img.plane(1)[5] == 2.0);
    CHECK(img.size() == 12);
    CHECK(img.pixel_count() == 6);
}

TEST_CASE("tensor rejects non-positive dims") {
    CHECK_THROWS_AS(ImageTensor(0, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(ImageTensor(3, -1, 1), std::invalid_argument);
    CHECK_THROWS_AS(ImageTensor(3, 3, 0), std::invalid_argument);
}

TEST_CASE("finiteness and unit-range predicates") {
    ImageTensor img(2, 2, 1, 0.5);
    CHECK(img.all_finite());
    CHECK(img.in_unit_range());
    img.at(0, 0, 0) = 1.5;
    CHECK(img.all_finite());
    CHECK_FALSE(img.in_unit_range());
    img.at(0, 0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(img.all_finite());
    CHECK_FALSE(img.in_unit_range());
}

TEST_CASE("gradient of a constant image is zero") {
    ImageTensor img(4, 5, 3, 0.7);
    const dipl0::GradientField g = dipl0::gradient(img);
    for (double v : g.dx.data()) CHECK(v == 0.0);
    for (double v : g.dy.data()) CHECK(v == 0.0);
    CHECK(dipl0::l0_gradient_count(img) == 0);
    CHECK(dipl0::l0_difference_count(img) == 0);
}

TEST_CASE("forward differences on a 1D step") {
    const ImageTensor img = row_image({0, 0, 1, 1});
    const dipl0::GradientField g = dipl0::gradient(img);
    CHECK(g.dx.at(0, 0, 0) == 0.0);
    CHECK(g.dx.at(0, 1, 0) == 1.0);
    CHECK(g.dx.at(0, 2, 0) == 0.0);
    CHECK(g.dx.at(0, 3, 0) == 0.0); // last column forced to zero
    for (double v : g.dy.data()) CHECK(v == 0.0);
    CHECK(dipl0::l0_gradient_count(img) == 1);
}

TEST_CASE("forward differences on vertical stripes") {
    // [[0,1],[0,1]]: horizontal steps at both left pixels, no vertical ones.
    ImageTensor img(2, 2, 1);
    img.at(0, 1, 0) = 1.0;
    img.at(1, 1, 0) = 1.0;
    const dipl0::GradientField g = dipl0::gradient(img);
    CHECK(g.dx.at(0, 0, 0) == 1.0);
    CHECK(g.dx.at(0, 1, 0) == 0.0);
    CHECK(g.dx.at(1, 0, 0) == 1.0);
    CHECK(g.dx.at(1, 1, 0) == 0.0);
    for (double v : g.dy.data()) CHECK(v == 0.0);
    CHECK(dipl0::l0_gradient_count(img) == 2);
    CHECK(dipl0::l0_difference_count(img) == 2);
}

TEST_CASE("pixel count pools both axes, difference count does not") {
    // Lone bright pixel at (0,0) of a 2x2: dx and dy both nonzero there.
    ImageTensor img(2, 2, 1);
    img.at(0, 0, 0) = 1.0;
    CHECK(dipl0::l0_gradient_count(img) == 3);   // (0,0), plus (0,1) dy and (1,0) dx
    CHECK(dipl0::l0_difference_count(img) == 4); // both differences at (0,0) counted
}

TEST_CASE("count is invariant under adding a constant") {
    const ImageTensor img = random_image(6, 7, 3, 11);
    ImageTensor shifted = img;
    for (double& v : shifted.data()) v += 0.25;
    CHECK(dipl0::l0_gradient_count(img) == dipl0::l0_gradient_count(shifted));
}

TEST_CASE("count is non-increasing in epsilon") {
    const ImageTensor img = random_image(8, 8, 3, 5);
    long prev = dipl0::l0_gradient_count(img, 0.0);
    for (double eps : {1e-12, 1e-3, 0.1, 1.0, 10.0}) {
        const long cur = dipl0::l0_gradient_count(img, eps);
        CHECK(cur <= prev);
        prev = cur;
    }
    CHECK(dipl0::l0_gradient_count(img, 10.0) == 0); // pooled diffs can't exceed 6
}

TEST_CASE("count treats epsilon as a strict threshold") {
    const ImageTensor img = row_image({0.0, 0.5});
    CHECK(dipl0::l0_gradient_count(img, 0.5) == 0);
    CHECK(dipl0::l0_gradient_count(img, 0.49) == 1);
    CHECK_THROWS_AS(dipl0::l0_gradient_count(img, -1.0), std::invalid_argument);
}

TEST_CASE("loss on a flat approximation of a step") {
    const ImageTensor f = row_image({0, 0, 1, 1});
    const ImageTensor u = row_image({0.5, 0.5, 0.5, 0.5});
    CHECK(dipl0::eval_loss(f, u, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(dipl0::eval_loss(f, f, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("loss of an image against itself is the count term") {
    const ImageTensor img = random_image(5, 9, 3, 3);
    const double lambda = 0.37;
    CHECK(dipl0::eval_loss(img, img, lambda) ==
          doctest::Approx(lambda * dipl0::l0_gradient_count(img)).epsilon(1e-15));
}

TEST_CASE("loss requires matching shapes and nonnegative lambda") {
    const ImageTensor a(2, 2, 1), b(2, 3, 1);
    CHECK_THROWS_AS(dipl0::eval_loss(a, b, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(dipl0::eval_loss(a, a, -0.1), std::invalid_argument);
    CHECK(dipl0::eval_loss(a, a, 0.0) >= 0.0);
}

TEST_CASE("elementwise combination") {
    const ImageTensor ones(2, 2, 1, 1.0);
    const ImageTensor zeros(2, 2, 1, 0.0);
    CHECK(dipl0::axpy_combine(1.0, ones, 0.0, zeros) == ones);
    const ImageTensor m = dipl0::axpy_combine(0.9, ones, 0.1, zeros);
    for (double v : m.data()) CHECK(v == doctest::Approx(0.9));
    const ImageTensor tenths(2, 2, 1, 0.1);
    const ImageTensor d = dipl0::axpy_combine(0.0, ones, 2.0, tenths);
    for (double v : d.data()) CHECK(v == doctest::Approx(0.2));
    CHECK_THROWS_AS(dipl0::axpy_combine(1.0, ones, 1.0, ImageTensor(3, 2, 1)),
                    std::invalid_argument);
}

TEST_CASE("squared distance and sum") {
    const ImageTensor a(1, 2, 1, 0.0);
    ImageTensor b(1, 2, 1, 0.0);
    b.at(0, 1, 0) = 2.0;
    CHECK(dipl0::squared_distance(a, b) == 4.0);
    CHECK(dipl0::sum(b) == 2.0);
    CHECK_THROWS_AS(dipl0::squared_distance(a, ImageTensor(2, 2, 1)), std::invalid_argument);
}

TEST_CASE("gradients and counts agree across layouts") {
    // dx/dy computed through gradient() agree with the counting loops.
    const ImageTensor img = random_image(7, 6, 3, 21);
    const dipl0::GradientField g = dipl0::gradient(img);
    long pixel_count = 0, site_count = 0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            double dx = 0, dy = 0;
            for (int c = 0; c < img.channels(); ++c) {
                dx += std::abs(g.dx.at(y, x, c));
                dy += std::abs(g.dy.at(y, x, c));
            }
            if (dx + dy > 1e-12) ++pixel_count;
            if (dx > 1e-12) ++site_count;
            if (dy > 1e-12) ++site_count;
        }
    CHECK(pixel_count == dipl0::l0_gradient_count(img));
    CHECK(site_count == dipl0::l0_difference_count(img));
}
