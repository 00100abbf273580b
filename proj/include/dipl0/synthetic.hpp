#pragma once

#include "dipl0/image.hpp"

#include <cstdint>

namespace dipl0 {

// Seeded stand-in for texture-blended test imagery: a piecewise-constant
// Voronoi partition (the clean image) corrupted by a sinusoidal texture
// plus uniform noise, clamped to [0,1].
struct SyntheticSpec {
    int size = 64; // square
    int n_regions = 12;
    double noise_amplitude = 0.05;   // uniform in [-a, a]
    double texture_amplitude = 0.08; // sinusoid amplitude
    double texture_frequency = 6.0;  // cycles across the image
    int channels = 3;
    std::uint64_t seed = 7;

    void validate() const;

    // The pinned instance used by the end-to-end checks and `demo`.
    static SyntheticSpec reference_instance();

    bool operator==(const SyntheticSpec&) const = default;
};

struct SyntheticPair {
    ImageTensor clean;
    ImageTensor corrupted;
};

SyntheticPair gen_synthetic(const SyntheticSpec& spec);

} // namespace dipl0
