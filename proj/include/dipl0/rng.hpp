#pragma once

#include <cstdint>
#include <random>

namespace dipl0 {

// Seeded uniform generator. Doubles are derived from the raw 64-bit engine
// output instead of std::uniform_real_distribution, so sequences are
// identical across standard library implementations.
class UniformRng {
public:
    explicit UniformRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double in_range(double lo, double hi) { return lo + (hi - lo) * next(); }

private:
    std::mt19937_64 engine_;
};

} // namespace dipl0
