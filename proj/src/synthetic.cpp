#include "dipl0/synthetic.hpp"

#include "dipl0/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dipl0 {

void SyntheticSpec::validate() const {
    if (size < 32) throw std::invalid_argument("synthetic: size must be >= 32");
    if (n_regions < 1) throw std::invalid_argument("synthetic: n_regions must be >= 1");
    if (channels < 1) throw std::invalid_argument("synthetic: channels must be >= 1");
    if (noise_amplitude < 0 || texture_amplitude < 0 || texture_frequency < 0)
        throw std::invalid_argument("synthetic: amplitudes and frequency must be >= 0");
}

SyntheticSpec SyntheticSpec::reference_instance() { return SyntheticSpec{}; }

SyntheticPair gen_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    UniformRng rng(spec.seed);
    const int n = spec.size;

    // Draw order is part of the contract: sites, colors, texture direction,
    // per-channel phases, then noise in data order.
    std::vector<double> sx(spec.n_regions), sy(spec.n_regions);
    for (int i = 0; i < spec.n_regions; ++i) {
        sx[i] = rng.in_range(0.0, n);
        sy[i] = rng.in_range(0.0, n);
    }
    std::vector<double> color(static_cast<std::size_t>(spec.n_regions) * spec.channels);
    for (double& c : color) c = rng.in_range(0.1, 0.9);

    const double angle = rng.in_range(0.0, std::numbers::pi);
    const double dirx = std::cos(angle), diry = std::sin(angle);
    std::vector<double> phase(spec.channels);
    for (double& p : phase) p = rng.in_range(0.0, 2.0 * std::numbers::pi);

    ImageTensor clean(n, n, spec.channels);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            int best = 0;
            double best_d = 1e300;
            for (int i = 0; i < spec.n_regions; ++i) {
                const double dx = x - sx[i], dy = y - sy[i];
                const double d = dx * dx + dy * dy;
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            for (int c = 0; c < spec.channels; ++c)
                clean.at(y, x, c) = color[static_cast<std::size_t>(best) * spec.channels + c];
        }

    ImageTensor corrupted = clean;
    const double two_pi = 2.0 * std::numbers::pi;
    for (int c = 0; c < spec.channels; ++c)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                const double proj = (dirx * x + diry * y) / n;
                const double tex =
                    spec.texture_amplitude * std::sin(two_pi * spec.texture_frequency * proj +
                                                      phase[c]);
                const double noise = rng.in_range(-spec.noise_amplitude, spec.noise_amplitude);
                double v = corrupted.at(y, x, c) + tex + noise;
                if (v < 0.0) v = 0.0;
                if (v > 1.0) v = 1.0;
                corrupted.at(y, x, c) = v;
            }
    return {std::move(clean), std::move(corrupted)};
}

} // namespace dipl0
