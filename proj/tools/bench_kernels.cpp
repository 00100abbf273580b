// Compares the naive reference kernels against the production kernels in
// serial and parallel mode. Run with DIPL0_PARALLEL unset; the parallel
// cases flip the switch themselves.
#include "dipl0/kernels.hpp"
#include "dipl0/reference_kernels.hpp"
#include "dipl0/rng.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

// Mid-network shape: 32 -> 32 channels, 3x3, stride 1 on a 64x64 plane.
constexpr int kC = 32, kH = 64, kW = 64, kK = 3;

struct ConvData {
    std::vector<double> in, weights, bias, out, dout, din, dw, db;
    ConvData() {
        dipl0::UniformRng rng(42);
        in.resize(static_cast<std::size_t>(kC) * kH * kW);
        weights.resize(static_cast<std::size_t>(kC) * kC * kK * kK);
        bias.resize(kC);
        out.resize(in.size());
        dout.resize(in.size());
        din.resize(in.size());
        dw.resize(weights.size());
        db.resize(bias.size());
        for (double& v : in) v = rng.in_range(-1, 1);
        for (double& v : weights) v = rng.in_range(-0.2, 0.2);
        for (double& v : bias) v = rng.in_range(-0.2, 0.2);
        for (double& v : dout) v = rng.in_range(-1, 1);
    }
};

ConvData& data() {
    static ConvData d;
    return d;
}

void conv_forward_reference(benchmark::State& state) {
    ConvData& d = data();
    for (auto _ : state) {
        dipl0::reference::conv2d_forward(d.in.data(), kC, kH, kW, d.weights.data(),
                                         d.bias.data(), kC, kK, 1, d.out.data());
        benchmark::DoNotOptimize(d.out.data());
    }
}

void conv_forward_serial(benchmark::State& state) {
    ConvData& d = data();
    dipl0::kernels::set_parallel(false);
    for (auto _ : state) {
        dipl0::kernels::conv2d_forward(d.in.data(), kC, kH, kW, d.weights.data(), d.bias.data(),
                                       kC, kK, 1, d.out.data());
        benchmark::DoNotOptimize(d.out.data());
    }
}

void conv_forward_parallel(benchmark::State& state) {
    ConvData& d = data();
    dipl0::kernels::set_parallel(true);
    for (auto _ : state) {
        dipl0::kernels::conv2d_forward(d.in.data(), kC, kH, kW, d.weights.data(), d.bias.data(),
                                       kC, kK, 1, d.out.data());
        benchmark::DoNotOptimize(d.out.data());
    }
    dipl0::kernels::set_parallel(false);
}

void conv_backward_reference(benchmark::State& state) {
    ConvData& d = data();
    for (auto _ : state) {
        dipl0::reference::conv2d_backward(d.in.data(), kC, kH, kW, d.weights.data(), kC, kK, 1,
                                          d.dout.data(), d.din.data(), d.dw.data(), d.db.data());
        benchmark::DoNotOptimize(d.din.data());
    }
}

void conv_backward_serial(benchmark::State& state) {
    ConvData& d = data();
    dipl0::kernels::set_parallel(false);
    for (auto _ : state) {
        dipl0::kernels::conv2d_backward(d.in.data(), kC, kH, kW, d.weights.data(), kC, kK, 1,
                                        d.dout.data(), d.din.data(), d.dw.data(), d.db.data());
        benchmark::DoNotOptimize(d.din.data());
    }
}

void conv_backward_parallel(benchmark::State& state) {
    ConvData& d = data();
    dipl0::kernels::set_parallel(true);
    for (auto _ : state) {
        dipl0::kernels::conv2d_backward(d.in.data(), kC, kH, kW, d.weights.data(), kC, kK, 1,
                                        d.dout.data(), d.din.data(), d.dw.data(), d.db.data());
        benchmark::DoNotOptimize(d.din.data());
    }
    dipl0::kernels::set_parallel(false);
}

void norm_forward_reference(benchmark::State& state) {
    ConvData& d = data();
    std::vector<double> mean(kC), istd(kC), scale(kC, 1.0), shift(kC, 0.0);
    for (auto _ : state) {
        dipl0::reference::instance_norm_forward(d.in.data(), kC, kH * kW, scale.data(),
                                                shift.data(), 1e-5, d.out.data(), mean.data(),
                                                istd.data());
        benchmark::DoNotOptimize(d.out.data());
    }
}

void norm_forward_serial(benchmark::State& state) {
    ConvData& d = data();
    std::vector<double> mean(kC), istd(kC), scale(kC, 1.0), shift(kC, 0.0);
    dipl0::kernels::set_parallel(false);
    for (auto _ : state) {
        dipl0::kernels::instance_norm_forward(d.in.data(), kC, kH * kW, scale.data(),
                                              shift.data(), 1e-5, d.out.data(), mean.data(),
                                              istd.data());
        benchmark::DoNotOptimize(d.out.data());
    }
}

void norm_forward_parallel(benchmark::State& state) {
    ConvData& d = data();
    std::vector<double> mean(kC), istd(kC), scale(kC, 1.0), shift(kC, 0.0);
    dipl0::kernels::set_parallel(true);
    for (auto _ : state) {
        dipl0::kernels::instance_norm_forward(d.in.data(), kC, kH * kW, scale.data(),
                                              shift.data(), 1e-5, d.out.data(), mean.data(),
                                              istd.data());
        benchmark::DoNotOptimize(d.out.data());
    }
    dipl0::kernels::set_parallel(false);
}

} // namespace

BENCHMARK(conv_forward_reference);
BENCHMARK(conv_forward_serial);
BENCHMARK(conv_forward_parallel);
BENCHMARK(conv_backward_reference);
BENCHMARK(conv_backward_serial);
BENCHMARK(conv_backward_parallel);
BENCHMARK(norm_forward_reference);
BENCHMARK(norm_forward_serial);
BENCHMARK(norm_forward_parallel);

BENCHMARK_MAIN();
