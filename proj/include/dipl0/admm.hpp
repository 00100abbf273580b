#pragma once

#include "dipl0/image.hpp"
#include "dipl0/net.hpp"
#include "dipl0/region_fusion.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace dipl0 {

struct Seeds {
    std::uint64_t weights = 1;
    std::uint64_t input = 2;
    std::uint64_t v0w0 = 3;

    bool operator==(const Seeds&) const = default;
};

// Parameters of one smoothing run. Defaults are the smoothing optima
// (lambda 0.025, beta 2.25, T 100, alpha 1e-3, gamma 0.9, K 25).
struct RunConfig {
    double lambda = 0.025;
    double beta = 2.25;
    double gamma = 0.9;
    int T = 100;
    int K = 25;
    double alpha = 1e-3;
    Seeds seeds;
    NetSpec net = NetSpec::desk_scale();
    int ramp_steps = 100;
    double epsilon = 1e-12;

    // Coefficient of the gradient-count term in the v subproblem. The
    // augmented Lagrangian's v terms are lambda*||grad v||_0 +
    // (beta/2)||v - target||^2; dividing by beta/2 gives 2*lambda/beta.
    // Recomputed on every call, never stored.
    double prox_coefficient() const { return 2.0 * lambda / beta; }
    FusionConfig fusion() const { return {prox_coefficient(), ramp_steps, epsilon}; }

    void validate() const;

    static RunConfig smoothing_defaults();
    // Best settings for JPEG artifact removal (beta 2.0, rest as smoothing).
    static RunConfig jpeg_defaults();

    bool operator==(const RunConfig&) const = default;
};

// One outer iteration's log row. psnr_ref/ssim_ref are present only when
// the run was given a reference image.
struct IterationRecord {
    int t = 0;
    double loss_u = 0.0;      // ||f-u||^2 + lambda * ||grad u||_0
    double loss_output = 0.0; // same loss on the raw network output
    double fidelity_u = 0.0;  // ||f-u||^2
    long l0_u = 0;
    long l0_output = 0;
    long l0_v = 0;
    double dual_residual = 0.0;    // ||v - g||_2
    double prox_obj_target = 0.0;  // v objective evaluated at the prox target
    double prox_obj_v = 0.0;       // v objective evaluated at the fused v
    double theta_obj_first = 0.0;  // theta objective before the first Adam step
    double theta_obj_last = 0.0;   // and before the last one
    std::optional<double> psnr_ref;
    std::optional<double> ssim_ref;

    bool operator==(const IterationRecord&) const = default;
};

struct AdmmState {
    int t = 0;
    ParamStore theta;
    ImageTensor v, w, u, x;
    std::vector<IterationRecord> history;
};

struct RunResult {
    ImageTensor u; // u^T, unclamped (stays in (0,1) by construction)
    ParamStore theta; // final weights, for checkpointing
    std::vector<IterationRecord> history;
    double wall_theta_s = 0.0;
    double wall_v_s = 0.0; // prox + dual update + averaging
    double wall_total_s = 0.0;
};

// Builds theta and x from the seeds, draws v0 and w0 uniform in [0,1], and
// sets u0 = f (bytewise). f must be normalized to [0,1] and its dims must be
// multiples of 2^depth; channel count must match the net's output.
AdmmState init_state(const ImageTensor& f, const RunConfig& cfg);

// output - w/beta, unclamped.
ImageTensor prox_target(const ImageTensor& output, const ImageTensor& w, double beta);

// w + beta*(v - output).
ImageTensor dual_update(const ImageTensor& w, const ImageTensor& v, const ImageTensor& output,
                        double beta);

// gamma*output + (1-gamma)*u_prev.
ImageTensor average_output(const ImageTensor& u_prev, const ImageTensor& output, double gamma);

// Runs T outer iterations of [theta subproblem -> prox -> dual update ->
// exponential averaging]. reference, when given, must share f's shape and
// adds psnr/ssim columns to the history. on_iteration, when given, is called
// after each outer iteration. Non-finite values abort with a diagnostic
// naming the phase and iteration.
RunResult run(const ImageTensor& f, const RunConfig& cfg,
              const ImageTensor* reference = nullptr,
              const std::function<void(const IterationRecord&)>& on_iteration = {});

} // namespace dipl0
