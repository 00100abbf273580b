#include "dipl0/admm.hpp"

#include "dipl0/metrics.hpp"
#include "dipl0/rng.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dipl0 {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void require_finite(const ImageTensor& img, const char* what, int t) {
    if (!img.all_finite())
        throw std::runtime_error("admm: non-finite values in " + std::string(what) +
                                 " at iteration " + std::to_string(t));
}

} // namespace

void RunConfig::validate() const {
    // lambda = 0 is admitted (it disables the regularizer and the pipeline
    // degenerates gracefully); negative weights are not.
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("run config: lambda must be >= 0");
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("run config: beta must be > 0");
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::invalid_argument("run config: gamma must be in (0, 1]");
    if (T < 0) throw std::invalid_argument("run config: T must be >= 0");
    if (K < 1) throw std::invalid_argument("run config: K must be >= 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("run config: alpha must be > 0");
    if (ramp_steps < 1) throw std::invalid_argument("run config: ramp_steps must be >= 1");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("run config: epsilon must be >= 0");
    net.validate();
}

RunConfig RunConfig::smoothing_defaults() { return RunConfig{}; }

RunConfig RunConfig::jpeg_defaults() {
    RunConfig cfg;
    cfg.beta = 2.0;
    return cfg;
}

AdmmState init_state(const ImageTensor& f, const RunConfig& cfg) {
    cfg.validate();
    if (!f.in_unit_range())
        throw std::invalid_argument("admm: input image must be normalized to [0,1]");
    if (f.channels() != cfg.net.output_channels)
        throw std::invalid_argument("admm: input channel count does not match the net output");
    if (f.height() % cfg.net.alignment() != 0 || f.width() % cfg.net.alignment() != 0)
        throw std::invalid_argument("admm: input dims must be multiples of 2^depth");

    AdmmState state;
    state.theta = build_network(cfg.net, cfg.seeds.weights);
    state.x = make_input(f.height(), f.width(), cfg.net.input_channels, cfg.seeds.input);
    state.u = f;

    UniformRng rng(cfg.seeds.v0w0); // v drawn first, then w
    state.v = ImageTensor(f.height(), f.width(), f.channels());
    state.w = ImageTensor(f.height(), f.width(), f.channels());
    for (double& x : state.v.data()) x = rng.next();
    for (double& x : state.w.data()) x = rng.next();
    return state;
}

ImageTensor prox_target(const ImageTensor& output, const ImageTensor& w, double beta) {
    if (!output.same_shape(w)) throw std::invalid_argument("prox_target: shape mismatch");
    if (!(beta > 0.0)) throw std::invalid_argument("prox_target: beta must be > 0");
    return axpy_combine(1.0, output, -1.0 / beta, w);
}

ImageTensor dual_update(const ImageTensor& w, const ImageTensor& v, const ImageTensor& output,
                        double beta) {
    if (!w.same_shape(v) || !w.same_shape(output))
        throw std::invalid_argument("dual_update: shape mismatch");
    ImageTensor next = w;
    auto& nd = next.data();
    const auto& vd = v.data();
    const auto& gd = output.data();
    for (std::size_t i = 0; i < nd.size(); ++i) nd[i] += beta * (vd[i] - gd[i]);
    return next;
}

ImageTensor average_output(const ImageTensor& u_prev, const ImageTensor& output, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::invalid_argument("average_output: gamma must be in (0, 1]");
    if (!u_prev.same_shape(output))
        throw std::invalid_argument("average_output: shape mismatch");
    return axpy_combine(gamma, output, 1.0 - gamma, u_prev);
}

RunResult run(const ImageTensor& f, const RunConfig& cfg, const ImageTensor* reference,
              const std::function<void(const IterationRecord&)>& on_iteration) {
    if (reference && !reference->same_shape(f))
        throw std::invalid_argument("admm: reference image shape mismatch");

    const auto run_start = std::chrono::steady_clock::now();
    AdmmState state = init_state(f, cfg);
    const FusionConfig fusion = cfg.fusion();
    const double lambda_eff = fusion.lambda_eff;

    RunResult result;
    result.history.reserve(cfg.T);

    for (int t = 1; t <= cfg.T; ++t) {
        const auto theta_start = std::chrono::steady_clock::now();
        const std::vector<double> trace = solve_theta_subproblem(
            state.theta, state.x, f, state.v, state.w, cfg.beta, cfg.alpha, cfg.K);
        const ImageTensor g = forward(state.theta, state.x, false).output;
        require_finite(g, "the network output", t);
        result.wall_theta_s += seconds_since(theta_start);

        const auto v_start = std::chrono::steady_clock::now();
        const ImageTensor target = prox_target(g, state.w, cfg.beta);
        require_finite(target, "the prox target", t);
        state.v = solve_prox(target, fusion);
        require_finite(state.v, "the fused v", t);

        IterationRecord rec;
        rec.t = t;
        rec.prox_obj_target = lambda_eff * l0_difference_count(target, cfg.epsilon);
        rec.prox_obj_v = prox_objective(state.v, target, lambda_eff, cfg.epsilon);
        // Guaranteed by fusion monotonicity; a violation means a solver bug.
        if (rec.prox_obj_v >
            rec.prox_obj_target + 1e-9 * std::max(1.0, std::abs(rec.prox_obj_target)))
            throw std::runtime_error("admm: v step increased the prox objective at iteration " +
                                     std::to_string(t));

        state.w = dual_update(state.w, state.v, g, cfg.beta);
        require_finite(state.w, "the dual variable", t);
        state.u = average_output(state.u, g, cfg.gamma);
        require_finite(state.u, "the averaged output", t);
        result.wall_v_s += seconds_since(v_start);

        rec.loss_u = eval_loss(f, state.u, cfg.lambda, cfg.epsilon);
        rec.loss_output = eval_loss(f, g, cfg.lambda, cfg.epsilon);
        rec.fidelity_u = squared_distance(f, state.u);
        rec.l0_u = l0_gradient_count(state.u, cfg.epsilon);
        rec.l0_output = l0_gradient_count(g, cfg.epsilon);
        rec.l0_v = l0_gradient_count(state.v, cfg.epsilon);
        rec.dual_residual = std::sqrt(squared_distance(state.v, g));
        rec.theta_obj_first = trace.front();
        rec.theta_obj_last = trace.back();
        if (reference) {
            rec.psnr_ref = psnr(state.u, *reference);
            rec.ssim_ref = ssim(state.u, *reference);
        }
        state.t = t;
        state.history.push_back(rec);
        result.history.push_back(rec);
        if (on_iteration) on_iteration(rec);
    }

    result.u = std::move(state.u);
    result.theta = std::move(state.theta);
    result.wall_total_s = seconds_since(run_start);
    return result;
}

} // namespace dipl0
