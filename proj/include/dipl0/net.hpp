#pragma once

#include "dipl0/image.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace dipl0 {

// Encoder-decoder topology. Per level the encoder runs
// [3x3 conv stride 2, norm, leaky relu, 3x3 conv stride 1, norm, leaky relu]
// and a skip branch taps the level input with [1x1 conv, norm, leaky relu].
// Per level the decoder runs [norm on concat(upsampled, skip), 3x3 conv,
// norm, leaky relu, 1x1 conv, norm, leaky relu] with bilinear 2x upsampling,
// followed by a 1x1 head conv and a logistic squash. 3x3 convolutions use
// reflect padding. Input height/width must be multiples of 2^depth.
//
// Parameter layers are stored in a fixed order (the checkpoint contract):
// per encoder level [skip conv, skip norm, stride-2 conv, norm, stride-1
// conv, norm], then per decoder level from deepest to shallowest
// [input norm, 3x3 conv, norm, 1x1 conv, norm], then the head conv.
struct NetSpec {
    int input_channels = 32;
    int depth = 3;
    std::vector<int> channels_per_level = {16, 32, 64};
    std::vector<int> skip_channels = {4, 4, 4};
    int output_channels = 3;
    int kernel_size = 3;
    double leaky_slope = 0.2;
    double norm_epsilon = 1e-5;

    int alignment() const { return 1 << depth; }
    void validate() const;

    static NetSpec desk_scale(int output_channels = 3);
    // The full-size configuration (5 levels of 128 channels, 4 skip
    // channels); not the default, selectable via config.
    static NetSpec full_scale(int output_channels = 3);

    bool operator==(const NetSpec&) const = default;
};

enum class LayerKind { Conv, Norm };

struct Layer {
    LayerKind kind = LayerKind::Conv;
    // Conv: weights [out_c][in_c][k][k] and bias [out_c].
    // Norm: weights = per-channel scale, bias = per-channel shift.
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 1;
    int stride = 1;
    std::vector<double> weights, bias;
    std::vector<double> m_w, v_w, m_b, v_b; // Adam moment accumulators
};

struct ParamStore {
    NetSpec spec;
    std::vector<Layer> layers;
    long step_count = 0;
    // Bumped on every update; forward stamps it into the tape so backward
    // can reject tapes recorded under older weights.
    std::uint64_t version = 0;

    bool all_finite() const;
    std::size_t parameter_count() const;
};

// Gradient arrays aligned with ParamStore::layers.
struct Gradients {
    std::vector<std::vector<double>> weights, bias;
    bool all_finite() const;
};

// Recorded forward pass: every node output plus the per-channel norm
// statistics, enough to replay exact reverse-mode gradients.
struct Tape {
    ImageTensor x;
    std::vector<ImageTensor> node_outputs;
    std::vector<std::vector<double>> norm_mean;
    std::vector<std::vector<double>> norm_inv_std;
    std::uint64_t params_version = 0;
};

ParamStore build_network(const NetSpec& spec, std::uint64_t seed);

// Fixed random network input, uniform in [0, 0.1].
ImageTensor make_input(int height, int width, int channels, std::uint64_t seed);

struct ForwardResult {
    ImageTensor output;
    std::shared_ptr<Tape> tape; // null unless record
};

ForwardResult forward(const ParamStore& params, const ImageTensor& x, bool record);

Gradients backward(const ParamStore& params, const Tape& tape,
                   const ImageTensor& loss_grad_at_output);

struct ObjectiveEval {
    double value = 0.0;
    ImageTensor output_grad;
};

// ||f - output||^2 + (beta/2) ||v - output + w/beta||^2 and its exact
// derivative with respect to the output.
ObjectiveEval theta_objective(const ImageTensor& f, const ImageTensor& v, const ImageTensor& w,
                              double beta, const ImageTensor& output);

// Adam with beta1=0.9, beta2=0.999, eps=1e-8 and bias correction.
void adam_step(ParamStore& params, const Gradients& grads, double alpha);

// k_steps iterations of forward / objective / backward / adam_step. The
// optimizer state persists in params, so consecutive calls warm-start.
// Returns the objective value observed at each step's forward pass.
std::vector<double> solve_theta_subproblem(ParamStore& params, const ImageTensor& x,
                                           const ImageTensor& f, const ImageTensor& v,
                                           const ImageTensor& w, double beta, double alpha,
                                           int k_steps);

// Little-endian checkpoint with a shape-annotated array per layer; includes
// the Adam moments and step count so a resumed run continues exactly.
void save_checkpoint(const ParamStore& params, const std::string& path);
ParamStore load_checkpoint(const std::string& path);

} // namespace dipl0
