#include "dipl0/net.hpp"

#include "dipl0/kernels.hpp"
#include "dipl0/rng.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dipl0 {

namespace {

enum class NodeKind { Input, Conv, Norm, Leaky, Upsample, Concat, Sigmoid };

struct Node {
    NodeKind kind;
    int in0 = -1;
    int in1 = -1;  // second Concat input
    int layer = -1;
};

struct LayerDesc {
    LayerKind kind;
    int in_c, out_c, kernel, stride;
};

struct Plan {
    std::vector<Node> nodes;
    std::vector<LayerDesc> layers;
};

// Parameter layer order, which the checkpoint format and the schema test
// rely on: per encoder level [skip conv, skip norm, stride-2 conv, norm,
// stride-1 conv, norm], then per decoder level from deepest to shallowest
// [input norm, 3x3 conv, norm, 1x1 conv, norm], then the head conv.
Plan build_plan(const NetSpec& spec) {
    Plan plan;
    auto add_layer = [&](LayerKind kind, int in_c, int out_c, int kernel, int stride) {
        plan.layers.push_back({kind, in_c, out_c, kernel, stride});
        return static_cast<int>(plan.layers.size()) - 1;
    };
    auto add_node = [&](NodeKind kind, int in0, int layer = -1, int in1 = -1) {
        plan.nodes.push_back({kind, in0, in1, layer});
        return static_cast<int>(plan.nodes.size()) - 1;
    };

    int cur = add_node(NodeKind::Input, -1);
    std::vector<int> skip_out(spec.depth);
    for (int l = 0; l < spec.depth; ++l) {
        const int in_c = l == 0 ? spec.input_channels : spec.channels_per_level[l - 1];
        const int c = spec.channels_per_level[l];
        const int sc = spec.skip_channels[l];

        int n = add_node(NodeKind::Conv, cur, add_layer(LayerKind::Conv, in_c, sc, 1, 1));
        n = add_node(NodeKind::Norm, n, add_layer(LayerKind::Norm, sc, sc, 1, 1));
        skip_out[l] = add_node(NodeKind::Leaky, n);

        n = add_node(NodeKind::Conv, cur,
                     add_layer(LayerKind::Conv, in_c, c, spec.kernel_size, 2));
        n = add_node(NodeKind::Norm, n, add_layer(LayerKind::Norm, c, c, 1, 1));
        n = add_node(NodeKind::Leaky, n);
        n = add_node(NodeKind::Conv, n, add_layer(LayerKind::Conv, c, c, spec.kernel_size, 1));
        n = add_node(NodeKind::Norm, n, add_layer(LayerKind::Norm, c, c, 1, 1));
        cur = add_node(NodeKind::Leaky, n);
    }

    for (int l = spec.depth - 1; l >= 0; --l) {
        const int c = spec.channels_per_level[l];
        const int deeper_c =
            l == spec.depth - 1 ? spec.channels_per_level[l] : spec.channels_per_level[l + 1];
        const int cat_c = deeper_c + spec.skip_channels[l];

        int up = add_node(NodeKind::Upsample, cur);
        int n = add_node(NodeKind::Concat, up, -1, skip_out[l]);
        n = add_node(NodeKind::Norm, n, add_layer(LayerKind::Norm, cat_c, cat_c, 1, 1));
        n = add_node(NodeKind::Conv, n,
                     add_layer(LayerKind::Conv, cat_c, c, spec.kernel_size, 1));
        n = add_node(NodeKind::Norm, n, add_layer(LayerKind::Norm, c, c, 1, 1));
        n = add_node(NodeKind::Leaky, n);
        n = add_node(NodeKind::Conv, n, add_layer(LayerKind::Conv, c, c, 1, 1));
        n = add_node(NodeKind::Norm, n, add_layer(LayerKind::Norm, c, c, 1, 1));
        cur = add_node(NodeKind::Leaky, n);
    }

    int head = add_node(NodeKind::Conv, cur,
                        add_layer(LayerKind::Conv, spec.channels_per_level[0],
                                  spec.output_channels, 1, 1));
    add_node(NodeKind::Sigmoid, head);
    return plan;
}

void accumulate(ImageTensor& dst, const ImageTensor& src) {
    if (dst.size() == 0) {
        dst = src;
        return;
    }
    auto& d = dst.data();
    const auto& s = src.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

bool finite_all(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

void NetSpec::validate() const {
    if (input_channels < 1) throw std::invalid_argument("net: input_channels must be >= 1");
    if (depth < 1) throw std::invalid_argument("net: depth must be >= 1");
    if (static_cast<int>(channels_per_level.size()) != depth)
        throw std::invalid_argument("net: channels_per_level must have one entry per level");
    if (static_cast<int>(skip_channels.size()) != depth)
        throw std::invalid_argument("net: skip_channels must have one entry per level");
    for (int c : channels_per_level)
        if (c < 1) throw std::invalid_argument("net: channel counts must be >= 1");
    for (int c : skip_channels)
        if (c < 1) throw std::invalid_argument("net: skip channel counts must be >= 1");
    if (output_channels < 1) throw std::invalid_argument("net: output_channels must be >= 1");
    if (kernel_size < 1 || kernel_size % 2 == 0)
        throw std::invalid_argument("net: kernel_size must be odd and >= 1");
    if (!(leaky_slope >= 0.0 && leaky_slope < 1.0))
        throw std::invalid_argument("net: leaky_slope must be in [0, 1)");
    if (!(norm_epsilon > 0.0)) throw std::invalid_argument("net: norm_epsilon must be > 0");
}

NetSpec NetSpec::desk_scale(int output_channels) {
    NetSpec s;
    s.output_channels = output_channels;
    return s;
}

NetSpec NetSpec::full_scale(int output_channels) {
    NetSpec s;
    s.depth = 5;
    s.channels_per_level.assign(5, 128);
    s.skip_channels.assign(5, 4);
    s.output_channels = output_channels;
    return s;
}

bool ParamStore::all_finite() const {
    for (const Layer& l : layers) {
        if (!finite_all(l.weights) || !finite_all(l.bias)) return false;
        if (!finite_all(l.m_w) || !finite_all(l.v_w)) return false;
        if (!finite_all(l.m_b) || !finite_all(l.v_b)) return false;
    }
    return true;
}

std::size_t ParamStore::parameter_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers) n += l.weights.size() + l.bias.size();
    return n;
}

bool Gradients::all_finite() const {
    for (const auto& w : weights)
        if (!finite_all(w)) return false;
    for (const auto& b : bias)
        if (!finite_all(b)) return false;
    return true;
}

ParamStore build_network(const NetSpec& spec, std::uint64_t seed) {
    spec.validate();
    Plan plan = build_plan(spec);
    UniformRng rng(seed);

    ParamStore params;
    params.spec = spec;
    params.version = 1;
    params.layers.reserve(plan.layers.size());
    for (const LayerDesc& d : plan.layers) {
        Layer layer;
        layer.kind = d.kind;
        layer.in_channels = d.in_c;
        layer.out_channels = d.out_c;
        layer.kernel = d.kernel;
        layer.stride = d.stride;
        if (d.kind == LayerKind::Conv) {
            const std::size_t wn = static_cast<std::size_t>(d.out_c) * d.in_c * d.kernel * d.kernel;
            const double bound = 1.0 / std::sqrt(static_cast<double>(d.in_c) * d.kernel * d.kernel);
            layer.weights.resize(wn);
            layer.bias.resize(d.out_c);
            for (double& w : layer.weights) w = rng.in_range(-bound, bound);
            for (double& b : layer.bias) b = rng.in_range(-bound, bound);
        } else {
            layer.weights.assign(d.out_c, 1.0);  // scale
            layer.bias.assign(d.out_c, 0.0);     // shift
        }
        layer.m_w.assign(layer.weights.size(), 0.0);
        layer.v_w.assign(layer.weights.size(), 0.0);
        layer.m_b.assign(layer.bias.size(), 0.0);
        layer.v_b.assign(layer.bias.size(), 0.0);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

ImageTensor make_input(int height, int width, int channels, std::uint64_t seed) {
    if (height < 1 || width < 1 || channels < 1)
        throw std::invalid_argument("make_input: dims must be positive");
    ImageTensor x(height, width, channels);
    UniformRng rng(seed);
    for (double& v : x.data()) v = rng.in_range(0.0, 0.1);
    return x;
}

ForwardResult forward(const ParamStore& params, const ImageTensor& x, bool record) {
    const NetSpec& spec = params.spec;
    if (x.channels() != spec.input_channels)
        throw std::invalid_argument("forward: input channel count does not match the network");
    if (x.height() % spec.alignment() != 0 || x.width() % spec.alignment() != 0)
        throw std::invalid_argument("forward: input dims must be multiples of 2^depth");

    Plan plan = build_plan(spec);
    std::vector<ImageTensor> outputs(plan.nodes.size());
    std::vector<std::vector<double>> means(plan.layers.size());
    std::vector<std::vector<double>> inv_stds(plan.layers.size());

    for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
        const Node& node = plan.nodes[i];
        switch (node.kind) {
            case NodeKind::Input:
                outputs[i] = x;
                break;
            case NodeKind::Conv: {
                const ImageTensor& in = outputs[node.in0];
                const Layer& layer = params.layers[node.layer];
                ImageTensor out(in.height() / layer.stride, in.width() / layer.stride,
                                layer.out_channels);
                kernels::conv2d_forward(in.data().data(), in.channels(), in.height(), in.width(),
                                        layer.weights.data(), layer.bias.data(),
                                        layer.out_channels, layer.kernel, layer.stride,
                                        out.data().data());
                outputs[i] = std::move(out);
                break;
            }
            case NodeKind::Norm: {
                const ImageTensor& in = outputs[node.in0];
                const Layer& layer = params.layers[node.layer];
                ImageTensor out(in.height(), in.width(), in.channels());
                means[node.layer].resize(in.channels());
                inv_stds[node.layer].resize(in.channels());
                kernels::instance_norm_forward(
                    in.data().data(), in.channels(), in.height() * in.width(),
                    layer.weights.data(), layer.bias.data(), spec.norm_epsilon,
                    out.data().data(), means[node.layer].data(), inv_stds[node.layer].data());
                outputs[i] = std::move(out);
                break;
            }
            case NodeKind::Leaky: {
                const ImageTensor& in = outputs[node.in0];
                ImageTensor out(in.height(), in.width(), in.channels());
                kernels::leaky_relu_forward(in.data().data(), in.size(), spec.leaky_slope,
                                            out.data().data());
                outputs[i] = std::move(out);
                break;
            }
            case NodeKind::Upsample: {
                const ImageTensor& in = outputs[node.in0];
                ImageTensor out(in.height() * 2, in.width() * 2, in.channels());
                kernels::upsample2x_forward(in.data().data(), in.channels(), in.height(),
                                            in.width(), out.data().data());
                outputs[i] = std::move(out);
                break;
            }
            case NodeKind::Concat: {
                const ImageTensor& a = outputs[node.in0];
                const ImageTensor& b = outputs[node.in1];
                ImageTensor out(a.height(), a.width(), a.channels() + b.channels());
                std::memcpy(out.data().data(), a.data().data(), a.size() * sizeof(double));
                std::memcpy(out.data().data() + a.size(), b.data().data(),
                            b.size() * sizeof(double));
                outputs[i] = std::move(out);
                break;
            }
            case NodeKind::Sigmoid: {
                const ImageTensor& in = outputs[node.in0];
                ImageTensor out(in.height(), in.width(), in.channels());
                kernels::sigmoid_forward(in.data().data(), in.size(), out.data().data());
                outputs[i] = std::move(out);
                break;
            }
        }
    }

    ForwardResult result;
    result.output = outputs.back();
    if (record) {
        auto tape = std::make_shared<Tape>();
        tape->x = x;
        tape->node_outputs = std::move(outputs);
        tape->norm_mean = std::move(means);
        tape->norm_inv_std = std::move(inv_stds);
        tape->params_version = params.version;
        result.tape = std::move(tape);
    }
    return result;
}

Gradients backward(const ParamStore& params, const Tape& tape,
                   const ImageTensor& loss_grad_at_output) {
    if (tape.params_version != params.version)
        throw std::runtime_error("backward: stale tape (parameters changed since the forward)");
    Plan plan = build_plan(params.spec);
    if (tape.node_outputs.size() != plan.nodes.size())
        throw std::runtime_error("backward: tape does not match the network layout");
    if (!loss_grad_at_output.same_shape(tape.node_outputs.back()))
        throw std::invalid_argument("backward: loss gradient shape mismatch");

    Gradients grads;
    grads.weights.resize(params.layers.size());
    grads.bias.resize(params.layers.size());
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        grads.weights[l].assign(params.layers[l].weights.size(), 0.0);
        grads.bias[l].assign(params.layers[l].bias.size(), 0.0);
    }

    std::vector<ImageTensor> node_grads(plan.nodes.size());
    node_grads.back() = loss_grad_at_output;

    for (int i = static_cast<int>(plan.nodes.size()) - 1; i > 0; --i) {
        const Node& node = plan.nodes[i];
        const ImageTensor& dout = node_grads[i];
        if (dout.size() == 0) continue;  // unreachable in this graph, but cheap to guard
        switch (node.kind) {
            case NodeKind::Input:
                break;
            case NodeKind::Conv: {
                const ImageTensor& in = tape.node_outputs[node.in0];
                const Layer& layer = params.layers[node.layer];
                ImageTensor din(in.height(), in.width(), in.channels());
                kernels::conv2d_backward(in.data().data(), in.channels(), in.height(), in.width(),
                                         layer.weights.data(), layer.out_channels, layer.kernel,
                                         layer.stride, dout.data().data(), din.data().data(),
                                         grads.weights[node.layer].data(),
                                         grads.bias[node.layer].data());
                accumulate(node_grads[node.in0], din);
                break;
            }
            case NodeKind::Norm: {
                const ImageTensor& in = tape.node_outputs[node.in0];
                const Layer& layer = params.layers[node.layer];
                ImageTensor din(in.height(), in.width(), in.channels());
                kernels::instance_norm_backward(
                    in.data().data(), tape.norm_mean[node.layer].data(),
                    tape.norm_inv_std[node.layer].data(), layer.weights.data(),
                    dout.data().data(), in.channels(), in.height() * in.width(),
                    din.data().data(), grads.weights[node.layer].data(),
                    grads.bias[node.layer].data());
                accumulate(node_grads[node.in0], din);
                break;
            }
            case NodeKind::Leaky: {
                const ImageTensor& in = tape.node_outputs[node.in0];
                ImageTensor din(in.height(), in.width(), in.channels());
                kernels::leaky_relu_backward(in.data().data(), dout.data().data(), in.size(),
                                             params.spec.leaky_slope, din.data().data());
                accumulate(node_grads[node.in0], din);
                break;
            }
            case NodeKind::Upsample: {
                const ImageTensor& in = tape.node_outputs[node.in0];
                ImageTensor din(in.height(), in.width(), in.channels());
                kernels::upsample2x_backward(dout.data().data(), in.channels(), in.height(),
                                             in.width(), din.data().data());
                accumulate(node_grads[node.in0], din);
                break;
            }
            case NodeKind::Concat: {
                const ImageTensor& a = tape.node_outputs[node.in0];
                const ImageTensor& b = tape.node_outputs[node.in1];
                ImageTensor da(a.height(), a.width(), a.channels());
                ImageTensor db(b.height(), b.width(), b.channels());
                std::memcpy(da.data().data(), dout.data().data(), a.size() * sizeof(double));
                std::memcpy(db.data().data(), dout.data().data() + a.size(),
                            b.size() * sizeof(double));
                accumulate(node_grads[node.in0], da);
                accumulate(node_grads[node.in1], db);
                break;
            }
            case NodeKind::Sigmoid: {
                const ImageTensor& out = tape.node_outputs[i];
                ImageTensor din(out.height(), out.width(), out.channels());
                kernels::sigmoid_backward(out.data().data(), dout.data().data(), out.size(),
                                          din.data().data());
                accumulate(node_grads[node.in0], din);
                break;
            }
        }
        node_grads[i] = ImageTensor();  // free as we go
    }
    return grads;
}

ObjectiveEval theta_objective(const ImageTensor& f, const ImageTensor& v, const ImageTensor& w,
                              double beta, const ImageTensor& output) {
    if (!f.same_shape(v) || !f.same_shape(w) || !f.same_shape(output))
        throw std::invalid_argument("theta_objective: shape mismatch");
    if (!(beta > 0.0)) throw std::invalid_argument("theta_objective: beta must be > 0");

    ObjectiveEval eval;
    eval.output_grad = ImageTensor(f.height(), f.width(), f.channels());
    const auto& fd = f.data();
    const auto& vd = v.data();
    const auto& wd = w.data();
    const auto& gd = output.data();
    auto& grad = eval.output_grad.data();
    double value = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) {
        const double fit = fd[i] - gd[i];
        const double gap = vd[i] - gd[i] + wd[i] / beta;
        value += fit * fit + 0.5 * beta * gap * gap;
        grad[i] = -2.0 * fit - beta * gap;
    }
    eval.value = value;
    return eval;
}

void adam_step(ParamStore& params, const Gradients& grads, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("adam_step: alpha must be > 0");
    if (grads.weights.size() != params.layers.size() || grads.bias.size() != params.layers.size())
        throw std::invalid_argument("adam_step: gradient layout does not match parameters");
    if (!grads.all_finite()) throw std::runtime_error("adam_step: non-finite gradients");

    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    const long t = ++params.step_count;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));

    auto update = [&](std::vector<double>& w, std::vector<double>& m, std::vector<double>& v,
                      const std::vector<double>& g) {
        if (g.size() != w.size())
            throw std::invalid_argument("adam_step: gradient shape mismatch");
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
            v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
            w[i] -= alpha * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kEps);
        }
    };
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        update(params.layers[l].weights, params.layers[l].m_w, params.layers[l].v_w,
               grads.weights[l]);
        update(params.layers[l].bias, params.layers[l].m_b, params.layers[l].v_b, grads.bias[l]);
    }
    ++params.version;
    if (!params.all_finite()) throw std::runtime_error("adam_step: non-finite parameters");
}

std::vector<double> solve_theta_subproblem(ParamStore& params, const ImageTensor& x,
                                           const ImageTensor& f, const ImageTensor& v,
                                           const ImageTensor& w, double beta, double alpha,
                                           int k_steps) {
    if (k_steps < 1) throw std::invalid_argument("solve_theta_subproblem: need k_steps >= 1");
    std::vector<double> trace;
    trace.reserve(k_steps);
    for (int k = 0; k < k_steps; ++k) {
        ForwardResult fwd = forward(params, x, true);
        ObjectiveEval eval = theta_objective(f, v, w, beta, fwd.output);
        if (!std::isfinite(eval.value))
            throw std::runtime_error("solve_theta_subproblem: non-finite objective");
        trace.push_back(eval.value);
        Gradients grads = backward(params, *fwd.tape, eval.output_grad);
        adam_step(params, grads, alpha);
    }
    return trace;
}

namespace {

constexpr char kMagic[8] = {'D', 'I', 'P', 'L', '0', 'C', 'K', 'P'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

void put_i32(std::ostream& os, std::int32_t v) { put_u32(os, static_cast<std::uint32_t>(v)); }

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

void put_array(std::ostream& os, const std::vector<double>& a) {
    put_u64(os, a.size());
    for (double v : a) put_f64(os, v);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

std::int32_t get_i32(std::istream& is) { return static_cast<std::int32_t>(get_u32(is)); }

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

std::vector<double> get_array(std::istream& is, std::size_t expected) {
    const std::uint64_t n = get_u64(is);
    if (n != expected) throw std::runtime_error("checkpoint: array length mismatch");
    std::vector<double> a(n);
    for (double& v : a) v = get_f64(is);
    return a;
}

}  // namespace

void save_checkpoint(const ParamStore& params, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    os.write(kMagic, 8);
    put_u32(os, kCheckpointVersion);

    const NetSpec& s = params.spec;
    put_i32(os, s.input_channels);
    put_i32(os, s.depth);
    for (int c : s.channels_per_level) put_i32(os, c);
    for (int c : s.skip_channels) put_i32(os, c);
    put_i32(os, s.output_channels);
    put_i32(os, s.kernel_size);
    put_f64(os, s.leaky_slope);
    put_f64(os, s.norm_epsilon);

    put_u64(os, static_cast<std::uint64_t>(params.step_count));
    put_u64(os, params.version);
    put_u32(os, static_cast<std::uint32_t>(params.layers.size()));
    for (const Layer& l : params.layers) {
        put_u32(os, l.kind == LayerKind::Conv ? 0u : 1u);
        put_i32(os, l.in_channels);
        put_i32(os, l.out_channels);
        put_i32(os, l.kernel);
        put_i32(os, l.stride);
        put_array(os, l.weights);
        put_array(os, l.bias);
        put_array(os, l.m_w);
        put_array(os, l.v_w);
        put_array(os, l.m_b);
        put_array(os, l.v_b);
    }
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

ParamStore load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    if (get_u32(is) != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version in " + path);

    NetSpec s;
    s.input_channels = get_i32(is);
    s.depth = get_i32(is);
    if (s.depth < 1 || s.depth > 16) throw std::runtime_error("checkpoint: corrupt depth");
    s.channels_per_level.resize(s.depth);
    for (int& c : s.channels_per_level) c = get_i32(is);
    s.skip_channels.resize(s.depth);
    for (int& c : s.skip_channels) c = get_i32(is);
    s.output_channels = get_i32(is);
    s.kernel_size = get_i32(is);
    s.leaky_slope = get_f64(is);
    s.norm_epsilon = get_f64(is);
    s.validate();

    ParamStore params;
    params.spec = s;
    params.step_count = static_cast<long>(get_u64(is));
    params.version = get_u64(is);

    Plan plan = build_plan(s);
    const std::uint32_t layer_count = get_u32(is);
    if (layer_count != plan.layers.size())
        throw std::runtime_error("checkpoint: layer count does not match the architecture");
    params.layers.reserve(layer_count);
    for (const LayerDesc& d : plan.layers) {
        Layer l;
        const std::uint32_t kind = get_u32(is);
        l.kind = kind == 0 ? LayerKind::Conv : LayerKind::Norm;
        l.in_channels = get_i32(is);
        l.out_channels = get_i32(is);
        l.kernel = get_i32(is);
        l.stride = get_i32(is);
        if (l.kind != d.kind || l.in_channels != d.in_c || l.out_channels != d.out_c ||
            l.kernel != d.kernel || l.stride != d.stride)
            throw std::runtime_error("checkpoint: layer shape does not match the architecture");
        const std::size_t wn =
            d.kind == LayerKind::Conv
                ? static_cast<std::size_t>(d.out_c) * d.in_c * d.kernel * d.kernel
                : static_cast<std::size_t>(d.out_c);
        const std::size_t bn = static_cast<std::size_t>(d.out_c);
        l.weights = get_array(is, wn);
        l.bias = get_array(is, bn);
        l.m_w = get_array(is, wn);
        l.v_w = get_array(is, wn);
        l.m_b = get_array(is, bn);
        l.v_b = get_array(is, bn);
        params.layers.push_back(std::move(l));
    }
    if (!is) throw std::runtime_error("checkpoint: truncated file " + path);
    return params;
}

}  // namespace dipl0
