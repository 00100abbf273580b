// dipl0: edge-preserving smoothing by training an untrained encoder-decoder
// under a gradient-count penalty. Subcommands: smooth, l0, metrics, sweep,
// demo. Deterministic by default; set DIPL0_PARALLEL=1 to enable the
// parallel kernels.
#include "dipl0/admm.hpp"
#include "dipl0/image.hpp"
#include "dipl0/io.hpp"
#include "dipl0/metrics.hpp"
#include "dipl0/net.hpp"
#include "dipl0/region_fusion.hpp"
#include "dipl0/report.hpp"
#include "dipl0/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using dipl0::ImageTensor;
using dipl0::RunConfig;

dipl0::Seeds seeds_from(std::uint64_t base) { return {base, base + 1, base + 2}; }

void apply_json_config(const std::string& path, RunConfig& cfg, std::uint64_t& seed) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file " + path);
    const nlohmann::json j = nlohmann::json::parse(is);

    auto get_double = [&](const char* key, double& out) {
        if (j.contains(key)) out = j.at(key).get<double>();
    };
    auto get_int = [&](const char* key, int& out) {
        if (j.contains(key)) out = j.at(key).get<int>();
    };
    get_double("lambda", cfg.lambda);
    get_double("beta", cfg.beta);
    get_double("gamma", cfg.gamma);
    get_int("T", cfg.T);
    get_int("K", cfg.K);
    get_double("alpha", cfg.alpha);
    get_int("ramp_steps", cfg.ramp_steps);
    get_double("epsilon", cfg.epsilon);
    if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();

    if (j.contains("net")) {
        const nlohmann::json& n = j.at("net");
        if (n.contains("scale")) {
            const std::string s = n.at("scale").get<std::string>();
            if (s == "desk")
                cfg.net = dipl0::NetSpec::desk_scale(cfg.net.output_channels);
            else if (s == "full")
                cfg.net = dipl0::NetSpec::full_scale(cfg.net.output_channels);
            else
                throw std::runtime_error("config: net.scale must be 'desk' or 'full'");
        }
        if (n.contains("input_channels"))
            cfg.net.input_channels = n.at("input_channels").get<int>();
        if (n.contains("depth")) cfg.net.depth = n.at("depth").get<int>();
        if (n.contains("channels"))
            cfg.net.channels_per_level = n.at("channels").get<std::vector<int>>();
        if (n.contains("skip_channels"))
            cfg.net.skip_channels = n.at("skip_channels").get<std::vector<int>>();
        if (n.contains("kernel_size")) cfg.net.kernel_size = n.at("kernel_size").get<int>();
        if (n.contains("leaky_slope")) cfg.net.leaky_slope = n.at("leaky_slope").get<double>();
        if (n.contains("norm_epsilon")) cfg.net.norm_epsilon = n.at("norm_epsilon").get<double>();
    }
}

// Shared solver flags. Precedence: command line > config file > defaults.
struct SolverFlags {
    double lambda = 0, beta = 0, gamma = 0, alpha = 0, epsilon = 0;
    int T = 0, K = 0, ramp_steps = 0;
    std::uint64_t seed = 1;
    std::string config, net_scale;
    CLI::Option *o_lambda = nullptr, *o_beta = nullptr, *o_gamma = nullptr, *o_alpha = nullptr,
                *o_epsilon = nullptr, *o_T = nullptr, *o_K = nullptr, *o_ramp = nullptr,
                *o_seed = nullptr, *o_scale = nullptr;

    void add_to(CLI::App* cmd) {
        o_lambda = cmd->add_option("--lambda", lambda, "Gradient-count weight (default 0.025)");
        o_beta = cmd->add_option("--beta", beta, "Penalty parameter (default 2.25)");
        o_gamma = cmd->add_option("--gamma", gamma, "Output averaging factor (default 0.9)");
        o_T = cmd->add_option("-T,--iterations", T, "Outer iterations (default 100)");
        o_K = cmd->add_option("-K,--adam-steps", K, "Adam steps per outer iteration (default 25)");
        o_alpha = cmd->add_option("--alpha", alpha, "Adam learning rate (default 1e-3)");
        o_seed = cmd->add_option("--seed", seed,
                                 "Base seed; weights/input/v0w0 draw from seed, seed+1, seed+2");
        o_ramp = cmd->add_option("--ramp-steps", ramp_steps,
                                 "Fusion coefficient ramp passes (default 100)");
        o_epsilon = cmd->add_option("--epsilon", epsilon,
                                    "Nonzero-gradient threshold (default 1e-12)");
        cmd->add_option("--config", config, "JSON config file; flags given here override it");
        o_scale = cmd->add_option("--net-scale", net_scale, "Network size: desk (default) or full")
                      ->check(CLI::IsMember({"desk", "full"}));
    }

    RunConfig merge() const {
        RunConfig cfg;  // built-in defaults
        std::uint64_t base_seed = 1;
        if (!config.empty()) apply_json_config(config, cfg, base_seed);
        if (o_scale->count()) {
            cfg.net = net_scale == "full" ? dipl0::NetSpec::full_scale()
                                          : dipl0::NetSpec::desk_scale();
        }
        if (o_lambda->count()) cfg.lambda = lambda;
        if (o_beta->count()) cfg.beta = beta;
        if (o_gamma->count()) cfg.gamma = gamma;
        if (o_T->count()) cfg.T = T;
        if (o_K->count()) cfg.K = K;
        if (o_alpha->count()) cfg.alpha = alpha;
        if (o_ramp->count()) cfg.ramp_steps = ramp_steps;
        if (o_epsilon->count()) cfg.epsilon = epsilon;
        if (o_seed->count()) base_seed = seed;
        cfg.seeds = seeds_from(base_seed);
        return cfg;
    }
};

void print_progress(const dipl0::IterationRecord& rec, int total) {
    std::fprintf(stderr, "  t=%d/%d loss_u=%.6g l0_u=%ld dual=%.4g", rec.t, total, rec.loss_u,
                 rec.l0_u, rec.dual_residual);
    if (rec.psnr_ref) std::fprintf(stderr, " psnr=%.3f", *rec.psnr_ref);
    std::fprintf(stderr, "\n");
}

std::string default_report_path(const std::string& out) { return out + ".report.txt"; }

int cmd_smooth(const SolverFlags& flags, const std::string& input, const std::string& reference,
               const std::string& out, std::string report_path, const std::string& checkpoint,
               bool quiet) {
    RunConfig cfg = flags.merge();
    dipl0::LoadedImage loaded = dipl0::load_image(input, cfg.net.alignment());
    cfg.net.output_channels = loaded.image.channels();

    std::optional<ImageTensor> ref;
    if (!reference.empty()) {
        dipl0::LoadedImage r = dipl0::load_image(reference, cfg.net.alignment());
        if (!r.image.same_shape(loaded.image))
            throw std::runtime_error("reference image shape does not match the input");
        ref = std::move(r.image);
    }

    auto progress = [&](const dipl0::IterationRecord& rec) {
        if (!quiet) print_progress(rec, cfg.T);
    };
    dipl0::RunResult res = dipl0::run(loaded.image, cfg, ref ? &*ref : nullptr, progress);

    const ImageTensor out_img =
        dipl0::crop(res.u, loaded.original_height, loaded.original_width);
    dipl0::save_image(out_img, out);
    if (!checkpoint.empty()) dipl0::save_checkpoint(res.theta, checkpoint);

    dipl0::RunReport report;
    report.config = cfg;
    report.input_path = input;
    report.reference_path = reference;
    report.output_path = out;
    report.input_height = loaded.original_height;
    report.input_width = loaded.original_width;
    report.input_channels = loaded.image.channels();
    report.history = res.history;
    report.wall_theta_s = res.wall_theta_s;
    report.wall_v_s = res.wall_v_s;
    report.wall_total_s = res.wall_total_s;
    if (report_path.empty()) report_path = default_report_path(out);
    dipl0::write_report(report, report_path);

    std::printf("output=%s\n", out.c_str());
    std::printf("report=%s\n", report_path.c_str());
    if (!res.history.empty()) {
        const dipl0::IterationRecord& last = res.history.back();
        std::printf("final_loss_u=%.10g\n", last.loss_u);
        std::printf("final_l0_u=%ld\n", last.l0_u);
        if (last.psnr_ref) std::printf("final_psnr_db=%.6f\n", *last.psnr_ref);
        if (last.ssim_ref) std::printf("final_ssim=%.6f\n", *last.ssim_ref);
    }
    std::printf("wall_total_s=%.3f\n", res.wall_total_s);
    return 0;
}

int cmd_l0(const std::string& input, double lambda, int ramp_steps, const std::string& out) {
    dipl0::FusionConfig fc{lambda, ramp_steps, 1e-12};
    fc.validate();
    dipl0::LoadedImage loaded = dipl0::load_image(input, 1);
    const ImageTensor v = dipl0::solve_prox(loaded.image, fc);
    dipl0::save_image(v, out);
    std::printf("l0_before=%ld\n", dipl0::l0_gradient_count(loaded.image));
    std::printf("l0_after=%ld\n", dipl0::l0_gradient_count(v));
    std::printf("output=%s\n", out.c_str());
    return 0;
}

int cmd_metrics(const std::string& a_path, const std::string& b_path) {
    const ImageTensor a = dipl0::load_image(a_path, 1).image;
    const ImageTensor b = dipl0::load_image(b_path, 1).image;
    const dipl0::MetricReport m = dipl0::compare(a, b);
    std::printf("psnr_db=%.10g\n", m.psnr);
    std::printf("ssim=%.10g\n", m.ssim);
    for (std::size_t c = 0; c < m.ssim_per_channel.size(); ++c)
        std::printf("ssim_channel_%zu=%.10g\n", c, m.ssim_per_channel[c]);
    return 0;
}

std::vector<double> parse_values(const std::string& csv, const char* what) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw std::runtime_error(std::string("empty value list for ") + what);
    return out;
}

int cmd_sweep(const SolverFlags& flags, const std::string& input, const std::string& reference,
              const std::string& out_table, const std::string& lambda_csv,
              const std::string& beta_csv, const std::string& t_csv,
              const std::string& alpha_csv, int threads, bool quiet) {
    const RunConfig base = flags.merge();
    const std::vector<double> lambdas = parse_values(lambda_csv, "--lambda-values");
    const std::vector<double> betas = parse_values(beta_csv, "--beta-values");
    const std::vector<double> alphas = parse_values(alpha_csv, "--alpha-values");
    const std::vector<double> ts = parse_values(t_csv, "--T-values");
    int t_max = 0;
    for (double t : ts) {
        if (t < 1 || t != static_cast<int>(t)) throw std::runtime_error("--T-values must be positive integers");
        t_max = std::max(t_max, static_cast<int>(t));
    }

    dipl0::LoadedImage loaded = dipl0::load_image(input, base.net.alignment());
    dipl0::LoadedImage ref = dipl0::load_image(reference, base.net.alignment());
    if (!ref.image.same_shape(loaded.image))
        throw std::runtime_error("reference image shape does not match the input");

    struct Job {
        std::string param;
        double value;
        RunConfig cfg;
    };
    std::vector<Job> jobs;
    auto with = [&](auto set) {
        RunConfig cfg = base;
        cfg.net.output_channels = loaded.image.channels();
        set(cfg);
        return cfg;
    };
    for (double v : lambdas)
        jobs.push_back({"lambda", v, with([&](RunConfig& c) { c.lambda = v; })});
    for (double v : betas) jobs.push_back({"beta", v, with([&](RunConfig& c) { c.beta = v; })});
    for (double v : alphas)
        jobs.push_back({"alpha", v, with([&](RunConfig& c) { c.alpha = v; })});
    // One run at the largest T covers every T row via its history.
    jobs.push_back({"T", static_cast<double>(t_max),
                    with([&](RunConfig& c) { c.T = t_max; })});

    std::vector<dipl0::RunResult> results(jobs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size() || failed.load()) return;
            try {
                results[i] = dipl0::run(loaded.image, jobs[i].cfg, &ref.image);
                if (!quiet)
                    std::fprintf(stderr, "  finished %s=%g\n", jobs[i].param.c_str(),
                                 jobs[i].value);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) first_error = e.what();
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
    if (failed.load()) throw std::runtime_error("sweep run failed: " + first_error);

    std::ostringstream table;
    table << "param\tvalue\tpsnr_db\tssim\tloss_u\tl0_u\twall_total_s\n";
    auto emit = [&](const std::string& param, double value, const dipl0::IterationRecord& rec,
                    double wall) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s\t%.10g\t%.6f\t%.6f\t%.10g\t%ld\t", param.c_str(),
                      value, rec.psnr_ref.value_or(0.0), rec.ssim_ref.value_or(0.0), rec.loss_u,
                      rec.l0_u);
        table << buf;
        if (wall >= 0) {
            std::snprintf(buf, sizeof buf, "%.3f", wall);
            table << buf;
        } else {
            table << "-";
        }
        table << '\n';
    };
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (jobs[i].param == "T") {
            for (double tv : ts) {
                const auto& rec = results[i].history[static_cast<std::size_t>(tv) - 1];
                emit("T", tv, rec,
                     static_cast<int>(tv) == t_max ? results[i].wall_total_s : -1.0);
            }
        } else {
            emit(jobs[i].param, jobs[i].value, results[i].history.back(),
                 results[i].wall_total_s);
        }
    }

    std::ofstream os(out_table, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + out_table + " for writing");
    os << table.str();
    std::fputs(table.str().c_str(), stdout);
    return 0;
}

int cmd_demo(const SolverFlags& flags, int size, const std::string& out_dir, bool quiet) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    // One base seed drives both the synthetic pair and the run.
    const std::uint64_t seed = flags.o_seed->count() ? flags.seed : 7;
    dipl0::SyntheticSpec spec = dipl0::SyntheticSpec::reference_instance();
    spec.size = size;
    spec.seed = seed;
    const dipl0::SyntheticPair pair = dipl0::gen_synthetic(spec);

    const std::string clean_path = (fs::path(out_dir) / "clean.png").string();
    const std::string corrupted_path = (fs::path(out_dir) / "corrupted.png").string();
    const std::string smoothed_path = (fs::path(out_dir) / "smoothed.png").string();
    const std::string report_path = (fs::path(out_dir) / "report.txt").string();
    dipl0::save_image(pair.clean, clean_path);
    dipl0::save_image(pair.corrupted, corrupted_path);

    RunConfig cfg = flags.merge();
    if (!flags.o_T->count()) cfg.T = 20;  // keep the demo minutes, not hours
    cfg.seeds = seeds_from(seed);
    cfg.net.output_channels = pair.corrupted.channels();

    const ImageTensor f = dipl0::pad_to_alignment(pair.corrupted, cfg.net.alignment());
    const ImageTensor ref = dipl0::pad_to_alignment(pair.clean, cfg.net.alignment());
    auto progress = [&](const dipl0::IterationRecord& rec) {
        if (!quiet) print_progress(rec, cfg.T);
    };
    dipl0::RunResult res = dipl0::run(f, cfg, &ref, progress);
    const ImageTensor smoothed = dipl0::crop(res.u, size, size);
    dipl0::save_image(smoothed, smoothed_path);

    dipl0::RunReport report;
    report.config = cfg;
    report.input_path = corrupted_path;
    report.reference_path = clean_path;
    report.output_path = smoothed_path;
    report.input_height = size;
    report.input_width = size;
    report.input_channels = pair.corrupted.channels();
    report.history = res.history;
    report.wall_theta_s = res.wall_theta_s;
    report.wall_v_s = res.wall_v_s;
    report.wall_total_s = res.wall_total_s;
    dipl0::write_report(report, report_path);

    // l0 counts on the 8-bit artifacts, the counts a viewer of the PNGs sees.
    const ImageTensor q_corrupted = dipl0::quantized_view(pair.corrupted);
    const ImageTensor q_smoothed = dipl0::quantized_view(smoothed);
    std::printf("dir=%s\n", out_dir.c_str());
    std::printf("psnr_corrupted_db=%.6f\n", dipl0::psnr(pair.corrupted, pair.clean));
    std::printf("psnr_smoothed_db=%.6f\n", dipl0::psnr(smoothed, pair.clean));
    std::printf("ssim_corrupted=%.6f\n", dipl0::ssim(pair.corrupted, pair.clean));
    std::printf("ssim_smoothed=%.6f\n", dipl0::ssim(smoothed, pair.clean));
    std::printf("l0_corrupted_8bit=%ld\n", dipl0::l0_gradient_count(q_corrupted));
    std::printf("l0_smoothed_8bit=%ld\n", dipl0::l0_gradient_count(q_smoothed));
    std::printf("wall_total_s=%.3f\n", res.wall_total_s);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dipl0: edge-preserving image smoothing via a gradient-count penalty"};
    app.require_subcommand(1);

    // smooth
    auto* sm = app.add_subcommand("smooth", "Smooth an image with the full pipeline");
    std::string sm_input, sm_reference, sm_out, sm_report, sm_checkpoint;
    bool sm_quiet = false;
    SolverFlags sm_flags;
    sm->add_option("--input", sm_input, "Input PNG or JPEG")->required();
    sm->add_option("--reference", sm_reference, "Clean reference to track psnr/ssim against");
    sm->add_option("--out", sm_out, "Output PNG")->required();
    sm->add_option("--report", sm_report, "Report path (default <out>.report.txt)");
    sm->add_option("--save-checkpoint", sm_checkpoint, "Write the final network weights here");
    sm->add_flag("--quiet", sm_quiet, "No per-iteration progress on stderr");
    sm_flags.add_to(sm);

    // l0
    auto* l0 = app.add_subcommand("l0", "Apply the gradient-count prox directly to an image");
    std::string l0_input, l0_out;
    double l0_lambda = 0.02;
    int l0_ramp = 100;
    l0->add_option("--input", l0_input, "Input PNG or JPEG")->required();
    l0->add_option("--lambda", l0_lambda, "Coefficient on the gradient count (default 0.02)");
    l0->add_option("--ramp-steps", l0_ramp, "Fusion coefficient ramp passes (default 100)");
    l0->add_option("--out", l0_out, "Output PNG")->required();

    // metrics
    auto* mt = app.add_subcommand("metrics", "Print PSNR/SSIM of two images");
    std::string mt_a, mt_b;
    mt->add_option("--a", mt_a, "First image")->required();
    mt->add_option("--b", mt_b, "Second image")->required();

    // sweep
    auto* sw = app.add_subcommand(
        "sweep", "One-at-a-time parameter sweep; each row varies one parameter from the base");
    std::string sw_input, sw_reference, sw_table;
    std::string sw_lambdas = "0.025,0.05,0.075";
    std::string sw_betas = "1.5,1.75,2.0,2.25";
    std::string sw_ts = "100,200,300";
    std::string sw_alphas = "1e-3,1e-4,1e-5";
    int sw_threads = 1;
    bool sw_quiet = false;
    SolverFlags sw_flags;
    sw->add_option("--input", sw_input, "Input PNG or JPEG")->required();
    sw->add_option("--reference", sw_reference, "Clean reference (required for the table)")
        ->required();
    sw->add_option("--out-table", sw_table, "Where to write the TSV table")->required();
    sw->add_option("--lambda-values", sw_lambdas, "default 0.025,0.05,0.075");
    sw->add_option("--beta-values", sw_betas, "default 1.5,1.75,2.0,2.25");
    sw->add_option("--T-values", sw_ts, "default 100,200,300");
    sw->add_option("--alpha-values", sw_alphas, "default 1e-3,1e-4,1e-5");
    sw->add_option("--threads", sw_threads, "Concurrent runs (default 1)");
    sw->add_flag("--quiet", sw_quiet, "No progress on stderr");
    sw_flags.add_to(sw);

    // demo
    auto* dm = app.add_subcommand("demo", "Generate a synthetic pair and run the pipeline");
    int dm_size = 64;
    std::string dm_dir;
    bool dm_quiet = false;
    SolverFlags dm_flags;
    dm->add_option("--size", dm_size, "Square image size (default 64)");
    dm->add_option("--out-dir", dm_dir, "Output directory")->required();
    dm->add_flag("--quiet", dm_quiet, "No progress on stderr");
    dm_flags.add_to(dm);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sm->parsed())
            return cmd_smooth(sm_flags, sm_input, sm_reference, sm_out, sm_report, sm_checkpoint,
                              sm_quiet);
        if (l0->parsed()) return cmd_l0(l0_input, l0_lambda, l0_ramp, l0_out);
        if (mt->parsed()) return cmd_metrics(mt_a, mt_b);
        if (sw->parsed())
            return cmd_sweep(sw_flags, sw_input, sw_reference, sw_table, sw_lambdas, sw_betas,
                             sw_ts, sw_alphas, sw_threads, sw_quiet);
        if (dm->parsed()) return cmd_demo(dm_flags, dm_size, dm_dir, dm_quiet);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
