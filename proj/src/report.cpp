#include "dipl0/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dipl0 {

namespace {

constexpr const char* kHeader = "# dipl0 run report v1";
constexpr const char* kColumns =
    "t\tloss_u\tloss_output\tfidelity_u\tl0_u\tl0_output\tl0_v\tdual_residual\t"
    "prox_obj_target\tprox_obj_v\ttheta_obj_first\ttheta_obj_last\tpsnr_ref\tssim_ref";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "-"; }

std::string join_csv(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

std::vector<int> split_csv(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw std::runtime_error("report: bad number '" + s + "'");
    return v;
}

std::optional<double> parse_opt(const std::string& s) {
    if (s == "-") return std::nullopt;
    return parse_double(s);
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return out;
}

} // namespace

std::string to_text(const RunReport& r) {
    std::ostringstream os;
    os << kHeader << '\n';
    const RunConfig& c = r.config;
    os << "lambda=" << fmt(c.lambda) << '\n'
       << "beta=" << fmt(c.beta) << '\n'
       << "gamma=" << fmt(c.gamma) << '\n'
       << "T=" << c.T << '\n'
       << "K=" << c.K << '\n'
       << "alpha=" << fmt(c.alpha) << '\n'
       << "seed_weights=" << c.seeds.weights << '\n'
       << "seed_input=" << c.seeds.input << '\n'
       << "seed_v0w0=" << c.seeds.v0w0 << '\n'
       << "ramp_steps=" << c.ramp_steps << '\n'
       << "epsilon=" << fmt(c.epsilon) << '\n'
       << "net_input_channels=" << c.net.input_channels << '\n'
       << "net_depth=" << c.net.depth << '\n'
       << "net_channels=" << join_csv(c.net.channels_per_level) << '\n'
       << "net_skip_channels=" << join_csv(c.net.skip_channels) << '\n'
       << "net_output_channels=" << c.net.output_channels << '\n'
       << "net_kernel_size=" << c.net.kernel_size << '\n'
       << "net_leaky_slope=" << fmt(c.net.leaky_slope) << '\n'
       << "net_norm_epsilon=" << fmt(c.net.norm_epsilon) << '\n'
       << "input=" << r.input_path << '\n'
       << "reference=" << r.reference_path << '\n'
       << "output=" << r.output_path << '\n'
       << "input_height=" << r.input_height << '\n'
       << "input_width=" << r.input_width << '\n'
       << "input_channels=" << r.input_channels << '\n'
       << "wall_theta_s=" << fmt(r.wall_theta_s) << '\n'
       << "wall_v_s=" << fmt(r.wall_v_s) << '\n'
       << "wall_total_s=" << fmt(r.wall_total_s) << '\n'
       << "history=" << r.history.size() << '\n'
       << kColumns << '\n';
    for (const IterationRecord& rec : r.history) {
        os << rec.t << '\t' << fmt(rec.loss_u) << '\t' << fmt(rec.loss_output) << '\t'
           << fmt(rec.fidelity_u) << '\t' << rec.l0_u << '\t' << rec.l0_output << '\t'
           << rec.l0_v << '\t' << fmt(rec.dual_residual) << '\t' << fmt(rec.prox_obj_target)
           << '\t' << fmt(rec.prox_obj_v) << '\t' << fmt(rec.theta_obj_first) << '\t'
           << fmt(rec.theta_obj_last) << '\t' << fmt(rec.psnr_ref) << '\t' << fmt(rec.ssim_ref)
           << '\n';
    }
    return os.str();
}

RunReport parse_report(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != kHeader)
        throw std::runtime_error("report: missing header line");

    std::map<std::string, std::string> kv;
    long history_rows = -1;
    while (std::getline(is, line)) {
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("report: expected key=value, got '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "history") {
            history_rows = std::stol(value);
            break;
        }
        kv[key] = value;
    }
    if (history_rows < 0) throw std::runtime_error("report: missing history section");

    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end())
            throw std::runtime_error(std::string("report: missing key ") + key);
        return it->second;
    };

    RunReport r;
    RunConfig& c = r.config;
    c.lambda = parse_double(need("lambda"));
    c.beta = parse_double(need("beta"));
    c.gamma = parse_double(need("gamma"));
    c.T = std::stoi(need("T"));
    c.K = std::stoi(need("K"));
    c.alpha = parse_double(need("alpha"));
    c.seeds.weights = std::stoull(need("seed_weights"));
    c.seeds.input = std::stoull(need("seed_input"));
    c.seeds.v0w0 = std::stoull(need("seed_v0w0"));
    c.ramp_steps = std::stoi(need("ramp_steps"));
    c.epsilon = parse_double(need("epsilon"));
    c.net.input_channels = std::stoi(need("net_input_channels"));
    c.net.depth = std::stoi(need("net_depth"));
    c.net.channels_per_level = split_csv(need("net_channels"));
    c.net.skip_channels = split_csv(need("net_skip_channels"));
    c.net.output_channels = std::stoi(need("net_output_channels"));
    c.net.kernel_size = std::stoi(need("net_kernel_size"));
    c.net.leaky_slope = parse_double(need("net_leaky_slope"));
    c.net.norm_epsilon = parse_double(need("net_norm_epsilon"));
    r.input_path = need("input");
    r.reference_path = need("reference");
    r.output_path = need("output");
    r.input_height = std::stoi(need("input_height"));
    r.input_width = std::stoi(need("input_width"));
    r.input_channels = std::stoi(need("input_channels"));
    r.wall_theta_s = parse_double(need("wall_theta_s"));
    r.wall_v_s = parse_double(need("wall_v_s"));
    r.wall_total_s = parse_double(need("wall_total_s"));

    if (!std::getline(is, line) || line != kColumns)
        throw std::runtime_error("report: bad history column header");
    r.history.reserve(history_rows);
    for (long i = 0; i < history_rows; ++i) {
        if (!std::getline(is, line)) throw std::runtime_error("report: truncated history");
        const std::vector<std::string> f = split_tabs(line);
        if (f.size() != 14) throw std::runtime_error("report: bad history row");
        IterationRecord rec;
        rec.t = std::stoi(f[0]);
        rec.loss_u = parse_double(f[1]);
        rec.loss_output = parse_double(f[2]);
        rec.fidelity_u = parse_double(f[3]);
        rec.l0_u = std::stol(f[4]);
        rec.l0_output = std::stol(f[5]);
        rec.l0_v = std::stol(f[6]);
        rec.dual_residual = parse_double(f[7]);
        rec.prox_obj_target = parse_double(f[8]);
        rec.prox_obj_v = parse_double(f[9]);
        rec.theta_obj_first = parse_double(f[10]);
        rec.theta_obj_last = parse_double(f[11]);
        rec.psnr_ref = parse_opt(f[12]);
        rec.ssim_ref = parse_opt(f[13]);
        r.history.push_back(rec);
    }
    return r;
}

void write_report(const RunReport& report, const std::string& path) {
    std::ofstream os(path, std::ios::binary); // binary: no newline translation
    if (!os) throw std::runtime_error("report: cannot open " + path + " for writing");
    os << to_text(report);
    if (!os) throw std::runtime_error("report: write failed for " + path);
}

RunReport read_report(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("report: cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_report(ss.str());
}

} // namespace dipl0
