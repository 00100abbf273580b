#include "dipl0/region_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dipl0 {

void FusionConfig::validate() const {
    if (!(lambda_eff >= 0.0) || !std::isfinite(lambda_eff)) {
        throw std::invalid_argument("FusionConfig: lambda_eff must be finite and >= 0");
    }
    if (ramp_steps < 1) throw std::invalid_argument("FusionConfig: ramp_steps must be >= 1");
    if (epsilon < 0.0) throw std::invalid_argument("FusionConfig: epsilon must be >= 0");
}

RegionGraph::RegionGraph(const ImageTensor& target)
    : height_(target.height()), width_(target.width()), channels_(target.channels()) {
    const int n = pixel_count();
    live_groups_ = n;
    parent_.resize(n);
    alive_.assign(n, 1);
    counts_.assign(n, 1);
    values_.resize(static_cast<std::size_t>(n) * channels_);
    links_.resize(n);

    for (int p = 0; p < n; ++p) parent_[p] = p;
    for (int c = 0; c < channels_; ++c) {
        const double* plane = target.plane(c);
        for (int p = 0; p < n; ++p) {
            values_[static_cast<std::size_t>(p) * channels_ + c] = plane[p];
        }
    }
    // 4-adjacency, association lists kept sorted by neighbor id.
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const int p = y * width_ + x;
            auto& lst = links_[p];
            if (y > 0) lst.push_back({p - width_, 1});
            if (x > 0) lst.push_back({p - 1, 1});
            if (x + 1 < width_) lst.push_back({p + 1, 1});
            if (y + 1 < height_) lst.push_back({p + width_, 1});
        }
    }
}

int RegionGraph::find(int pixel) const {
    int root = pixel;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[pixel] != root) {
        const int next = parent_[pixel];
        parent_[pixel] = root;
        pixel = next;
    }
    return root;
}

std::vector<int> RegionGraph::live_groups() const {
    std::vector<int> out;
    out.reserve(live_groups_);
    for (int p = 0; p < pixel_count(); ++p) {
        if (alive_[p]) out.push_back(p);
    }
    return out;
}

bool RegionGraph::linked(int i, int j, int* weight) const {
    const auto& lst = links_[i];
    auto it = std::lower_bound(lst.begin(), lst.end(), j,
                               [](const Link& l, int id) { return l.to < id; });
    if (it == lst.end() || it->to != j) return false;
    if (weight) *weight = it->weight;
    return true;
}

bool RegionGraph::try_fuse(int i, int j, double lambda_current) {
    if (i == j) throw std::logic_error("try_fuse: identical groups");
    if (i < 0 || j < 0 || i >= pixel_count() || j >= pixel_count() || !alive_[i] || !alive_[j]) {
        throw std::logic_error("try_fuse: dead or invalid group");
    }
    int connection = 0;
    if (!linked(i, j, &connection)) throw std::logic_error("try_fuse: groups not linked");

    const double wi = static_cast<double>(counts_[i]);
    const double wj = static_cast<double>(counts_[j]);
    const double* yi = group_value(i);
    const double* yj = group_value(j);
    double dist2 = 0.0;
    for (int c = 0; c < channels_; ++c) {
        const double d = yi[c] - yj[c];
        dist2 += d * d;
    }
    if (wi * wj * dist2 > lambda_current * connection * (wi + wj)) return false;

    merge(std::min(i, j), std::max(i, j));
    return true;
}

void RegionGraph::merge(int keep, int drop) {
    const double wk = static_cast<double>(counts_[keep]);
    const double wd = static_cast<double>(counts_[drop]);
    double* yk = values_.data() + static_cast<std::size_t>(keep) * channels_;
    const double* yd = group_value(drop);
    for (int c = 0; c < channels_; ++c) yk[c] = (wk * yk[c] + wd * yd[c]) / (wk + wd);
    counts_[keep] += counts_[drop];

    // Union the two sorted association lists, dropping the mutual link and
    // summing parallel links.
    std::vector<Link> merged;
    merged.reserve(links_[keep].size() + links_[drop].size());
    {
        const auto& a = links_[keep];
        const auto& b = links_[drop];
        std::size_t ia = 0, ib = 0;
        while (ia < a.size() || ib < b.size()) {
            Link next{};
            if (ib == b.size() || (ia < a.size() && a[ia].to < b[ib].to)) {
                next = a[ia++];
            } else if (ia == a.size() || b[ib].to < a[ia].to) {
                next = b[ib++];
            } else {
                next = {a[ia].to, a[ia].weight + b[ib].weight};
                ++ia;
                ++ib;
            }
            if (next.to == keep || next.to == drop) continue;
            merged.push_back(next);
        }
    }
    links_[keep] = std::move(merged);
    links_[drop].clear();
    links_[drop].shrink_to_fit();
    alive_[drop] = 0;
    parent_[drop] = keep;
    --live_groups_;

    // Repoint every neighbor at the merged group.
    for (const Link& l : links_[keep]) {
        auto& nb = links_[l.to];
        auto drop_entry = [&nb](int id) {
            auto it = std::lower_bound(nb.begin(), nb.end(), id,
                                       [](const Link& e, int v) { return e.to < v; });
            if (it != nb.end() && it->to == id) nb.erase(it);
        };
        drop_entry(keep);
        drop_entry(drop);
        auto pos = std::lower_bound(nb.begin(), nb.end(), keep,
                                    [](const Link& e, int v) { return e.to < v; });
        nb.insert(pos, {keep, l.weight});
    }
}

int RegionGraph::sweep(double lambda_current) {
    int fused = 0;
    const int n = pixel_count();
    for (int p = 0; p < n; ++p) {
        if (!alive_[p]) continue;
        const std::vector<Link> snapshot = links_[p];
        int cur = p;
        for (const Link& l : snapshot) {
            const int other = find(l.to);
            if (other == cur || !alive_[other]) continue;
            if (!linked(cur, other)) continue;
            if (try_fuse(cur, other, lambda_current)) {
                ++fused;
                cur = std::min(cur, other);
            }
        }
    }
    return fused;
}

ImageTensor RegionGraph::reconstruct() const {
    ImageTensor out(height_, width_, channels_);
    const int n = pixel_count();
    for (int c = 0; c < channels_; ++c) {
        double* plane = out.plane(c);
        for (int p = 0; p < n; ++p) {
            plane[p] = values_[static_cast<std::size_t>(find(p)) * channels_ + c];
        }
    }
    return out;
}

RegionGraph init_graph(const ImageTensor& target) { return RegionGraph(target); }

ImageTensor solve_prox(const ImageTensor& target, const FusionConfig& cfg) {
    cfg.validate();
    RegionGraph graph(target);
    int last_pass_fusions = 0;
    for (int pass = 1; pass <= cfg.ramp_steps; ++pass) {
        const double working = cfg.lambda_eff * pass / cfg.ramp_steps;
        last_pass_fusions = graph.sweep(working);
    }
    // Full-coefficient passes until quiescent. Each extra pass fuses at
    // least one pair, so this ends within pixel_count passes.
    while (last_pass_fusions > 0) {
        last_pass_fusions = graph.sweep(cfg.lambda_eff);
    }
    return graph.reconstruct();
}

double prox_objective(const ImageTensor& v, const ImageTensor& target, double lambda_eff,
                      double epsilon) {
    return lambda_eff * static_cast<double>(l0_difference_count(v, epsilon)) +
           squared_distance(v, target);
}

} // namespace dipl0
