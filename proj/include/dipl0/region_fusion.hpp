#pragma once

#include "dipl0/image.hpp"

#include <vector>

namespace dipl0 {

struct FusionConfig {
    // Coefficient on the gradient-count term of the prox objective
    // lambda_eff * ||grad v||_0 + ||v - target||^2.
    double lambda_eff = 0.0;
    // Number of outer passes over which the working coefficient ramps
    // linearly from lambda_eff / ramp_steps up to lambda_eff.
    int ramp_steps = 100;
    // Nonzero-gradient tolerance used when evaluating the objective.
    double epsilon = 1e-12;

    void validate() const;
};

// Partition of the pixel grid into constant-valued groups, merged greedily.
// A group's id is the smallest pixel index it contains; merging two groups
// keeps the smaller id alive. Links carry the number of 4-adjacent pixel
// pairs crossing the boundary between two groups and are kept canonical
// (live roots only, weights summed) after every merge.
class RegionGraph {
public:
    struct Link {
        int to;
        int weight;
        bool operator==(const Link&) const = default;
    };

    RegionGraph(const ImageTensor& target);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    int pixel_count() const { return height_ * width_; }

    bool alive(int group) const { return alive_[group] != 0; }
    int live_group_count() const { return live_groups_; }
    // Live group ids in ascending representative-pixel order.
    std::vector<int> live_groups() const;

    int group_of(int pixel) const { return find(pixel); }
    long group_pixel_count(int group) const { return counts_[group]; }
    // channels() values, the mean of the target over the group's pixels.
    const double* group_value(int group) const {
        return values_.data() + static_cast<std::size_t>(group) * channels_;
    }
    const std::vector<Link>& links_of(int group) const { return links_[group]; }

    // Fuses groups i and j when doing so does not increase the prox
    // objective at lambda_current:
    //   count_i * count_j * ||Y_i - Y_j||^2 <= lambda_current * c_ij * (count_i + count_j).
    // Ties fuse. Throws if either group is dead or the two are not linked.
    bool try_fuse(int i, int j, double lambda_current);

    // One pass over all live groups in ascending id order, testing fusion
    // with every neighbor present at the start of each group's turn.
    // Returns the number of fusions performed.
    int sweep(double lambda_current);

    // Image whose pixels carry their group's value.
    ImageTensor reconstruct() const;

private:
    int find(int pixel) const;
    void merge(int keep, int drop);
    bool linked(int i, int j, int* weight = nullptr) const;

    int height_ = 0, width_ = 0, channels_ = 0;
    int live_groups_ = 0;
    mutable std::vector<int> parent_;
    std::vector<unsigned char> alive_;
    std::vector<long> counts_;
    std::vector<double> values_;
    std::vector<std::vector<Link>> links_;
};

RegionGraph init_graph(const ImageTensor& target);

// Greedy region-fusion solve of
//   min_v  lambda_eff * ||grad v||_0 + ||v - target||^2.
// The working coefficient ramps linearly over cfg.ramp_steps passes and the
// solve continues with full-coefficient passes until one completes without
// a fusion. Targets may leave [0,1]; values are never clamped.
ImageTensor solve_prox(const ImageTensor& target, const FusionConfig& cfg);

// lambda_eff * l0_difference_count(v, epsilon) + ||v - target||^2. The
// per-difference count is the one under which every accepted fusion at a
// working coefficient <= lambda_eff provably never increases this value:
// merging changes it by (w_i*w_j/(w_i+w_j))*||dY||^2 - lambda_eff*c_ij,
// and the fusion criterion bounds the first term by lambda_working*c_ij.
double prox_objective(const ImageTensor& v, const ImageTensor& target, double lambda_eff,
                      double epsilon = 1e-12);

} // namespace dipl0
