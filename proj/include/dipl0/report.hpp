#pragma once

#include "dipl0/admm.hpp"

#include <string>
#include <vector>

namespace dipl0 {

// Everything needed to reproduce and analyze one smoothing run: the full
// config snapshot, the per-iteration history, aggregate wall-clock per
// phase, and the file paths involved. Serialized as a key=value header
// followed by a tab-separated history table; parsing the text back yields
// an equal structure (doubles are printed with 17 significant digits).
struct RunReport {
    RunConfig config;
    std::string input_path;
    std::string reference_path; // empty when no reference was given
    std::string output_path;
    int input_height = 0; // pre-padding dims
    int input_width = 0;
    int input_channels = 0;
    std::vector<IterationRecord> history;
    double wall_theta_s = 0.0;
    double wall_v_s = 0.0;
    double wall_total_s = 0.0;

    bool operator==(const RunReport&) const = default;
};

std::string to_text(const RunReport& report);
RunReport parse_report(const std::string& text);

void write_report(const RunReport& report, const std::string& path);
RunReport read_report(const std::string& path);

} // namespace dipl0
