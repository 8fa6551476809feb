#pragma once

#include <array>
#include <string>
#include <vector>

namespace uwbrem::eval {

// Linear 2-D view of environment codes: mean-centered projection onto the
// top-2 principal axes, sign-fixed so each axis' largest-magnitude loading
// is positive.
struct Projection2D {
    std::vector<std::array<double, 2>> points;
    std::vector<int> labels;
    std::array<double, 2> explained{0.0, 0.0};  // variance fractions, nonincreasing
};

Projection2D project_latent(const std::vector<std::vector<double>>& codes, const std::vector<int>& labels);

void write_projection_csv(const Projection2D& p, const std::string& path);

}  // namespace uwbrem::eval
