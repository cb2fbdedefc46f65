#pragma once

#include <vector>

namespace hostcap {

/// Separating hyperplane w.x + b = 0 in the original (unstandardized)
/// feature space. `margin` is the geometric margin of the training data:
/// min over points of signed_distance; negative when the data is not
/// linearly separated by the fit.
struct SvmBoundary {
    std::vector<double> w;
    double b = 0.0;
    double margin = 0.0;

    /// Signed distance of x from the boundary, positive on the label-1 side.
    double signed_distance(const std::vector<double>& x) const;
    double distance(const std::vector<double>& x) const;
};

struct SvmConfig {
    int epochs = 2000;
    double l2 = 1e-3;
};

/// Soft-margin linear separator trained by full-batch subgradient descent
/// on the hinge loss. Labels are {0, 1}. Throws DegenerateData when all
/// points coincide or only one class is present.
SvmBoundary fit_boundary(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                         const SvmConfig& cfg = {});

}  // namespace hostcap
