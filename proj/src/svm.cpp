#include "hostcap/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hostcap/errors.hpp"

namespace hostcap {

double SvmBoundary::signed_distance(const std::vector<double>& x) const {
    if (x.size() != w.size()) throw DimensionMismatch("feature vector size mismatch");
    double z = b;
    double norm2 = 0.0;
    for (std::size_t d = 0; d < w.size(); ++d) {
        z += w[d] * x[d];
        norm2 += w[d] * w[d];
    }
    return z / std::sqrt(std::max(norm2, 1e-300));
}

double SvmBoundary::distance(const std::vector<double>& x) const {
    return std::abs(signed_distance(x));
}

SvmBoundary fit_boundary(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                         const SvmConfig& cfg) {
    if (X.size() != y.size()) throw DimensionMismatch("feature/label count mismatch");
    if (X.empty()) throw DegenerateData("cannot fit a boundary to an empty set");
    const std::size_t n = X.size();
    const int D = static_cast<int>(X[0].size());

    bool has0 = false, has1 = false;
    for (int label : y) (label ? has1 : has0) = true;
    if (!has0 || !has1) throw DegenerateData("boundary fit needs both classes");
    bool all_same = true;
    for (std::size_t i = 1; i < n && all_same; ++i) all_same = X[i] == X[0];
    if (all_same) throw DegenerateData("all feature vectors are identical");

    // Standardize for conditioning; the result is mapped back afterwards.
    std::vector<double> mean(D, 0.0), scale(D, 1.0);
    for (const auto& x : X) {
        if (static_cast<int>(x.size()) != D) throw DimensionMismatch("feature vector size mismatch");
        for (int d = 0; d < D; ++d) mean[d] += x[d];
    }
    for (int d = 0; d < D; ++d) mean[d] /= static_cast<double>(n);
    std::vector<double> var(D, 0.0);
    for (const auto& x : X)
        for (int d = 0; d < D; ++d) var[d] += (x[d] - mean[d]) * (x[d] - mean[d]);
    for (int d = 0; d < D; ++d) {
        const double sd = std::sqrt(var[d] / static_cast<double>(n));
        scale[d] = sd > 1e-12 ? sd : 1.0;
    }

    std::vector<double> w(D, 0.0);
    double b = 0.0;
    std::vector<double> xs(D);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Subgradient of l2/2 ||w||^2 + mean_i hinge(s_i (w.xs_i + b)).
        std::vector<double> gw(D, 0.0);
        double gb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = y[i] ? 1.0 : -1.0;
            double z = b;
            for (int d = 0; d < D; ++d) {
                xs[d] = (X[i][d] - mean[d]) / scale[d];
                z += w[d] * xs[d];
            }
            if (s * z < 1.0) {
                for (int d = 0; d < D; ++d) gw[d] -= s * xs[d];
                gb -= s;
            }
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        const double lr = 1.0 / (cfg.l2 * (epoch + 1));
        for (int d = 0; d < D; ++d) w[d] -= lr * (cfg.l2 * w[d] + inv_n * gw[d]);
        b -= lr * inv_n * gb;
    }

    SvmBoundary out;
    out.w.assign(D, 0.0);
    out.b = b;
    for (int d = 0; d < D; ++d) {
        out.w[d] = w[d] / scale[d];
        out.b -= w[d] * mean[d] / scale[d];
    }
    out.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double s = y[i] ? 1.0 : -1.0;
        out.margin = std::min(out.margin, s * out.signed_distance(X[i]));
    }
    return out;
}

}  // namespace hostcap
