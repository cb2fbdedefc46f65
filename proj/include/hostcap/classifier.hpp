#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace hostcap {

/// Two-layer feedforward classifier: D inputs -> H tanh units -> logistic
/// output, with the feature standardization learned at training time stored
/// alongside the weights. A default-constructed (D = 0) instance is the
/// cold-start prior and predicts 0.5 for every input.
struct MlpParams {
    int D = 0;
    int H = 0;
    std::vector<double> w1;  // [H x D], row-major
    std::vector<double> b1;  // [H]
    std::vector<double> w2;  // [H]
    double b2 = 0.0;
    std::vector<double> mean;   // [D] feature shift
    std::vector<double> scale;  // [D] feature scale (>= tiny)

    /// P(label = 1 | x), clamped away from {0, 1}.
    double predict_proba(std::span<const double> x) const;
};

struct TrainConfig {
    int hidden = 32;
    int epochs = 500;
    double learning_rate = 1e-2;
    double momentum = 0.9;
    double l2 = 1e-4;
    std::uint64_t seed = 0;
};

/// Full-batch gradient-descent training of the binary cross-entropy loss.
/// Degenerate inputs never throw: an empty set returns the cold-start
/// prior; a single-class set returns a constant classifier at the clipped
/// class frequency.
MlpParams train_classifier(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                           const TrainConfig& cfg);

/// Mean binary cross-entropy + L2 penalty and its gradient, on a flat
/// parameter vector laid out as [w1, b1, w2, b2]. X is consumed as-is (the
/// trainer standardizes before calling). Exposed so the gradient can be
/// checked against finite differences.
double mlp_loss_and_grad(std::span<const double> flat, int D, int H,
                         const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                         double l2, std::span<double> grad);

inline int mlp_param_count(int D, int H) { return H * D + H + H + 1; }

nlohmann::ordered_json mlp_to_json(const MlpParams& p);
MlpParams mlp_from_json(const nlohmann::json& j);
void save_mlp(const MlpParams& p, const std::string& path);
MlpParams load_mlp(const std::string& path);

}  // namespace hostcap
