#include "hostcap/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "hostcap/errors.hpp"
#include "hostcap/rng.hpp"

namespace hostcap {

namespace {

constexpr double kProbFloor = 1e-12;

double logistic(double z) {
    // Evaluate through exp of a negative argument only, for stability.
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

double MlpParams::predict_proba(std::span<const double> x) const {
    if (D == 0) return 0.5;  // cold-start prior
    if (static_cast<int>(x.size()) != D)
        throw DimensionMismatch("feature vector has " + std::to_string(x.size()) +
                                " entries, classifier expects " + std::to_string(D));
    double z = b2;
    for (int h = 0; h < H; ++h) {
        double a = b1[h];
        const double* row = &w1[static_cast<std::size_t>(h) * D];
        for (int d = 0; d < D; ++d) a += row[d] * (x[d] - mean[d]) / scale[d];
        z += w2[h] * std::tanh(a);
    }
    return std::clamp(logistic(z), kProbFloor, 1.0 - kProbFloor);
}

double mlp_loss_and_grad(std::span<const double> flat, int D, int H,
                         const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                         double l2, std::span<double> grad) {
    const int P = mlp_param_count(D, H);
    if (static_cast<int>(flat.size()) != P || static_cast<int>(grad.size()) != P)
        throw DimensionMismatch("parameter vector size mismatch");
    if (X.size() != y.size()) throw DimensionMismatch("feature/label count mismatch");

    const double* w1 = flat.data();
    const double* b1 = w1 + static_cast<std::size_t>(H) * D;
    const double* w2 = b1 + H;
    const double b2 = w2[H];
    double* g_w1 = grad.data();
    double* g_b1 = g_w1 + static_cast<std::size_t>(H) * D;
    double* g_w2 = g_b1 + H;
    std::fill(grad.begin(), grad.end(), 0.0);

    const std::size_t n = X.size();
    const double inv_n = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
    double loss = 0.0;
    std::vector<double> hidden(H);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& x = X[i];
        if (static_cast<int>(x.size()) != D) throw DimensionMismatch("feature vector size mismatch");
        double z = b2;
        for (int h = 0; h < H; ++h) {
            double a = b1[h];
            const double* row = &w1[static_cast<std::size_t>(h) * D];
            for (int d = 0; d < D; ++d) a += row[d] * x[d];
            hidden[h] = std::tanh(a);
            z += w2[h] * hidden[h];
        }
        // Cross-entropy of logistic(z) against y, in the softplus form that
        // stays finite for any z.
        loss += inv_n * (softplus(z) - y[i] * z);
        const double dz = inv_n * (logistic(z) - y[i]);
        grad[P - 1] += dz;  // b2
        for (int h = 0; h < H; ++h) {
            g_w2[h] += dz * hidden[h];
            const double dh = dz * w2[h] * (1.0 - hidden[h] * hidden[h]);
            g_b1[h] += dh;
            double* g_row = &g_w1[static_cast<std::size_t>(h) * D];
            for (int d = 0; d < D; ++d) g_row[d] += dh * x[d];
        }
    }

    // L2 on the weight matrices only; biases stay unpenalized.
    for (int k = 0; k < H * D; ++k) {
        loss += 0.5 * l2 * w1[k] * w1[k];
        g_w1[k] += l2 * w1[k];
    }
    for (int h = 0; h < H; ++h) {
        loss += 0.5 * l2 * w2[h] * w2[h];
        g_w2[h] += l2 * w2[h];
    }
    return loss;
}

MlpParams train_classifier(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                           const TrainConfig& cfg) {
    if (X.size() != y.size()) throw DimensionMismatch("feature/label count mismatch");
    if (X.empty()) return MlpParams{};  // cold-start prior

    const int D = static_cast<int>(X[0].size());
    const int H = cfg.hidden;
    const std::size_t n = X.size();

    MlpParams p;
    p.D = D;
    p.H = H;
    p.w1.assign(static_cast<std::size_t>(H) * D, 0.0);
    p.b1.assign(H, 0.0);
    p.w2.assign(H, 0.0);
    p.mean.assign(D, 0.0);
    p.scale.assign(D, 1.0);

    double freq = 0.0;
    for (int label : y) freq += label;
    freq /= static_cast<double>(n);
    if (freq == 0.0 || freq == 1.0) {
        // Single-class data: constant classifier at the clipped frequency.
        const double f = std::clamp(freq, 0.01, 0.99);
        p.b2 = std::log(f / (1.0 - f));
        return p;
    }

    for (const auto& x : X) {
        if (static_cast<int>(x.size()) != D) throw DimensionMismatch("feature vector size mismatch");
        for (int d = 0; d < D; ++d) p.mean[d] += x[d];
    }
    for (int d = 0; d < D; ++d) p.mean[d] /= static_cast<double>(n);
    std::vector<double> var(D, 0.0);
    for (const auto& x : X)
        for (int d = 0; d < D; ++d) var[d] += (x[d] - p.mean[d]) * (x[d] - p.mean[d]);
    for (int d = 0; d < D; ++d) {
        const double sd = std::sqrt(var[d] / static_cast<double>(n));
        p.scale[d] = sd > 1e-12 ? sd : 1.0;
    }

    std::vector<std::vector<double>> Xs(n, std::vector<double>(D));
    for (std::size_t i = 0; i < n; ++i)
        for (int d = 0; d < D; ++d) Xs[i][d] = (X[i][d] - p.mean[d]) / p.scale[d];

    const int P = mlp_param_count(D, H);
    std::vector<double> flat(P, 0.0), grad(P), velocity(P, 0.0);
    Rng rng(cfg.seed);
    const double r1 = std::sqrt(6.0 / (D + H));
    for (int k = 0; k < H * D; ++k) flat[k] = rng.uniform(-r1, r1);
    const double r2 = std::sqrt(6.0 / (H + 1));
    for (int h = 0; h < H; ++h) flat[H * D + H + h] = rng.uniform(-r2, r2);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        mlp_loss_and_grad(flat, D, H, Xs, y, cfg.l2, grad);
        const double lr = cfg.learning_rate / (1.0 + 3.0 * epoch / cfg.epochs);
        for (int k = 0; k < P; ++k) {
            velocity[k] = cfg.momentum * velocity[k] - lr * grad[k];
            flat[k] += velocity[k];
        }
    }

    std::copy(flat.begin(), flat.begin() + H * D, p.w1.begin());
    std::copy(flat.begin() + H * D, flat.begin() + H * D + H, p.b1.begin());
    std::copy(flat.begin() + H * D + H, flat.begin() + H * D + 2 * H, p.w2.begin());
    p.b2 = flat[P - 1];
    return p;
}

nlohmann::ordered_json mlp_to_json(const MlpParams& p) {
    nlohmann::ordered_json j;
    j["d"] = p.D;
    j["h"] = p.H;
    j["w1"] = p.w1;
    j["b1"] = p.b1;
    j["w2"] = p.w2;
    j["b2"] = p.b2;
    j["mean"] = p.mean;
    j["scale"] = p.scale;
    return j;
}

MlpParams mlp_from_json(const nlohmann::json& j) {
    MlpParams p;
    p.D = j.at("d").get<int>();
    p.H = j.at("h").get<int>();
    p.w1 = j.at("w1").get<std::vector<double>>();
    p.b1 = j.at("b1").get<std::vector<double>>();
    p.w2 = j.at("w2").get<std::vector<double>>();
    p.b2 = j.at("b2").get<double>();
    p.mean = j.at("mean").get<std::vector<double>>();
    p.scale = j.at("scale").get<std::vector<double>>();
    if (p.w1.size() != static_cast<std::size_t>(p.H) * p.D || p.b1.size() != std::size_t(p.H) ||
        p.w2.size() != std::size_t(p.H) || p.mean.size() != std::size_t(p.D) ||
        p.scale.size() != std::size_t(p.D))
        throw ConfigError("classifier file has inconsistent dimensions");
    return p;
}

void save_mlp(const MlpParams& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write classifier file: " + path);
    out << mlp_to_json(p).dump(2) << "\n";
}

MlpParams load_mlp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open classifier file: " + path);
    try {
        return mlp_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("classifier file " + path + " is malformed: " + e.what());
    }
}

}  // namespace hostcap
