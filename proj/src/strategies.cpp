#include "hostcap/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hostcap/errors.hpp"

namespace hostcap {

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Uniform: return "uniform";
        case StrategyKind::Entropy: return "entropy";
        case StrategyKind::InfoDensity: return "info_density";
    }
    return "unknown";
}

StrategyKind strategy_from_string(const std::string& s) {
    if (s == "uniform") return StrategyKind::Uniform;
    if (s == "entropy") return StrategyKind::Entropy;
    if (s == "info_density") return StrategyKind::InfoDensity;
    throw ConfigError("unknown strategy '" + s +
                      "' (expected uniform, entropy, or info_density)");
}

double binary_entropy(double p) {
    p = std::clamp(p, 0.01, 0.99);
    return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

std::vector<double> score_uniform(std::size_t n, Rng& rng) {
    if (n == 0) throw EmptyPool("no unlabeled scenarios to score");
    std::vector<double> scores(n);
    for (auto& s : scores) s = rng.uniform();
    return scores;
}

std::vector<double> score_entropy(const MlpParams& theta,
                                  const std::vector<const std::vector<double>*>& candidates) {
    if (candidates.empty()) throw EmptyPool("no unlabeled scenarios to score");
    std::vector<double> scores(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i)
        scores[i] = binary_entropy(theta.predict_proba(*candidates[i]));
    return scores;
}

std::vector<double> score_info_density(const MlpParams& theta,
                                       const std::vector<const std::vector<double>*>& candidates,
                                       double beta) {
    if (candidates.empty()) throw EmptyPool("no unlabeled scenarios to score");
    if (beta < 0.0) throw ConfigError("info-density beta must be >= 0");
    const std::size_t n = candidates.size();
    const std::size_t D = candidates[0]->size();

    // Mean cosine of x against the pool equals unit(x) . mean-of-unit-vectors,
    // so the density term costs one pass instead of all pairs. Zero-norm
    // vectors contribute a zero unit vector, matching the similarity-0
    // convention on both sides of each pair.
    std::vector<double> norms(n, 0.0);
    std::vector<double> mean_unit(D, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& x = *candidates[i];
        if (x.size() != D) throw DimensionMismatch("feature vector size mismatch");
        double s2 = 0.0;
        for (double v : x) s2 += v * v;
        norms[i] = std::sqrt(s2);
        if (norms[i] > 0.0)
            for (std::size_t d = 0; d < D; ++d) mean_unit[d] += x[d] / norms[i];
    }
    for (double& v : mean_unit) v /= static_cast<double>(n);

    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double entropy = binary_entropy(theta.predict_proba(*candidates[i]));
        double sim = 0.0;
        if (norms[i] > 0.0) {
            const auto& x = *candidates[i];
            for (std::size_t d = 0; d < D; ++d) sim += x[d] / norms[i] * mean_unit[d];
        }
        // Installed-kW features are nonnegative, so true cosines are too;
        // clip rounding noise before the fractional power.
        sim = std::max(sim, 0.0);
        scores[i] = entropy * std::pow(sim, beta);
    }
    return scores;
}

std::vector<std::size_t> select_top(const std::vector<double>& scores,
                                    const std::vector<long>& ids, std::size_t B) {
    if (scores.size() != ids.size()) throw DimensionMismatch("score/id count mismatch");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t take = std::min(B, order.size());
    std::partial_sort(order.begin(), order.begin() + take, order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return ids[a] < ids[b];
                      });
    order.resize(take);
    return order;
}

}  // namespace hostcap
