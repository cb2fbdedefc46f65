#pragma once

#include <string>
#include <vector>

#include "hostcap/classifier.hpp"
#include "hostcap/rng.hpp"

namespace hostcap {

enum class StrategyKind { Uniform, Entropy, InfoDensity };

std::string to_string(StrategyKind kind);
StrategyKind strategy_from_string(const std::string& s);

struct QueryStrategy {
    StrategyKind kind = StrategyKind::Uniform;
    double beta = 1.0;  // density exponent, InfoDensity only
};

/// Binary entropy in nats of a probability clipped to [0.01, 0.99].
double binary_entropy(double p);

/// I.i.d. uniform scores; taking argmaxes of these is a uniform draw
/// without replacement. Throws EmptyPool when n = 0.
std::vector<double> score_uniform(std::size_t n, Rng& rng);

/// Prediction-uncertainty scores for the given candidate feature vectors.
std::vector<double> score_entropy(const MlpParams& theta,
                                  const std::vector<const std::vector<double>*>& candidates);

/// Entropy weighted by (mean cosine similarity to the candidate pool,
/// itself included)^beta. Zero-norm vectors take similarity 0 by
/// convention. Computed against the same candidate list being scored.
std::vector<double> score_info_density(const MlpParams& theta,
                                       const std::vector<const std::vector<double>*>& candidates,
                                       double beta);

/// Positions of the B largest scores, ties broken toward the smallest id.
std::vector<std::size_t> select_top(const std::vector<double>& scores,
                                    const std::vector<long>& ids, std::size_t B);

}  // namespace hostcap
