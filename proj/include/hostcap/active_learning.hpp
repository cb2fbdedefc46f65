#pragma once

#include <cstdint>
#include <vector>

#include "hostcap/classifier.hpp"
#include "hostcap/oracle.hpp"
#include "hostcap/scenario.hpp"
#include "hostcap/strategies.hpp"

namespace hostcap {

struct LabeledEntry {
    long scenario_id = 0;
    int pool_index = 0;
    int label = 0;
    int query_round = 0;
    double pass_fraction = 0.0;
};

/// Labeled set plus the pool positions not yet queried; the two index sets
/// stay disjoint and jointly cover the pool.
struct LabeledPool {
    std::vector<LabeledEntry> entries;
    std::vector<int> unlabeled;
};

struct RoundRecord {
    int round = 0;
    std::vector<long> queried_ids;
    std::vector<int> labels;
    int labeled_total = 0;
    // Cumulative hosting-capacity metrics over everything labeled so far;
    // zero until the first feasible scenario is found.
    double hc_ev = 0.0;
    double hc_pv_kw = 0.0;
    double hc_combined = 0.0;
};

struct EpisodeHistory {
    std::vector<RoundRecord> rounds;
    int B = 0;
    int K = 0;
    long labels_requested = 0;
    double wall_seconds = 0.0;
};

struct EpisodeResult {
    MlpParams theta;
    LabeledPool labeled;
    EpisodeHistory history;
};

struct HcMetrics {
    double max_ev_count = 0.0;
    double max_pv_kw = 0.0;
    double max_combined = 0.0;  // EV count + PV kW, summed as-is
    long argmax_ev_id = -1;
    long argmax_pv_id = -1;
    long argmax_combined_id = -1;
    std::vector<long> frontier_ids;  // feasible entries in the top decile by combined size
};

std::vector<std::vector<double>> compute_pool_features(const ScenarioPool& pool,
                                                       const Network& net, double charger_kw);

/// Pool-based active-learning episode: per round, train on the labeled set
/// (uniform querying skips training), score the unlabeled pool, query the
/// top-B scenarios (ties to the smallest id), and label them through the
/// feasibility oracle — in parallel across `workers` when > 1, with results
/// independent of scheduling. Runs K rounds or until the pool is exhausted;
/// the returned classifier is trained on the final labeled set.
EpisodeResult run_episode(const Network& net, const ScenarioPool& pool,
                          const ProfileSet& ev_profiles, const ProfileSet& pv_profiles,
                          const OracleConfig& oracle_cfg, const QueryStrategy& strategy, int B,
                          int K, const TrainConfig& train_cfg, std::uint64_t seed, int workers = 1,
                          const std::vector<std::vector<double>>* features = nullptr,
                          ViolationHistogram* hist = nullptr);

/// Extremes of the feasible labeled set. Throws EmptyPool when nothing is
/// labeled and NoFeasibleScenario when every label is 0.
HcMetrics hosting_capacity(const LabeledPool& labeled, const ScenarioPool& pool);

}  // namespace hostcap
