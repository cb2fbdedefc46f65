#include "hostcap/active_learning.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "hostcap/errors.hpp"

namespace hostcap {

std::vector<std::vector<double>> compute_pool_features(const ScenarioPool& pool,
                                                       const Network& net, double charger_kw) {
    std::vector<std::vector<double>> features;
    features.reserve(pool.size());
    for (const auto& s : pool) features.push_back(scenario_features(s, net, charger_kw));
    return features;
}

namespace {

// Label the selected pool positions, fanning out over workers; verdicts are
// written into slots keyed by selection order, so the outcome is identical
// for any worker count.
std::vector<FeasibilityVerdict> label_batch(const Network& net, const ScenarioPool& pool,
                                            const std::vector<int>& picked,
                                            const ProfileSet& ev_profiles,
                                            const ProfileSet& pv_profiles,
                                            const OracleConfig& oracle_cfg, int workers,
                                            ViolationHistogram* hist) {
    std::vector<FeasibilityVerdict> verdicts(picked.size());
    const int W = std::max(1, std::min<int>(workers, static_cast<int>(picked.size())));
    if (W <= 1) {
        DistFlowSolver solver(net);
        for (std::size_t i = 0; i < picked.size(); ++i)
            verdicts[i] = evaluate_scenario(solver, pool[picked[i]], ev_profiles, pv_profiles,
                                            oracle_cfg, hist);
        return verdicts;
    }
    std::vector<ViolationHistogram> worker_hists(hist ? W : 0);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(W);
    for (int w = 0; w < W; ++w) {
        threads.emplace_back([&, w] {
            try {
                DistFlowSolver solver(net);
                ViolationHistogram* wh = hist ? &worker_hists[w] : nullptr;
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= picked.size()) break;
                    verdicts[i] = evaluate_scenario(solver, pool[picked[i]], ev_profiles,
                                                    pv_profiles, oracle_cfg, wh);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    if (first_error) std::rethrow_exception(first_error);
    if (hist)
        for (const auto& wh : worker_hists) hist->merge(wh);
    return verdicts;
}

}  // namespace

EpisodeResult run_episode(const Network& net, const ScenarioPool& pool,
                          const ProfileSet& ev_profiles, const ProfileSet& pv_profiles,
                          const OracleConfig& oracle_cfg, const QueryStrategy& strategy, int B,
                          int K, const TrainConfig& train_cfg, std::uint64_t seed, int workers,
                          const std::vector<std::vector<double>>* features,
                          ViolationHistogram* hist) {
    if (pool.empty()) throw EmptyPool("cannot run an episode on an empty pool");
    if (B < 1 || K < 1) throw ConfigError("query size B and round count K must be >= 1");

    const auto t_start = std::chrono::steady_clock::now();
    std::vector<std::vector<double>> own_features;
    if (!features) {
        own_features = compute_pool_features(pool, net, oracle_cfg.charger_kw);
        features = &own_features;
    }
    if (features->size() != pool.size())
        throw DimensionMismatch("feature matrix does not match pool size");

    EpisodeResult result;
    result.history.B = B;
    result.history.K = K;
    result.labeled.unlabeled.resize(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i)
        result.labeled.unlabeled[i] = static_cast<int>(i);

    Rng rng(seed);
    std::vector<std::vector<double>> train_X;
    std::vector<int> train_y;
    double best_ev = 0.0, best_pv = 0.0, best_combined = 0.0;
    bool any_feasible = false;

    for (int round = 0; round < K; ++round) {
        auto& unlabeled = result.labeled.unlabeled;
        if (unlabeled.empty()) break;

        // Uniform querying never consults the model, so it trains nothing
        // during rounds; the uncertainty strategies retrain each round
        // (round 0 starts from the constant-0.5 prior of an empty set).
        if (strategy.kind != StrategyKind::Uniform) {
            TrainConfig tc = train_cfg;
            tc.seed = seed ^ (0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(round));
            result.theta = train_classifier(train_X, train_y, tc);
        }

        std::vector<const std::vector<double>*> candidates;
        std::vector<long> ids;
        candidates.reserve(unlabeled.size());
        ids.reserve(unlabeled.size());
        for (int idx : unlabeled) {
            candidates.push_back(&(*features)[idx]);
            ids.push_back(pool[idx].id);
        }
        std::vector<double> scores;
        switch (strategy.kind) {
            case StrategyKind::Uniform: scores = score_uniform(candidates.size(), rng); break;
            case StrategyKind::Entropy: scores = score_entropy(result.theta, candidates); break;
            case StrategyKind::InfoDensity:
                scores = score_info_density(result.theta, candidates, strategy.beta);
                break;
        }
        const auto top = select_top(scores, ids, static_cast<std::size_t>(B));

        std::vector<int> picked;
        picked.reserve(top.size());
        for (std::size_t pos : top) picked.push_back(unlabeled[pos]);
        const auto verdicts =
            label_batch(net, pool, picked, ev_profiles, pv_profiles, oracle_cfg, workers, hist);
        result.history.labels_requested += static_cast<long>(picked.size());

        RoundRecord rec;
        rec.round = round;
        for (std::size_t i = 0; i < picked.size(); ++i) {
            const int idx = picked[i];
            const Scenario& s = pool[idx];
            LabeledEntry entry;
            entry.scenario_id = s.id;
            entry.pool_index = idx;
            entry.label = verdicts[i].label;
            entry.query_round = round;
            entry.pass_fraction = verdicts[i].pass_fraction;
            result.labeled.entries.push_back(entry);
            train_X.push_back((*features)[idx]);
            train_y.push_back(entry.label);
            rec.queried_ids.push_back(s.id);
            rec.labels.push_back(entry.label);
            if (entry.label == 1) {
                any_feasible = true;
                const double ev = s.total_ev_count();
                const double pv = s.total_pv_kw();
                best_ev = std::max(best_ev, ev);
                best_pv = std::max(best_pv, pv);
                best_combined = std::max(best_combined, ev + pv);
            }
        }
        // Drop the queried positions from the unlabeled set, preserving order.
        std::vector<std::size_t> sorted_pos(top.begin(), top.end());
        std::sort(sorted_pos.begin(), sorted_pos.end());
        std::size_t write = 0, drop = 0;
        for (std::size_t read = 0; read < unlabeled.size(); ++read) {
            if (drop < sorted_pos.size() && read == sorted_pos[drop]) {
                ++drop;
                continue;
            }
            unlabeled[write++] = unlabeled[read];
        }
        unlabeled.resize(write);

        rec.labeled_total = static_cast<int>(result.labeled.entries.size());
        rec.hc_ev = any_feasible ? best_ev : 0.0;
        rec.hc_pv_kw = any_feasible ? best_pv : 0.0;
        rec.hc_combined = any_feasible ? best_combined : 0.0;
        result.history.rounds.push_back(std::move(rec));
    }

    // The episode's model is always trained on the final labeled set, so
    // uniform episodes also return a usable classifier.
    TrainConfig tc = train_cfg;
    tc.seed = seed;
    result.theta = train_classifier(train_X, train_y, tc);

    result.history.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

HcMetrics hosting_capacity(const LabeledPool& labeled, const ScenarioPool& pool) {
    if (labeled.entries.empty()) throw EmptyPool("no labeled scenarios");
    HcMetrics hc;
    struct Row {
        long id;
        double combined;
    };
    std::vector<Row> feasible;
    for (const auto& e : labeled.entries) {
        if (e.label != 1) continue;
        const Scenario& s = pool.at(e.pool_index);
        const double ev = s.total_ev_count();
        const double pv = s.total_pv_kw();
        const double combined = ev + pv;
        if (hc.argmax_ev_id < 0 || ev > hc.max_ev_count) {
            hc.max_ev_count = ev;
            hc.argmax_ev_id = e.scenario_id;
        }
        if (hc.argmax_pv_id < 0 || pv > hc.max_pv_kw) {
            hc.max_pv_kw = pv;
            hc.argmax_pv_id = e.scenario_id;
        }
        if (hc.argmax_combined_id < 0 || combined > hc.max_combined) {
            hc.max_combined = combined;
            hc.argmax_combined_id = e.scenario_id;
        }
        feasible.push_back({e.scenario_id, combined});
    }
    if (feasible.empty()) throw NoFeasibleScenario("every labeled scenario is infeasible");

    std::sort(feasible.begin(), feasible.end(), [](const Row& a, const Row& b) {
        if (a.combined != b.combined) return a.combined > b.combined;
        return a.id < b.id;
    });
    const std::size_t take = (feasible.size() + 9) / 10;
    hc.frontier_ids.reserve(take);
    for (std::size_t i = 0; i < take; ++i) hc.frontier_ids.push_back(feasible[i].id);
    return hc;
}

}  // namespace hostcap
