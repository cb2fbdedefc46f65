#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hostcap/active_learning.hpp"
#include "hostcap/network.hpp"
#include "hostcap/oracle.hpp"
#include "hostcap/profiles.hpp"
#include "hostcap/scenario.hpp"
#include "hostcap/scenario_gen.hpp"
#include "hostcap/strategies.hpp"
#include "hostcap/svm.hpp"

namespace hostcap {

/// Where behavior shapes come from: CSV files when paths are given,
/// otherwise the synthetic generator at the network's baseline T.
struct ProfilesSpec {
    std::string ev_csv;
    std::string pv_csv;
    bool negate_ev = false;
    int n_ev_types = 1;
    int n_pv_types = 1;
    SynthParams synth;
};

struct ExperimentConfig {
    std::string network_path;
    std::string pool_path;         // pre-generated JSONL, or
    std::string pool_config_path;  // generate at setup time
    std::string clusters_path;
    ProfilesSpec profiles;
    std::vector<StrategyKind> strategies;
    double beta = 1.0;
    int B = 32;
    int K = 8;
    double eps_bar = 1.0;
    double charger_kw = 1.92;
    int episodes = 1;
    std::uint64_t seed = 0;
    int workers = 1;
    bool exhaustive = false;        // also label the whole pool for ground truth
    double boundary_delta_pu = 0.0; // > 0 enables boundary-concentration analysis
};

/// Parses the config JSON; relative file paths are resolved against the
/// config file's directory.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::string& base_dir = "");

/// Loaded and validated inputs of one experiment.
struct ExperimentInputs {
    Network net;
    ScenarioPool pool;
    ProfileSet ev_profiles;
    ProfileSet pv_profiles;
    std::vector<std::vector<double>> features;  // per pool index, installed kW
};

ExperimentInputs setup_experiment(const ExperimentConfig& cfg);

struct ExhaustiveResult {
    std::vector<FeasibilityVerdict> verdicts;
    double feasible_fraction = 0.0;
    std::optional<HcMetrics> hc;  // absent when nothing is feasible
    ViolationHistogram histogram;
    LabeledPool labeled;  // every pool entry, labeled in pool order
};

ExhaustiveResult eval_exhaustive(const ExperimentInputs& in, const OracleConfig& oracle_cfg,
                                 int workers);

/// Fraction of the given feature vectors lying within delta of the
/// boundary, measured in per-unit coordinates (kW / base_kva).
double boundary_fraction(const std::vector<std::vector<double>>& features_kw,
                         const SvmBoundary& boundary_pu, double base_kva, double delta_pu);

/// Runs every configured strategy for `episodes` seeded episodes and writes
/// the report artifacts into out_dir: report.json, per-strategy curve /
/// frontier / aggregate-load / violation CSVs, and timings.csv (the only
/// file carrying wall-clock times). `require_comparison` enforces >= 2
/// strategies and always computes the exhaustive ground truth.
void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                    bool require_comparison);

/// "%.12g" float formatting used for every CSV cell.
std::string fmt_g(double v);

/// Report-shaped views of evaluation results, shared by the experiment
/// writer and the CLI.
nlohmann::ordered_json hc_to_json(const HcMetrics& hc);
nlohmann::ordered_json histogram_to_json(const ViolationHistogram& h);
void write_violations_csv(const ViolationHistogram& h, const std::string& path);

}  // namespace hostcap
