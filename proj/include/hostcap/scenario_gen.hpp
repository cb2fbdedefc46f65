#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hostcap/network.hpp"
#include "hostcap/rng.hpp"
#include "hostcap/scenario.hpp"

namespace hostcap {

/// Named bus group used to restrict where EV adoption happens.
struct Cluster {
    std::string id;
    std::vector<std::string> buses;
    std::string description;
};

struct EvGenConfig {
    bool enabled = false;
    std::vector<std::string> candidate_buses;  // explicit set, or resolved from `cluster`
    std::string cluster;                       // optional cluster id restriction
    double lambda_lo = 1.0;
    double lambda_hi = 1.0;
    double lambda_step = 0.1;
    int n_ev_types = 1;
    double charger_kw = 1.92;
    double power_factor = 1.0;
};

struct PvGenConfig {
    enum class CountMode { Total, PerBus };

    bool enabled = false;
    std::vector<std::string> candidate_buses;
    int n_pv_lo = 0;
    int n_pv_hi = 0;
    int n_pv_step = 1;
    int n_pv_types = 1;
    double plant_kw = 25.0;
    // Total: the grid value is the network-wide plant count, each plant at a
    // uniformly random candidate bus. PerBus: each candidate bus gets an
    // independent Uniform{0..n} plant count.
    CountMode count_mode = CountMode::Total;
    double power_factor = 1.0;
};

/// Direct low-dimensional pools: per listed bus, an EV load drawn uniformly
/// in [lo_pu, hi_pu] per-unit of real power (stored as an equivalent
/// charger count so size totals stay meaningful).
struct UniformBoxConfig {
    std::vector<std::string> buses;
    double lo_pu = 0.0;
    double hi_pu = 4.0;
    int profile_type = 0;
    double power_factor = 1.0;
};

struct PoolConfig {
    enum class Mode { Sweep, UniformBox };

    Mode mode = Mode::Sweep;
    EvGenConfig ev;
    PvGenConfig pv;
    bool colocate_pv_with_ev = false;
    double colocate_pv_kw = 5.0;  // PV kW added per co-located EV charger
    long pool_size_target = 1000;
    std::uint64_t seed = 0;
    UniformBoxConfig box;
};

PoolConfig pool_config_from_json(const nlohmann::json& j);
PoolConfig load_pool_config(const std::string& path);

std::vector<Cluster> clusters_from_json(const nlohmann::json& j);
std::vector<Cluster> load_clusters(const std::string& path);

/// Problems list (empty = valid); checks ranges and that every referenced
/// bus / cluster exists.
std::vector<std::string> validate_pool_config(const PoolConfig& cfg, const Network& net,
                                              const std::vector<Cluster>& clusters);

/// Independent Poisson(lambda) adoption count per candidate bus; draws are
/// made in the order the buses are listed.
std::map<std::string, int> draw_adoption_counts(const std::vector<std::string>& buses,
                                                double lambda, Rng& rng);

/// One (bus, profile_type) entry per adopted unit; types drawn uniformly
/// from {0..n_types-1}, buses visited in sorted order.
std::vector<std::pair<std::string, int>> assign_profiles(const std::map<std::string, int>& counts,
                                                         int n_types, Rng& rng);

/// Sweeps the generation grids (or samples the uniform box) and builds the
/// scenario pool. Pure function of (config, network, clusters, rng state).
ScenarioPool generate_pool(const PoolConfig& cfg, const Network& net,
                           const std::vector<Cluster>& clusters, Rng& rng);

}  // namespace hostcap
