#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "hostcap/network.hpp"
#include "hostcap/profiles.hpp"

namespace hostcap {

/// One candidate-location entry of a scenario. EV entries carry a charger
/// count (converted to kW by the evaluation layer via its charger rating);
/// PV entries carry installed capacity directly in kW. `power_factor` is
/// the fixed operating power factor: reactive output is
/// tan(acos(pf)) * real output, so pf = 1 means no reactive exchange.
struct DerLocation {
    std::string bus;
    DerKind kind = DerKind::EV;
    double count = 0.0;  // EV: number of chargers (may be fractional)
    double kw = 0.0;     // PV: installed capacity
    int profile_type = 0;
    double power_factor = 1.0;
};

/// Generation parameters recorded with each scenario for reporting.
struct ScenarioMeta {
    double lambda = 0.0;
    int n_pv = 0;
    std::string cluster;
    int n_ev_types = 0;
};

struct Scenario {
    long id = 0;
    std::vector<DerLocation> locations;
    ScenarioMeta meta;

    double total_ev_count() const;
    double total_pv_kw() const;
};

using ScenarioPool = std::vector<Scenario>;

/// Installed-kW feature vector: per-bus EV kW followed by per-bus PV kW in
/// network bus order (length 2 * bus_count). EV counts convert at the given
/// charger rating.
std::vector<double> scenario_features(const Scenario& s, const Network& net, double charger_kw);

/// Validates one scenario against the network and profile libraries;
/// returns human-readable problems (empty = valid).
std::vector<std::string> validate_scenario(const Scenario& s, const Network& net,
                                           const ProfileSet& ev_profiles,
                                           const ProfileSet& pv_profiles);

nlohmann::ordered_json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);

/// JSON Lines pool files: one scenario object per line.
void save_pool(const ScenarioPool& pool, const std::string& path);
ScenarioPool load_pool(const std::string& path);

}  // namespace hostcap
