#include "hostcap/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "hostcap/errors.hpp"

namespace hostcap {

double Scenario::total_ev_count() const {
    double s = 0.0;
    for (const auto& loc : locations)
        if (loc.kind == DerKind::EV) s += loc.count;
    return s;
}

double Scenario::total_pv_kw() const {
    double s = 0.0;
    for (const auto& loc : locations)
        if (loc.kind == DerKind::PV) s += loc.kw;
    return s;
}

std::vector<double> scenario_features(const Scenario& s, const Network& net, double charger_kw) {
    const int nb = net.bus_count();
    std::vector<double> x(2 * nb, 0.0);
    for (const auto& loc : s.locations) {
        const int b = net.bus_index(loc.bus);
        if (b < 0) throw DimensionMismatch("scenario " + std::to_string(s.id) +
                                           " references unknown bus '" + loc.bus + "'");
        if (loc.kind == DerKind::EV)
            x[b] += loc.count * charger_kw + loc.kw;
        else
            x[nb + b] += loc.kw;
    }
    return x;
}

std::vector<std::string> validate_scenario(const Scenario& s, const Network& net,
                                           const ProfileSet& ev_profiles,
                                           const ProfileSet& pv_profiles) {
    std::vector<std::string> problems;
    auto add = [&](const std::string& msg) {
        problems.push_back("scenario " + std::to_string(s.id) + ": " + msg);
    };
    for (const auto& loc : s.locations) {
        if (net.bus_index(loc.bus) < 0) add("unknown bus '" + loc.bus + "'");
        if (loc.count < 0.0 || loc.kw < 0.0) add("negative size at bus '" + loc.bus + "'");
        if (!(loc.power_factor > 0.0) || loc.power_factor > 1.0)
            add("power factor at bus '" + loc.bus + "' must lie in (0, 1]");
        const ProfileSet& ps = loc.kind == DerKind::EV ? ev_profiles : pv_profiles;
        if (loc.profile_type < 0 || loc.profile_type >= ps.type_count())
            add("profile type " + std::to_string(loc.profile_type) + " out of range for " +
                to_string(loc.kind) + " library of " + std::to_string(ps.type_count()));
    }
    return problems;
}

nlohmann::ordered_json scenario_to_json(const Scenario& s) {
    nlohmann::ordered_json j;
    j["id"] = s.id;
    auto locs = nlohmann::ordered_json::array();
    for (const auto& loc : s.locations) {
        nlohmann::ordered_json lj;
        lj["bus"] = loc.bus;
        lj["kind"] = to_string(loc.kind);
        if (loc.kind == DerKind::EV)
            lj["count"] = loc.count;
        else
            lj["kw"] = loc.kw;
        lj["profile_type"] = loc.profile_type;
        lj["pf"] = loc.power_factor;
        locs.push_back(std::move(lj));
    }
    j["locations"] = std::move(locs);
    j["meta"] = {{"lambda", s.meta.lambda},
                 {"n_pv", s.meta.n_pv},
                 {"cluster", s.meta.cluster},
                 {"n_ev_types", s.meta.n_ev_types}};
    return j;
}

Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario s;
    s.id = j.at("id").get<long>();
    for (const auto& lj : j.at("locations")) {
        DerLocation loc;
        loc.bus = lj.at("bus").get<std::string>();
        loc.kind = der_kind_from_string(lj.at("kind").get<std::string>());
        if (lj.contains("count")) loc.count = lj["count"].get<double>();
        if (lj.contains("kw")) loc.kw = lj["kw"].get<double>();
        loc.profile_type = lj.value("profile_type", 0);
        loc.power_factor = lj.value("pf", 1.0);
        s.locations.push_back(std::move(loc));
    }
    if (j.contains("meta")) {
        const auto& m = j["meta"];
        s.meta.lambda = m.value("lambda", 0.0);
        s.meta.n_pv = m.value("n_pv", 0);
        s.meta.cluster = m.value("cluster", std::string());
        s.meta.n_ev_types = m.value("n_ev_types", 0);
    }
    return s;
}

void save_pool(const ScenarioPool& pool, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write pool file: " + path);
    for (const auto& s : pool) out << scenario_to_json(s).dump() << "\n";
}

ScenarioPool load_pool(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open pool file: " + path);
    ScenarioPool pool;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            pool.push_back(scenario_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("pool file " + path + " line " + std::to_string(line_no) +
                              ": " + e.what());
        }
    }
    return pool;
}

}  // namespace hostcap
