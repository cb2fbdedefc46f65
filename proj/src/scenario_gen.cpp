#include "hostcap/scenario_gen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hostcap/errors.hpp"

namespace hostcap {

namespace {

void require_keys(const nlohmann::json& j, const char* where,
                  std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end())
            throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
}

std::vector<std::string> string_list(const nlohmann::json& j) {
    std::vector<std::string> out;
    for (const auto& v : j) out.push_back(v.get<std::string>());
    return out;
}

}  // namespace

PoolConfig pool_config_from_json(const nlohmann::json& j) {
    require_keys(j, "pool config",
                 {"mode", "ev", "pv", "colocate_pv_with_ev", "colocate_pv_kw",
                  "pool_size_target", "seed", "uniform_box"});
    PoolConfig cfg;
    const std::string mode = j.value("mode", std::string("sweep"));
    if (mode == "sweep")
        cfg.mode = PoolConfig::Mode::Sweep;
    else if (mode == "uniform_box")
        cfg.mode = PoolConfig::Mode::UniformBox;
    else
        throw ConfigError("pool config: unknown mode '" + mode + "'");

    if (j.contains("ev")) {
        const auto& e = j["ev"];
        require_keys(e, "pool config ev",
                     {"candidate_buses", "cluster", "lambda_lo", "lambda_hi", "lambda_step",
                      "n_ev_types", "charger_kw", "power_factor"});
        cfg.ev.enabled = true;
        if (e.contains("candidate_buses")) cfg.ev.candidate_buses = string_list(e["candidate_buses"]);
        cfg.ev.cluster = e.value("cluster", std::string());
        cfg.ev.lambda_lo = e.value("lambda_lo", cfg.ev.lambda_lo);
        cfg.ev.lambda_hi = e.value("lambda_hi", cfg.ev.lambda_lo);
        cfg.ev.lambda_step = e.value("lambda_step", cfg.ev.lambda_step);
        cfg.ev.n_ev_types = e.value("n_ev_types", cfg.ev.n_ev_types);
        cfg.ev.charger_kw = e.value("charger_kw", cfg.ev.charger_kw);
        cfg.ev.power_factor = e.value("power_factor", cfg.ev.power_factor);
    }
    if (j.contains("pv")) {
        const auto& p = j["pv"];
        require_keys(p, "pool config pv",
                     {"candidate_buses", "n_pv_lo", "n_pv_hi", "n_pv_step", "n_pv_types",
                      "plant_kw", "count_mode", "power_factor"});
        cfg.pv.enabled = true;
        if (p.contains("candidate_buses")) cfg.pv.candidate_buses = string_list(p["candidate_buses"]);
        cfg.pv.n_pv_lo = p.value("n_pv_lo", cfg.pv.n_pv_lo);
        cfg.pv.n_pv_hi = p.value("n_pv_hi", cfg.pv.n_pv_lo);
        cfg.pv.n_pv_step = p.value("n_pv_step", cfg.pv.n_pv_step);
        cfg.pv.n_pv_types = p.value("n_pv_types", cfg.pv.n_pv_types);
        cfg.pv.plant_kw = p.value("plant_kw", cfg.pv.plant_kw);
        cfg.pv.power_factor = p.value("power_factor", cfg.pv.power_factor);
        const std::string cm = p.value("count_mode", std::string("total"));
        if (cm == "total")
            cfg.pv.count_mode = PvGenConfig::CountMode::Total;
        else if (cm == "per_bus")
            cfg.pv.count_mode = PvGenConfig::CountMode::PerBus;
        else
            throw ConfigError("pool config pv: unknown count_mode '" + cm + "'");
    }
    cfg.colocate_pv_with_ev = j.value("colocate_pv_with_ev", false);
    cfg.colocate_pv_kw = j.value("colocate_pv_kw", cfg.colocate_pv_kw);
    cfg.pool_size_target = j.value("pool_size_target", cfg.pool_size_target);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("uniform_box")) {
        const auto& b = j["uniform_box"];
        require_keys(b, "pool config uniform_box",
                     {"buses", "lo_pu", "hi_pu", "profile_type", "power_factor"});
        cfg.box.buses = string_list(b.at("buses"));
        cfg.box.lo_pu = b.value("lo_pu", cfg.box.lo_pu);
        cfg.box.hi_pu = b.value("hi_pu", cfg.box.hi_pu);
        cfg.box.profile_type = b.value("profile_type", cfg.box.profile_type);
        cfg.box.power_factor = b.value("power_factor", cfg.box.power_factor);
    }
    return cfg;
}

PoolConfig load_pool_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open pool config: " + path);
    try {
        return pool_config_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("pool config " + path + " is malformed: " + e.what());
    }
}

std::vector<Cluster> clusters_from_json(const nlohmann::json& j) {
    require_keys(j, "clusters file", {"clusters"});
    std::vector<Cluster> out;
    for (const auto& cj : j.at("clusters")) {
        require_keys(cj, "cluster", {"id", "buses", "description"});
        Cluster c;
        c.id = cj.at("id").get<std::string>();
        c.buses = string_list(cj.at("buses"));
        c.description = cj.value("description", std::string());
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<Cluster> load_clusters(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open clusters file: " + path);
    try {
        return clusters_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("clusters file " + path + " is malformed: " + e.what());
    }
}

namespace {

const Cluster* find_cluster(const std::vector<Cluster>& clusters, const std::string& id) {
    for (const auto& c : clusters)
        if (c.id == id) return &c;
    return nullptr;
}

// EV candidates after applying any cluster restriction.
std::vector<std::string> resolve_ev_buses(const EvGenConfig& ev,
                                          const std::vector<Cluster>& clusters) {
    if (ev.cluster.empty()) return ev.candidate_buses;
    const Cluster* c = find_cluster(clusters, ev.cluster);
    if (!c) throw ConfigError("pool config references unknown cluster '" + ev.cluster + "'");
    if (ev.candidate_buses.empty()) return c->buses;
    std::vector<std::string> out;
    for (const auto& b : ev.candidate_buses)
        if (std::find(c->buses.begin(), c->buses.end(), b) != c->buses.end()) out.push_back(b);
    return out;
}

std::vector<double> lambda_grid(const EvGenConfig& ev) {
    std::vector<double> grid;
    if (!ev.enabled) return {0.0};
    for (double v = ev.lambda_lo; v <= ev.lambda_hi + 1e-9; v += ev.lambda_step) grid.push_back(v);
    return grid;
}

std::vector<int> n_pv_grid(const PvGenConfig& pv) {
    std::vector<int> grid;
    if (!pv.enabled) return {0};
    for (int v = pv.n_pv_lo; v <= pv.n_pv_hi; v += pv.n_pv_step) grid.push_back(v);
    return grid;
}

}  // namespace

std::vector<std::string> validate_pool_config(const PoolConfig& cfg, const Network& net,
                                              const std::vector<Cluster>& clusters) {
    std::vector<std::string> problems;
    auto check_buses = [&](const std::vector<std::string>& buses, const char* where) {
        for (const auto& b : buses)
            if (net.bus_index(b) < 0)
                problems.push_back(std::string(where) + " references unknown bus '" + b + "'");
    };

    if (cfg.pool_size_target < 1) problems.push_back("pool_size_target must be >= 1");
    if (cfg.mode == PoolConfig::Mode::UniformBox) {
        if (cfg.box.buses.empty()) problems.push_back("uniform_box needs at least one bus");
        if (cfg.box.lo_pu < 0.0 || cfg.box.hi_pu < cfg.box.lo_pu)
            problems.push_back("uniform_box bounds must satisfy 0 <= lo_pu <= hi_pu");
        check_buses(cfg.box.buses, "uniform_box");
        return problems;
    }

    if (!cfg.ev.enabled && !cfg.pv.enabled)
        problems.push_back("sweep mode needs an ev and/or pv section");
    if (cfg.ev.enabled) {
        if (!(cfg.ev.lambda_lo > 0.0) || !(cfg.ev.lambda_hi > 0.0))
            problems.push_back("lambda bounds must be > 0");
        if (cfg.ev.lambda_hi < cfg.ev.lambda_lo) problems.push_back("lambda_hi < lambda_lo");
        if (!(cfg.ev.lambda_step > 0.0)) problems.push_back("lambda_step must be > 0");
        if (cfg.ev.n_ev_types < 1) problems.push_back("n_ev_types must be >= 1");
        if (!(cfg.ev.charger_kw > 0.0)) problems.push_back("charger_kw must be > 0");
        check_buses(cfg.ev.candidate_buses, "ev candidates");
        if (!cfg.ev.cluster.empty() && !find_cluster(clusters, cfg.ev.cluster))
            problems.push_back("unknown cluster '" + cfg.ev.cluster + "'");
        try {
            if (resolve_ev_buses(cfg.ev, clusters).empty())
                problems.push_back("ev candidate bus set is empty");
        } catch (const ConfigError&) {
            // unknown cluster already reported
        }
    }
    if (cfg.pv.enabled) {
        if (cfg.pv.n_pv_lo < 0 || cfg.pv.n_pv_hi < cfg.pv.n_pv_lo)
            problems.push_back("n_pv range must satisfy 0 <= lo <= hi");
        if (cfg.pv.n_pv_step < 1) problems.push_back("n_pv_step must be >= 1");
        if (cfg.pv.n_pv_types < 1) problems.push_back("n_pv_types must be >= 1");
        if (!(cfg.pv.plant_kw > 0.0)) problems.push_back("plant_kw must be > 0");
        if (cfg.pv.candidate_buses.empty())
            problems.push_back("pv candidate bus set is empty");
        check_buses(cfg.pv.candidate_buses, "pv candidates");
    }
    return problems;
}

std::map<std::string, int> draw_adoption_counts(const std::vector<std::string>& buses,
                                                double lambda, Rng& rng) {
    if (!(lambda > 0.0)) throw ConfigError("adoption rate lambda must be > 0");
    std::map<std::string, int> counts;
    for (const auto& b : buses) counts[b] = rng.poisson(lambda);
    return counts;
}

std::vector<std::pair<std::string, int>> assign_profiles(const std::map<std::string, int>& counts,
                                                         int n_types, Rng& rng) {
    if (n_types < 1) throw ConfigError("n_types must be >= 1");
    std::vector<std::pair<std::string, int>> entries;
    for (const auto& [bus, count] : counts)
        for (int u = 0; u < count; ++u)
            entries.emplace_back(bus, static_cast<int>(rng.uniform_index(n_types)));
    return entries;
}

namespace {

// Merge per-unit entries into one location per (bus, profile type),
// emitted in sorted order for reproducible files.
void append_ev_locations(Scenario& s, const std::vector<std::pair<std::string, int>>& entries,
                         double power_factor) {
    std::map<std::pair<std::string, int>, double> merged;
    for (const auto& e : entries) merged[e] += 1.0;
    for (const auto& [key, count] : merged) {
        DerLocation loc;
        loc.bus = key.first;
        loc.kind = DerKind::EV;
        loc.count = count;
        loc.profile_type = key.second;
        loc.power_factor = power_factor;
        s.locations.push_back(std::move(loc));
    }
}

void append_pv_locations(Scenario& s, const std::map<std::pair<std::string, int>, double>& merged,
                         double power_factor) {
    for (const auto& [key, kw] : merged) {
        DerLocation loc;
        loc.bus = key.first;
        loc.kind = DerKind::PV;
        loc.kw = kw;
        loc.profile_type = key.second;
        loc.power_factor = power_factor;
        s.locations.push_back(std::move(loc));
    }
}

}  // namespace

ScenarioPool generate_pool(const PoolConfig& cfg, const Network& net,
                           const std::vector<Cluster>& clusters, Rng& rng) {
    {
        const auto problems = validate_pool_config(cfg, net, clusters);
        if (!problems.empty()) throw ConfigError("pool config invalid: " + problems.front());
    }

    ScenarioPool pool;
    long next_id = 0;

    if (cfg.mode == PoolConfig::Mode::UniformBox) {
        pool.reserve(cfg.pool_size_target);
        for (long i = 0; i < cfg.pool_size_target; ++i) {
            Scenario s;
            s.id = next_id++;
            s.meta.n_ev_types = 1;
            for (const auto& bus : cfg.box.buses) {
                DerLocation loc;
                loc.bus = bus;
                loc.kind = DerKind::EV;
                // Store the per-unit draw as an equivalent charger count so
                // effective kW = draw * base regardless of the rating.
                loc.count = rng.uniform(cfg.box.lo_pu, cfg.box.hi_pu) * net.base_kva /
                            cfg.ev.charger_kw;
                loc.profile_type = cfg.box.profile_type;
                loc.power_factor = cfg.box.power_factor;
                s.locations.push_back(std::move(loc));
            }
            pool.push_back(std::move(s));
        }
        return pool;
    }

    const std::vector<std::string> ev_buses = resolve_ev_buses(cfg.ev, clusters);
    const std::vector<double> lambdas = lambda_grid(cfg.ev);
    const std::vector<int> n_pvs = n_pv_grid(cfg.pv);
    const long points = static_cast<long>(lambdas.size()) * static_cast<long>(n_pvs.size());
    const long per_point = (cfg.pool_size_target + points - 1) / points;

    pool.reserve(points * per_point);
    for (double lambda : lambdas) {
        for (int n_pv : n_pvs) {
            for (long d = 0; d < per_point; ++d) {
                Scenario s;
                s.id = next_id++;
                s.meta.lambda = cfg.ev.enabled ? lambda : 0.0;
                s.meta.n_pv = n_pv;
                s.meta.cluster = cfg.ev.cluster;
                s.meta.n_ev_types = cfg.ev.enabled ? cfg.ev.n_ev_types : 0;

                std::vector<std::pair<std::string, int>> ev_entries;
                if (cfg.ev.enabled) {
                    const auto counts = draw_adoption_counts(ev_buses, lambda, rng);
                    ev_entries = assign_profiles(counts, cfg.ev.n_ev_types, rng);
                    append_ev_locations(s, ev_entries, cfg.ev.power_factor);
                }

                std::map<std::pair<std::string, int>, double> pv_merged;
                if (cfg.pv.enabled) {
                    if (cfg.pv.count_mode == PvGenConfig::CountMode::Total) {
                        for (int plant = 0; plant < n_pv; ++plant) {
                            const auto& bus = cfg.pv.candidate_buses[rng.uniform_index(
                                cfg.pv.candidate_buses.size())];
                            const int type = static_cast<int>(rng.uniform_index(cfg.pv.n_pv_types));
                            pv_merged[{bus, type}] += cfg.pv.plant_kw;
                        }
                    } else {
                        for (const auto& bus : cfg.pv.candidate_buses) {
                            const int cnt = static_cast<int>(rng.uniform_index(n_pv + 1));
                            for (int plant = 0; plant < cnt; ++plant) {
                                const int type =
                                    static_cast<int>(rng.uniform_index(cfg.pv.n_pv_types));
                                pv_merged[{bus, type}] += cfg.pv.plant_kw;
                            }
                        }
                    }
                }
                if (cfg.colocate_pv_with_ev) {
                    const int pv_types = cfg.pv.enabled ? cfg.pv.n_pv_types : 1;
                    for (const auto& [bus, type] : ev_entries) {
                        const int pv_type = static_cast<int>(rng.uniform_index(pv_types));
                        pv_merged[{bus, pv_type}] += cfg.colocate_pv_kw;
                    }
                }
                append_pv_locations(s, pv_merged, cfg.pv.power_factor);
                pool.push_back(std::move(s));
            }
        }
    }
    return pool;
}

}  // namespace hostcap
