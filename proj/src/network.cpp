#include "hostcap/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

#include "hostcap/errors.hpp"

namespace hostcap {

void Network::reindex() {
    index_.clear();
    index_.reserve(buses.size());
    for (int i = 0; i < static_cast<int>(buses.size()); ++i) {
        index_.emplace(buses[i].id, i);
    }
    if (!buses.empty()) root_bus = buses.front().id;
}

ValidationReport validate_network(const Network& net) {
    ValidationReport rep;
    const int nb = net.bus_count();
    const int nl = net.line_count();

    if (nb == 0) {
        rep.problems.push_back("network has no buses");
        return rep;
    }

    {
        std::vector<std::string> ids;
        ids.reserve(net.buses.size());
        for (const auto& b : net.buses) ids.push_back(b.id);
        std::sort(ids.begin(), ids.end());
        for (size_t i = 1; i < ids.size(); ++i) {
            if (ids[i] == ids[i - 1]) {
                rep.problems.push_back("duplicate bus id '" + ids[i] + "'");
            }
        }
        for (const auto& b : net.buses) {
            if (b.id.empty()) rep.problems.push_back("empty bus id");
        }
    }

    if (nl != nb - 1) {
        rep.problems.push_back("line count " + std::to_string(nl) +
                               " does not match bus count " + std::to_string(nb) +
                               " minus one (not a tree)");
    }

    bool endpoints_ok = true;
    for (const auto& ln : net.lines) {
        if (net.bus_index(ln.from) < 0) {
            rep.problems.push_back("line endpoint '" + ln.from + "' is not a bus");
            endpoints_ok = false;
        }
        if (net.bus_index(ln.to) < 0) {
            rep.problems.push_back("line endpoint '" + ln.to + "' is not a bus");
            endpoints_ok = false;
        }
        if (ln.from == ln.to) {
            rep.problems.push_back("line from '" + ln.from + "' to itself");
            endpoints_ok = false;
        }
        if (ln.r_pu < 0.0) {
            rep.problems.push_back("line " + ln.from + "->" + ln.to +
                                   " has negative resistance");
        }
        if (!std::isfinite(ln.r_pu) || !std::isfinite(ln.x_pu)) {
            rep.problems.push_back("line " + ln.from + "->" + ln.to +
                                   " has non-finite impedance");
        }
        if (!(ln.s_max_pu > 0.0)) {
            rep.problems.push_back("line " + ln.from + "->" + ln.to +
                                   " has non-positive thermal rating");
        }
    }

    // Connectivity check: BFS over the undirected line graph from the root.
    if (endpoints_ok && nl == nb - 1) {
        std::vector<std::vector<int>> adj(nb);
        for (const auto& ln : net.lines) {
            const int a = net.bus_index(ln.from);
            const int b = net.bus_index(ln.to);
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        std::vector<char> seen(nb, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int reached = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : adj[u]) {
                if (!seen[v]) {
                    seen[v] = 1;
                    ++reached;
                    stack.push_back(v);
                }
            }
        }
        if (reached != nb) {
            rep.problems.push_back(
                "not radial: " + std::to_string(nb - reached) +
                " disconnected bus(es) (cycle detected or isolated)");
        }
    }

    if (!(net.v_min < net.v_max)) {
        rep.problems.push_back("voltage band is empty (v_min >= v_max)");
    }
    if (!(net.v_root > 0.0)) {
        rep.problems.push_back("root voltage must be positive");
    }
    if (!(net.base_kva > 0.0)) {
        rep.problems.push_back("base_kva must be positive");
    }

    const auto& bl = net.baseline;
    if (bl.T < 1) {
        rep.problems.push_back("baseline horizon must be at least 1 step");
    }
    if (static_cast<int>(bl.d_kw.size()) != nb ||
        static_cast<int>(bl.e_kvar.size()) != nb) {
        rep.problems.push_back("baseline demand rows do not match bus count");
    } else {
        bool done_d = false;
        for (int b = 0; b < nb && !done_d; ++b) {
            if (static_cast<int>(bl.d_kw[b].size()) != bl.T ||
                static_cast<int>(bl.e_kvar[b].size()) != bl.T) {
                rep.problems.push_back("baseline demand row for bus '" +
                                       net.buses[b].id +
                                       "' does not span the horizon");
                break;
            }
            for (int t = 0; t < bl.T; ++t) {
                if (bl.d_kw[b][t] < 0.0) {
                    rep.problems.push_back("baseline demand is negative at bus '" +
                                           net.buses[b].id + "'");
                    done_d = true;
                    break;
                }
            }
        }
    }

    return rep;
}

std::vector<int> topological_order(const Network& net) {
    auto rep = validate_network(net);
    if (!rep.ok()) {
        std::string msg = "invalid network:";
        for (const auto& p : rep.problems) msg += "\n  - " + p;
        throw NotRadialError(msg);
    }

    const int nb = net.bus_count();
    std::vector<std::vector<int>> adj(nb);
    for (const auto& ln : net.lines) {
        const int a = net.bus_index(ln.from);
        const int b = net.bus_index(ln.to);
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& nbrs : adj) {
        std::sort(nbrs.begin(), nbrs.end(), [&](int a, int b) {
            return net.buses[a].id < net.buses[b].id;
        });
    }

    std::vector<int> order;
    order.reserve(nb);
    std::vector<char> seen(nb, 0);
    // Iterative DFS; reversed push keeps children visited in ascending id.
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        order.push_back(u);
        for (auto it = adj[u].rbegin(); it != adj[u].rend(); ++it) {
            if (!seen[*it]) {
                seen[*it] = 1;
                stack.push_back(*it);
            }
        }
    }
    return order;
}

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::vector<std::string>& allowed,
                  const std::vector<std::string>& required,
                  const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
        }
    }
    for (const auto& k : required) {
        if (!obj.contains(k)) {
            throw ConfigError("missing key '" + k + "' in " + where);
        }
    }
}

std::string id_string(const json& j, const std::string& where) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    throw ConfigError("bus id in " + where + " must be a string or integer");
}

Network parse_network(const json& j) {
    if (!j.is_object()) throw ConfigError("network JSON root must be an object");
    require_keys(j,
                 {"base_kva", "v_root_pu", "v_min_pu", "v_max_pu", "buses",
                  "lines", "baseline"},
                 {"buses", "lines"}, "network");

    Network net;
    if (j.contains("base_kva")) net.base_kva = j.at("base_kva").get<double>();
    const double v_root_pu =
        j.contains("v_root_pu") ? j.at("v_root_pu").get<double>() : 1.0;
    const double v_min_pu =
        j.contains("v_min_pu") ? j.at("v_min_pu").get<double>() : 0.95;
    const double v_max_pu =
        j.contains("v_max_pu") ? j.at("v_max_pu").get<double>() : 1.05;
    net.v_root = v_root_pu * v_root_pu;
    net.v_min = v_min_pu * v_min_pu;
    net.v_max = v_max_pu * v_max_pu;

    if (!j.at("buses").is_array() || j.at("buses").empty()) {
        throw ConfigError("network needs a non-empty 'buses' array");
    }
    for (const auto& jb : j.at("buses")) {
        if (!jb.is_object()) throw ConfigError("bus entries must be objects");
        require_keys(jb, {"id"}, {"id"}, "bus");
        net.buses.push_back(Bus{id_string(jb.at("id"), "bus")});
    }

    if (!j.at("lines").is_array()) {
        throw ConfigError("network needs a 'lines' array");
    }
    for (const auto& jl : j.at("lines")) {
        if (!jl.is_object()) throw ConfigError("line entries must be objects");
        require_keys(jl, {"from", "to", "r_pu", "x_pu", "s_max_pu"},
                     {"from", "to", "r_pu", "x_pu", "s_max_pu"}, "line");
        Line ln;
        ln.from = id_string(jl.at("from"), "line");
        ln.to = id_string(jl.at("to"), "line");
        ln.r_pu = jl.at("r_pu").get<double>();
        ln.x_pu = jl.at("x_pu").get<double>();
        ln.s_max_pu = jl.at("s_max_pu").get<double>();
        net.lines.push_back(std::move(ln));
    }

    net.reindex();

    const int nb = net.bus_count();
    if (j.contains("baseline")) {
        const auto& jb = j.at("baseline");
        require_keys(jb, {"T", "d_kw", "e_kvar"}, {"T", "d_kw", "e_kvar"},
                     "baseline");
        net.baseline.T = jb.at("T").get<int>();
        net.baseline.d_kw = jb.at("d_kw").get<std::vector<std::vector<double>>>();
        net.baseline.e_kvar =
            jb.at("e_kvar").get<std::vector<std::vector<double>>>();
    } else {
        net.baseline.T = 1;
        net.baseline.d_kw.assign(nb, std::vector<double>(1, 0.0));
        net.baseline.e_kvar.assign(nb, std::vector<double>(1, 0.0));
    }

    auto rep = validate_network(net);
    if (!rep.ok()) {
        std::string msg = "invalid network:";
        for (const auto& p : rep.problems) msg += "\n  - " + p;
        throw ConfigError(msg);
    }
    return net;
}

}  // namespace

Network network_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("network JSON malformed: ") + e.what());
    }
    return parse_network(j);
}

Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open network file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return network_from_json(ss.str());
}

}  // namespace hostcap
