#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace hostcap {

struct Bus {
    std::string id;
};

struct Line {
    std::string from;
    std::string to;
    double r_pu = 0.0;
    double x_pu = 0.0;
    double s_max_pu = 0.0;
};

/// Daily baseline demand before any DER integration. Row b holds the profile
/// of the b-th bus in network order; units are kW / kvar.
struct BaselineProfiles {
    int T = 0;
    std::vector<std::vector<double>> d_kw;
    std::vector<std::vector<double>> e_kvar;
};

/// Single-phase positive-sequence equivalent of a radial feeder.
/// Voltage quantities are stored squared (p.u.^2); the loader squares the
/// plain-p.u. bounds found in network files. The first bus listed is the
/// substation (root).
struct Network {
    double base_kva = 100.0;
    double v_root = 1.0;    // squared
    double v_min = 0.9025;  // 0.95^2
    double v_max = 1.1025;  // 1.05^2
    std::string root_bus;
    std::vector<Bus> buses;
    std::vector<Line> lines;
    BaselineProfiles baseline;

    int bus_count() const { return static_cast<int>(buses.size()); }
    int line_count() const { return static_cast<int>(lines.size()); }

    /// Position of a bus id in the buses vector, or -1.
    int bus_index(const std::string& id) const {
        auto it = index_.find(id);
        return it == index_.end() ? -1 : it->second;
    }

    /// Rebuild the id -> position map. Called by the loader and by any code
    /// that assembles a Network by hand before using it.
    void reindex();

  private:
    std::unordered_map<std::string, int> index_;
};

struct ValidationReport {
    std::vector<std::string> problems;
    bool ok() const { return problems.empty(); }
};

/// Checks tree topology, impedance signs, bounds and baseline dimensions.
/// All problems are reported, none thrown.
ValidationReport validate_network(const Network& net);

/// Bus positions in root-to-leaf order (parent before child, children by
/// ascending bus id). Throws NotRadialError when validation fails.
std::vector<int> topological_order(const Network& net);

/// Loads the normative network JSON schema. Unknown keys are rejected.
Network load_network(const std::string& path);
Network network_from_json(const std::string& json_text);

}  // namespace hostcap
