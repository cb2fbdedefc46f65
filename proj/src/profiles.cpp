#include "hostcap/profiles.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hostcap/errors.hpp"

namespace hostcap {

std::string to_string(DerKind kind) { return kind == DerKind::EV ? "EV" : "PV"; }

DerKind der_kind_from_string(const std::string& s) {
    if (s == "EV" || s == "ev") return DerKind::EV;
    if (s == "PV" || s == "pv") return DerKind::PV;
    throw ConfigError("unknown DER kind '" + s + "' (expected EV or PV)");
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// Hours covered by step t of a T-step day, as [start, start+dt).
double step_start_hour(int t, int T) { return 24.0 * t / T; }

bool hour_in_window(double h, double start, double hours) {
    // Window may wrap past midnight; compare on the circle.
    double rel = std::fmod(h - start + 48.0, 24.0);
    return rel < hours;
}

}  // namespace

ProfileSet synth_profiles(DerKind kind, int n_types, int T, const SynthParams& params, Rng& rng) {
    if (n_types < 1) throw ConfigError("synth_profiles: n_types must be >= 1");
    if (T < 1) throw ConfigError("synth_profiles: T must be >= 1");

    ProfileSet out;
    out.kind = kind;
    out.T = T;
    out.shapes.assign(n_types, std::vector<double>(T, 0.0));

    if (kind == DerKind::EV) {
        for (int k = 0; k < n_types; ++k) {
            const double start = std::fmod(params.ev_start_hour + k * params.ev_window_hours, 24.0);
            for (int t = 0; t < T; ++t) {
                if (hour_in_window(step_start_hour(t, T), start, params.ev_window_hours))
                    out.shapes[k][t] = -params.ev_depth;
            }
        }
    } else {
        const double noon = 0.5 * (params.pv_dawn_hour + params.pv_dusk_hour);
        const double half = 0.5 * (params.pv_dusk_hour - params.pv_dawn_hour);
        for (int k = 0; k < n_types; ++k) {
            const double frac = n_types == 1 ? 0.0 : static_cast<double>(k) / (n_types - 1);
            const double amp = params.pv_amp_hi - frac * (params.pv_amp_hi - params.pv_amp_lo);
            for (int t = 0; t < T; ++t) {
                const double h = step_start_hour(t, T);
                if (h <= params.pv_dawn_hour || h >= params.pv_dusk_hour) continue;
                const double c = std::cos(0.5 * kPi * (h - noon) / half);
                double v = amp * c * c;
                if (params.pv_noise > 0.0)
                    v *= std::max(0.0, 1.0 + params.pv_noise * rng.normal());
                out.shapes[k][t] = v;
            }
        }
    }
    return out;
}

namespace {

void check_signs(const ProfileSet& ps) {
    for (std::size_t k = 0; k < ps.shapes.size(); ++k) {
        for (double v : ps.shapes[k]) {
            if (!std::isfinite(v))
                throw ConfigError("profile type " + std::to_string(k) + " has a non-finite value");
            if (ps.kind == DerKind::PV && v < 0.0)
                throw ConfigError("PV profile type " + std::to_string(k) +
                                  " has a negative value; PV shapes must be >= 0");
            if (ps.kind == DerKind::EV && v > 0.0)
                throw ConfigError("EV profile type " + std::to_string(k) +
                                  " has a positive value; EV shapes must be <= 0 "
                                  "(load with --negate if recorded as consumption)");
        }
    }
}

}  // namespace

ProfileSet profiles_from_csv(const std::string& text, DerKind kind, bool negate) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("profile CSV is empty");

    // Header: type_id,t0,t1,...
    std::istringstream hs(line);
    std::string cell;
    if (!std::getline(hs, cell, ',') || cell != "type_id")
        throw ConfigError("profile CSV header must start with 'type_id'");
    int T = 0;
    while (std::getline(hs, cell, ',')) {
        if (cell != "t" + std::to_string(T))
            throw ConfigError("profile CSV header column " + std::to_string(T + 1) +
                              " is '" + cell + "', expected 't" + std::to_string(T) + "'");
        ++T;
    }
    if (T == 0) throw ConfigError("profile CSV header declares no time steps");

    ProfileSet out;
    out.kind = kind;
    out.T = T;
    int expected_id = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> row;
        row.reserve(T);
        if (!std::getline(ls, cell, ','))
            throw ConfigError("profile CSV row " + std::to_string(expected_id) + " is malformed");
        if (std::stoi(cell) != expected_id)
            throw ConfigError("profile CSV rows must carry consecutive type ids from 0; row " +
                              std::to_string(expected_id) + " has type_id " + cell);
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (static_cast<int>(row.size()) != T)
            throw ConfigError("profile CSV row " + std::to_string(expected_id) + " has " +
                              std::to_string(row.size()) + " values, expected " + std::to_string(T));
        if (negate)
            for (double& v : row) v = -v;
        out.shapes.push_back(std::move(row));
        ++expected_id;
    }
    if (out.shapes.empty()) throw ConfigError("profile CSV has no data rows");
    check_signs(out);
    return out;
}

ProfileSet load_profiles(const std::string& path, DerKind kind, bool negate) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open profile CSV: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return profiles_from_csv(buf.str(), kind, negate);
}

void save_profiles(const ProfileSet& profiles, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write profile CSV: " + path);
    out << "type_id";
    for (int t = 0; t < profiles.T; ++t) out << ",t" << t;
    out << "\n";
    char buf[32];
    for (int k = 0; k < profiles.type_count(); ++k) {
        out << k;
        for (double v : profiles.shapes[k]) {
            std::snprintf(buf, sizeof buf, "%.12g", v);
            out << ',' << buf;
        }
        out << "\n";
    }
}

}  // namespace hostcap
