#pragma once

#include <string>
#include <vector>

#include "hostcap/rng.hpp"

namespace hostcap {

enum class DerKind { EV, PV };

std::string to_string(DerKind kind);
DerKind der_kind_from_string(const std::string& s);

/// Library of per-unit behavior shapes for one DER kind. Each row is one
/// behavior type over T steps, expressed as a multiplier of installed
/// capacity under the net-injection sign convention: PV rows are >= 0
/// (generation), EV rows <= 0 (consumption).
struct ProfileSet {
    DerKind kind = DerKind::EV;
    int T = 0;
    std::vector<std::vector<double>> shapes;  // [type][T]

    int type_count() const { return static_cast<int>(shapes.size()); }
};

/// Knobs for the synthetic shape generator. EV types are rectangular
/// charging windows tiled back-to-back from `ev_start_hour`, so a library
/// with more types spreads charging over more of the day (smaller
/// worst-step coincidence). PV types are clear-sky bells over
/// [pv_dawn_hour, pv_dusk_hour] with amplitudes stepping down from
/// pv_amp_hi to pv_amp_lo across types, plus optional multiplicative noise.
struct SynthParams {
    double ev_window_hours = 2.0;
    double ev_start_hour = 17.0;
    double ev_depth = 1.0;  // p.u. of charger rating while charging
    double pv_amp_hi = 1.0;
    double pv_amp_lo = 0.6;
    double pv_dawn_hour = 6.0;
    double pv_dusk_hour = 18.0;
    double pv_noise = 0.0;  // stddev of multiplicative jitter, 0 = smooth
};

ProfileSet synth_profiles(DerKind kind, int n_types, int T, const SynthParams& params, Rng& rng);

/// CSV ingestion: header `type_id,t0,...,t{T-1}`, one row per type.
/// `negate` flips the sign of every value on load (for EV data recorded as
/// positive consumption). Sign convention is enforced after any negation.
ProfileSet load_profiles(const std::string& path, DerKind kind, bool negate = false);
ProfileSet profiles_from_csv(const std::string& text, DerKind kind, bool negate = false);
void save_profiles(const ProfileSet& profiles, const std::string& path);

}  // namespace hostcap
