#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hostcap/distflow.hpp"
#include "hostcap/network.hpp"
#include "hostcap/scenario.hpp"

namespace hostcap {

enum class ViolationKind { Undervoltage, Overvoltage, LineThermal, SolverDiverged };

std::string to_string(ViolationKind kind);

/// One recorded constraint violation at one time step. Voltage magnitudes
/// are in volts p.u. (distance past the limit); thermal magnitudes are the
/// loading fraction in excess of 1.
struct Violation {
    int t = 0;
    ViolationKind kind = ViolationKind::Undervoltage;
    std::string element;  // bus id, line "from->to", or "solver"
    double magnitude = 0.0;
};

struct FeasibilityVerdict {
    int label = 0;                        // 1 iff pass_fraction >= eps_bar
    double pass_fraction = 0.0;           // passing steps / T
    std::vector<std::uint8_t> per_step;   // 1 = step passed (0 for steps skipped by early exit)
    std::vector<Violation> worst_violations;  // worst violation of each failing step
};

struct OracleConfig {
    double eps_bar = 1.0;     // minimum passing fraction for a feasible label
    double charger_kw = 1.92; // EV count -> kW conversion
    double tol = kDefaultTol;
    int max_iter = kDefaultMaxIter;
    // Stop evaluating once enough steps failed that the label is settled.
    // The label is unaffected; pass_fraction then reflects only evaluated
    // steps (skipped steps count as failing).
    bool early_exit = true;
};

/// Per-element violation counts aggregated over many evaluations, for
/// report output. Keys are bus ids / line "from->to" strings.
struct ViolationHistogram {
    std::map<std::string, long> undervoltage_by_bus;
    std::map<std::string, long> overvoltage_by_bus;
    std::map<std::string, long> thermal_by_line;
    long diverged_steps = 0;

    void add(const Violation& v);
    void merge(const ViolationHistogram& other);
    long total() const;
};

/// Net nodal injections (kW / kvar, load negative) for one step: baseline
/// load plus every DER location's profile-scaled output. Reactive output
/// follows the fixed power factor: q_der = tan(acos(pf)) * p_der.
void apply_scenario(const Network& net, const Scenario& s, const ProfileSet& ev_profiles,
                    const ProfileSet& pv_profiles, int t, double charger_kw,
                    std::vector<double>& p_kw, std::vector<double>& q_kvar);

/// Solves one step and checks voltage band and line ratings. Returns pass;
/// appends every violation found (divergence is recorded as a single
/// violation and skips the constraint checks).
bool evaluate_timestep(DistFlowSolver& solver, const Scenario& s, const ProfileSet& ev_profiles,
                       const ProfileSet& pv_profiles, int t, const OracleConfig& cfg,
                       std::vector<Violation>* violations = nullptr);

/// Full time-series evaluation with threshold aggregation. `hist`, when
/// given, accumulates every violation of every evaluated step.
FeasibilityVerdict evaluate_scenario(DistFlowSolver& solver, const Scenario& s,
                                     const ProfileSet& ev_profiles, const ProfileSet& pv_profiles,
                                     const OracleConfig& cfg, ViolationHistogram* hist = nullptr);
FeasibilityVerdict evaluate_scenario(const Network& net, const Scenario& s,
                                     const ProfileSet& ev_profiles, const ProfileSet& pv_profiles,
                                     const OracleConfig& cfg, ViolationHistogram* hist = nullptr);

/// Evaluates many scenarios, optionally across worker threads (each worker
/// owns a solver). Results are slotted by pool position, so the output is
/// independent of scheduling; histogram merge order is fixed by worker id.
std::vector<FeasibilityVerdict> evaluate_batch(const Network& net, const ScenarioPool& pool,
                                               const ProfileSet& ev_profiles,
                                               const ProfileSet& pv_profiles,
                                               const OracleConfig& cfg, int workers = 1,
                                               ViolationHistogram* hist = nullptr);

}  // namespace hostcap
