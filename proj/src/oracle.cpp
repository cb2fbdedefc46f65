#include "hostcap/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "hostcap/errors.hpp"

namespace hostcap {

std::string to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::Undervoltage: return "undervoltage";
        case ViolationKind::Overvoltage: return "overvoltage";
        case ViolationKind::LineThermal: return "line_thermal";
        case ViolationKind::SolverDiverged: return "solver_diverged";
    }
    return "unknown";
}

void ViolationHistogram::add(const Violation& v) {
    switch (v.kind) {
        case ViolationKind::Undervoltage: ++undervoltage_by_bus[v.element]; break;
        case ViolationKind::Overvoltage: ++overvoltage_by_bus[v.element]; break;
        case ViolationKind::LineThermal: ++thermal_by_line[v.element]; break;
        case ViolationKind::SolverDiverged: ++diverged_steps; break;
    }
}

void ViolationHistogram::merge(const ViolationHistogram& other) {
    for (const auto& [k, n] : other.undervoltage_by_bus) undervoltage_by_bus[k] += n;
    for (const auto& [k, n] : other.overvoltage_by_bus) overvoltage_by_bus[k] += n;
    for (const auto& [k, n] : other.thermal_by_line) thermal_by_line[k] += n;
    diverged_steps += other.diverged_steps;
}

long ViolationHistogram::total() const {
    long n = diverged_steps;
    for (const auto& [k, c] : undervoltage_by_bus) n += c;
    for (const auto& [k, c] : overvoltage_by_bus) n += c;
    for (const auto& [k, c] : thermal_by_line) n += c;
    return n;
}

void apply_scenario(const Network& net, const Scenario& s, const ProfileSet& ev_profiles,
                    const ProfileSet& pv_profiles, int t, double charger_kw,
                    std::vector<double>& p_kw, std::vector<double>& q_kvar) {
    const int nb = net.bus_count();
    const int T = net.baseline.T;
    if (t < 0 || t >= T) throw DimensionMismatch("time step out of range");
    p_kw.assign(nb, 0.0);
    q_kvar.assign(nb, 0.0);
    for (int b = 0; b < nb; ++b) {
        p_kw[b] = -net.baseline.d_kw[b][t];
        q_kvar[b] = -net.baseline.e_kvar[b][t];
    }
    for (const auto& loc : s.locations) {
        const int b = net.bus_index(loc.bus);
        if (b < 0) throw DimensionMismatch("scenario " + std::to_string(s.id) +
                                           " references unknown bus '" + loc.bus + "'");
        const ProfileSet& ps = loc.kind == DerKind::EV ? ev_profiles : pv_profiles;
        if (ps.T != T)
            throw DimensionMismatch(to_string(loc.kind) + " profile length " +
                                    std::to_string(ps.T) + " does not match baseline T = " +
                                    std::to_string(T));
        if (loc.profile_type < 0 || loc.profile_type >= ps.type_count())
            throw DimensionMismatch("scenario " + std::to_string(s.id) + " uses " +
                                    to_string(loc.kind) + " profile type " +
                                    std::to_string(loc.profile_type) + " but the library has " +
                                    std::to_string(ps.type_count()) + " types");
        const double size_kw = loc.kind == DerKind::EV ? loc.count * charger_kw + loc.kw : loc.kw;
        const double p = ps.shapes[loc.profile_type][t] * size_kw;
        p_kw[b] += p;
        q_kvar[b] += std::tan(std::acos(loc.power_factor)) * p;
    }
}

bool evaluate_timestep(DistFlowSolver& solver, const Scenario& s, const ProfileSet& ev_profiles,
                       const ProfileSet& pv_profiles, int t, const OracleConfig& cfg,
                       std::vector<Violation>* violations) {
    const Network& net = solver.network();
    std::vector<double> p_kw, q_kvar;
    apply_scenario(net, s, ev_profiles, pv_profiles, t, cfg.charger_kw, p_kw, q_kvar);
    const PowerFlowSolution sol = solver.solve(p_kw, q_kvar, cfg.tol, cfg.max_iter);

    if (!sol.converged) {
        if (violations)
            violations->push_back({t, ViolationKind::SolverDiverged, "solver",
                                   std::numeric_limits<double>::infinity()});
        return false;
    }

    bool pass = true;
    const double v_lo = std::sqrt(net.v_min);
    const double v_hi = std::sqrt(net.v_max);
    for (int b = 0; b < net.bus_count(); ++b) {
        const double vm = std::sqrt(sol.v[b]);
        if (vm < v_lo) {
            pass = false;
            if (violations)
                violations->push_back({t, ViolationKind::Undervoltage, net.buses[b].id, v_lo - vm});
        } else if (vm > v_hi) {
            pass = false;
            if (violations)
                violations->push_back({t, ViolationKind::Overvoltage, net.buses[b].id, vm - v_hi});
        }
    }
    for (int e = 0; e < net.line_count(); ++e) {
        const Line& ln = net.lines[e];
        const double s2 = sol.p_flow[e] * sol.p_flow[e] + sol.q_flow[e] * sol.q_flow[e];
        if (s2 > ln.s_max_pu * ln.s_max_pu) {
            pass = false;
            if (violations)
                violations->push_back({t, ViolationKind::LineThermal, ln.from + "->" + ln.to,
                                       std::sqrt(s2) / ln.s_max_pu - 1.0});
        }
    }
    return pass;
}

FeasibilityVerdict evaluate_scenario(DistFlowSolver& solver, const Scenario& s,
                                     const ProfileSet& ev_profiles, const ProfileSet& pv_profiles,
                                     const OracleConfig& cfg, ViolationHistogram* hist) {
    if (cfg.eps_bar < 0.0 || cfg.eps_bar > 1.0)
        throw ConfigError("eps_bar must lie in [0, 1]");
    const int T = solver.network().baseline.T;
    FeasibilityVerdict verdict;
    verdict.per_step.assign(T, 0);

    int passes = 0;
    std::vector<Violation> step_violations;
    for (int t = 0; t < T; ++t) {
        // Even if every remaining step passed, the threshold is out of
        // reach: the label is settled as infeasible.
        if (cfg.early_exit &&
            static_cast<double>(passes + (T - t)) / T < cfg.eps_bar)
            break;
        step_violations.clear();
        const bool pass = evaluate_timestep(solver, s, ev_profiles, pv_profiles, t, cfg,
                                            &step_violations);
        verdict.per_step[t] = pass ? 1 : 0;
        passes += pass ? 1 : 0;
        if (!pass) {
            const auto worst = std::max_element(
                step_violations.begin(), step_violations.end(),
                [](const Violation& a, const Violation& b) { return a.magnitude < b.magnitude; });
            verdict.worst_violations.push_back(*worst);
        }
        if (hist)
            for (const auto& v : step_violations) hist->add(v);
    }
    verdict.pass_fraction = static_cast<double>(passes) / T;
    verdict.label = verdict.pass_fraction >= cfg.eps_bar ? 1 : 0;
    return verdict;
}

FeasibilityVerdict evaluate_scenario(const Network& net, const Scenario& s,
                                     const ProfileSet& ev_profiles, const ProfileSet& pv_profiles,
                                     const OracleConfig& cfg, ViolationHistogram* hist) {
    DistFlowSolver solver(net);
    return evaluate_scenario(solver, s, ev_profiles, pv_profiles, cfg, hist);
}

std::vector<FeasibilityVerdict> evaluate_batch(const Network& net, const ScenarioPool& pool,
                                               const ProfileSet& ev_profiles,
                                               const ProfileSet& pv_profiles,
                                               const OracleConfig& cfg, int workers,
                                               ViolationHistogram* hist) {
    std::vector<FeasibilityVerdict> out(pool.size());
    const int W = std::max(1, std::min<int>(workers, static_cast<int>(pool.size())));
    if (W <= 1) {
        DistFlowSolver solver(net);
        for (std::size_t i = 0; i < pool.size(); ++i)
            out[i] = evaluate_scenario(solver, pool[i], ev_profiles, pv_profiles, cfg, hist);
        return out;
    }

    std::vector<ViolationHistogram> worker_hists(hist ? W : 0);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(W);
    for (int w = 0; w < W; ++w) {
        threads.emplace_back([&, w] {
            try {
                DistFlowSolver solver(net);
                ViolationHistogram* wh = hist ? &worker_hists[w] : nullptr;
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= pool.size()) break;
                    out[i] = evaluate_scenario(solver, pool[i], ev_profiles, pv_profiles, cfg, wh);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    if (first_error) std::rethrow_exception(first_error);
    if (hist)
        for (const auto& wh : worker_hists) hist->merge(wh);
    return out;
}

}  // namespace hostcap
