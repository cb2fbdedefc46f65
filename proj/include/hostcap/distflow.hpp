#pragma once

#include <span>
#include <vector>

#include "hostcap/network.hpp"

namespace hostcap {

/// One time-step branch-flow solution. Buses and lines follow network order;
/// flows are sending-end values at the parent bus of each line.
struct PowerFlowSolution {
    std::vector<double> v;       // squared voltage magnitude per bus, p.u.^2
    std::vector<double> p_flow;  // real flow per line, p.u.
    std::vector<double> q_flow;  // reactive flow per line, p.u.
    std::vector<double> l;       // squared current magnitude per line, p.u.
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;  // max equation violation at exit, p.u.
};

inline constexpr double kDefaultTol = 1e-8;
inline constexpr int kDefaultMaxIter = 100;

/// Squared-voltage floor below which the sweep declares the operating point
/// collapsed (0.5 p.u.); any such point is infeasible for the oracle anyway.
inline constexpr double kCollapseV2 = 0.25;

/// Reusable sweep solver: the tree structure and scratch buffers are built
/// once per network so repeated time-step solves stay allocation-free.
/// Not shareable across threads; each worker builds its own.
class DistFlowSolver {
  public:
    explicit DistFlowSolver(const Network& net);

    /// Exact branch-flow solve by backward/forward sweep fixed point.
    /// Injections are net values in kW/kvar (loads negative); the solver
    /// converts to per-unit on the network base.
    PowerFlowSolution solve(std::span<const double> p_kw, std::span<const double> q_kvar,
                            double tol = kDefaultTol, int max_iter = kDefaultMaxIter);

    /// Linearized variant: one sweep with squared currents pinned to zero.
    /// Always reports converged; the residual field carries the largest
    /// neglected squared current as a loss-magnitude indicator.
    PowerFlowSolution solve_linear(std::span<const double> p_kw, std::span<const double> q_kvar);

    const Network& network() const { return *net_; }

    /// Line index feeding bus position b (-1 for the root), and the parent
    /// bus position of each line. Exposed for constraint checking layers.
    const std::vector<int>& parent_line() const { return parent_line_; }
    const std::vector<int>& line_parent_bus() const { return line_parent_bus_; }

  private:
    void accumulate_flows(PowerFlowSolution& sol);

    const Network* net_;
    std::vector<int> order_;            // bus positions, root first
    std::vector<int> parent_bus_;       // per bus position
    std::vector<int> parent_line_;      // per bus position
    std::vector<int> line_parent_bus_;  // per line
    std::vector<int> line_child_bus_;   // per line
    std::vector<double> p_pu_, q_pu_, sum_p_, sum_q_, l_next_;
};

/// One-shot wrappers.
PowerFlowSolution solve_distflow(const Network& net, std::span<const double> p_kw,
                                 std::span<const double> q_kvar, double tol = kDefaultTol,
                                 int max_iter = kDefaultMaxIter);
PowerFlowSolution solve_lindistflow(const Network& net, std::span<const double> p_kw,
                                    std::span<const double> q_kvar);

}  // namespace hostcap
