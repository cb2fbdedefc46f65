#include "hostcap/distflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hostcap/errors.hpp"

namespace hostcap {

DistFlowSolver::DistFlowSolver(const Network& net) : net_(&net) {
    order_ = topological_order(net);  // throws on non-radial input
    const int nb = net.bus_count();
    const int nl = net.line_count();

    parent_bus_.assign(nb, -1);
    parent_line_.assign(nb, -1);
    line_parent_bus_.assign(nl, -1);
    line_child_bus_.assign(nl, -1);

    // Orient every line away from the root: whichever endpoint appears
    // earlier in the sweep order is the sending (parent) end.
    std::vector<int> rank(nb, -1);
    for (int i = 0; i < nb; ++i) rank[order_[i]] = i;
    for (int e = 0; e < nl; ++e) {
        int a = net.bus_index(net_->lines[e].from);
        int b = net.bus_index(net_->lines[e].to);
        if (rank[a] > rank[b]) std::swap(a, b);
        line_parent_bus_[e] = a;
        line_child_bus_[e] = b;
        parent_bus_[b] = a;
        parent_line_[b] = e;
    }

    p_pu_.assign(nb, 0.0);
    q_pu_.assign(nb, 0.0);
    sum_p_.assign(nb, 0.0);
    sum_q_.assign(nb, 0.0);
    l_next_.assign(nl, 0.0);
}

// Backward pass: with the current squared-current estimates fixed, accumulate
// line flows leaf-to-root so that at each line
//   P_e = -p_child + r_e * l_e + sum of child-line P, and likewise for Q.
// (p holds net injection, so load appears with a positive sign in the flow.)
void DistFlowSolver::accumulate_flows(PowerFlowSolution& sol) {
    const int nb = net_->bus_count();
    std::fill(sum_p_.begin(), sum_p_.end(), 0.0);
    std::fill(sum_q_.begin(), sum_q_.end(), 0.0);

    for (int i = nb - 1; i >= 1; --i) {
        const int b = order_[i];
        const int e = parent_line_[b];
        const Line& ln = net_->lines[e];
        const double pf = -p_pu_[b] + sum_p_[b] + ln.r_pu * sol.l[e];
        const double qf = -q_pu_[b] + sum_q_[b] + ln.x_pu * sol.l[e];
        sol.p_flow[e] = pf;
        sol.q_flow[e] = qf;
        sum_p_[parent_bus_[b]] += pf;
        sum_q_[parent_bus_[b]] += qf;
    }
}

PowerFlowSolution DistFlowSolver::solve(std::span<const double> p_kw, std::span<const double> q_kvar,
                                        double tol, int max_iter) {
    const int nb = net_->bus_count();
    const int nl = net_->line_count();
    if (static_cast<int>(p_kw.size()) != nb || static_cast<int>(q_kvar.size()) != nb)
        throw DimensionMismatch("injection vectors must have one entry per bus");

    const double scale = 1.0 / net_->base_kva;
    for (int b = 0; b < nb; ++b) {
        p_pu_[b] = p_kw[b] * scale;
        q_pu_[b] = q_kvar[b] * scale;
    }

    PowerFlowSolution sol;
    sol.v.assign(nb, net_->v_root);
    sol.p_flow.assign(nl, 0.0);
    sol.q_flow.assign(nl, 0.0);
    sol.l.assign(nl, 0.0);

    for (int it = 1; it <= max_iter; ++it) {
        sol.iterations = it;
        accumulate_flows(sol);

        // Forward pass: propagate squared voltages root-to-leaf through the
        // series drop, then form the next squared-current estimate from the
        // sending-end voltage. Convergence is measured as the largest change
        // in squared current, which bounds the residual of every equation.
        bool collapsed = false;
        for (int i = 1; i < nb; ++i) {
            const int b = order_[i];
            const int e = parent_line_[b];
            const Line& ln = net_->lines[e];
            const double vp = sol.v[parent_bus_[b]];
            sol.v[b] = vp - 2.0 * (ln.r_pu * sol.p_flow[e] + ln.x_pu * sol.q_flow[e]) +
                       (ln.r_pu * ln.r_pu + ln.x_pu * ln.x_pu) * sol.l[e];
            if (!(sol.v[b] > kCollapseV2)) collapsed = true;
        }
        if (collapsed) {
            sol.converged = false;
            sol.residual = std::numeric_limits<double>::infinity();
            return sol;
        }

        double delta = 0.0;
        for (int e = 0; e < nl; ++e) {
            const double vp = sol.v[line_parent_bus_[e]];
            l_next_[e] = (sol.p_flow[e] * sol.p_flow[e] + sol.q_flow[e] * sol.q_flow[e]) / vp;
            delta = std::max(delta, std::abs(l_next_[e] - sol.l[e]));
        }
        sol.residual = delta;
        if (delta <= tol) {
            // Keep the current l: flows and voltages were computed from it,
            // so the power-balance and voltage-drop equations hold exactly
            // and only the current-definition equation carries the residual.
            sol.converged = true;
            return sol;
        }
        std::copy(l_next_.begin(), l_next_.end(), sol.l.begin());
    }
    sol.converged = false;
    return sol;
}

PowerFlowSolution DistFlowSolver::solve_linear(std::span<const double> p_kw,
                                               std::span<const double> q_kvar) {
    const int nb = net_->bus_count();
    const int nl = net_->line_count();
    if (static_cast<int>(p_kw.size()) != nb || static_cast<int>(q_kvar.size()) != nb)
        throw DimensionMismatch("injection vectors must have one entry per bus");

    const double scale = 1.0 / net_->base_kva;
    for (int b = 0; b < nb; ++b) {
        p_pu_[b] = p_kw[b] * scale;
        q_pu_[b] = q_kvar[b] * scale;
    }

    PowerFlowSolution sol;
    sol.v.assign(nb, net_->v_root);
    sol.p_flow.assign(nl, 0.0);
    sol.q_flow.assign(nl, 0.0);
    sol.l.assign(nl, 0.0);
    sol.iterations = 1;

    accumulate_flows(sol);
    double worst_l = 0.0;
    for (int i = 1; i < nb; ++i) {
        const int b = order_[i];
        const int e = parent_line_[b];
        const Line& ln = net_->lines[e];
        sol.v[b] = sol.v[parent_bus_[b]] -
                   2.0 * (ln.r_pu * sol.p_flow[e] + ln.x_pu * sol.q_flow[e]);
    }
    for (int e = 0; e < nl; ++e) {
        const double vp = std::max(sol.v[line_parent_bus_[e]], kCollapseV2);
        worst_l = std::max(worst_l,
                           (sol.p_flow[e] * sol.p_flow[e] + sol.q_flow[e] * sol.q_flow[e]) / vp);
    }
    sol.converged = true;
    sol.residual = worst_l;
    return sol;
}

PowerFlowSolution solve_distflow(const Network& net, std::span<const double> p_kw,
                                 std::span<const double> q_kvar, double tol, int max_iter) {
    DistFlowSolver solver(net);
    return solver.solve(p_kw, q_kvar, tol, max_iter);
}

PowerFlowSolution solve_lindistflow(const Network& net, std::span<const double> p_kw,
                                    std::span<const double> q_kvar) {
    DistFlowSolver solver(net);
    return solver.solve_linear(p_kw, q_kvar);
}

}  // namespace hostcap
