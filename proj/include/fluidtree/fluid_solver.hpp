#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "fluidtree/errors.hpp"
#include "fluidtree/lp.hpp"
#include "fluidtree/network.hpp"

namespace fluidtree {

struct DiscretizationConfig {
    std::optional<double> horizon;  ///< nullopt: derive via default_horizon
    int n_intervals = 400;
    double empty_tol = 1e-6;
    bool refine = false;  ///< one densification pass around control breakpoints
    double feas_tol = 1e-9;
    long max_iters = 0;  ///< 0: automatic limit
};

/// Optimal discretized trajectory of the fluid control problem.
///
/// Controls are piecewise constant per interval, states piecewise linear on
/// the grid. costate_nodes holds the dual-based estimate of the adjoint y(t):
/// row 0 comes from the initial-state equality rows, row k+1 from the flow
/// balance rows of interval k. The sign convention makes the costate decrease
/// at rate ~c_i while x_i stays strictly positive.
struct FluidSolution {
    Eigen::VectorXd grid;           // N+1 node times, grid(0)=0, grid(N)=T
    Eigen::MatrixXd u_pieces;       // N x n
    Eigen::MatrixXd x_nodes;        // (N+1) x n
    Eigen::MatrixXd costate_nodes;  // (N+1) x n
    double objective = 0.0;
    std::vector<std::optional<double>> depletion;  // per class; nullopt = never
    double empty_threshold = 0.0;  // empty_tol * (1 + ||x0||_inf)
    long lp_iterations = 0;

    int num_intervals() const { return static_cast<int>(u_pieces.rows()); }
    int num_classes() const { return static_cast<int>(u_pieces.cols()); }
    double horizon() const { return grid(grid.size() - 1); }
};

/// Upper bound on the draining time: T = 2 * max_j [D (-A)^-1 x0]_j / (1 - rho_j).
/// Returns 0 for x0 = 0; throws UnstableNetworkError when any rho_j >= 1.
inline double default_horizon(const NetworkSpec& spec, const Eigen::VectorXd& x0) {
    WorkloadResult wl = workload(spec);
    if (!wl.stable)
        throw UnstableNetworkError("fluid: some server utilization is >= 1");
    NetworkMatrices mats = build_matrices(spec);
    Eigen::VectorXd remaining = mats.constituency * mats.flow.partialPivLu().solve(-x0);
    double horizon = 0.0;
    for (int j = 0; j < spec.m; ++j)
        horizon = std::max(horizon, 2.0 * remaining(j) / (1.0 - wl.rho(j)));
    return horizon;
}

namespace detail {

/// Column/row index bookkeeping for the discretized LP.
struct LpLayout {
    int n, m, intervals;
    int u_col(int k, int i) const { return k * n + i; }
    int x_col(int k, int i) const { return intervals * n + k * n + i; }
    int s_col(int k, int j) const { return intervals * n + (intervals + 1) * n + k * m + j; }
    int fix_row(int i) const { return i; }
    int dyn_row(int k, int i) const { return n + k * (n + m) + i; }
    int srv_row(int k, int j) const { return n + k * (n + m) + n + j; }
    int num_vars() const { return intervals * (2 * n + m) + n; }
    int num_rows() const { return n + intervals * (n + m); }
};

inline LpProblem build_fluid_lp(const NetworkSpec& spec, const NetworkMatrices& mats,
                                const Eigen::VectorXd& x0, const Eigen::VectorXd& steps) {
    const int n = spec.n;
    const int m = spec.m;
    const int intervals = static_cast<int>(steps.size());
    LpLayout lay{n, m, intervals};

    LpProblem lp;
    const int v = lay.num_vars();
    const int r = lay.num_rows();
    lp.cost = Eigen::VectorXd::Zero(v);
    lp.eq_rhs = Eigen::VectorXd::Zero(r);
    lp.lower = Eigen::VectorXd::Zero(v);
    lp.upper = Eigen::VectorXd::Constant(v, kInf);
    lp.basis_hint.assign(r, -1);

    // controls and server slacks live in [0,1]; states in [0, inf)
    for (int k = 0; k < intervals; ++k) {
        for (int i = 0; i < n; ++i) lp.upper(lay.u_col(k, i)) = 1.0;
        for (int j = 0; j < m; ++j) lp.upper(lay.s_col(k, j)) = 1.0;
    }

    // exact integral of c'x for piecewise-linear x: trapezoid node weights
    for (int k = 0; k <= intervals; ++k) {
        double w = 0.0;
        if (k > 0) w += 0.5 * steps(k - 1);
        if (k < intervals) w += 0.5 * steps(k);
        for (int i = 0; i < n; ++i) lp.cost(lay.x_col(k, i)) = w * spec.c(i);
    }

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(r) * 4);
    for (int i = 0; i < n; ++i) {
        trips.emplace_back(lay.fix_row(i), lay.x_col(0, i), 1.0);
        lp.eq_rhs(lay.fix_row(i)) = x0(i);
        lp.basis_hint[lay.fix_row(i)] = lay.x_col(0, i);
    }
    for (int k = 0; k < intervals; ++k) {
        const double h = steps(k);
        for (int i = 0; i < n; ++i) {
            const int row = lay.dyn_row(k, i);
            trips.emplace_back(row, lay.x_col(k + 1, i), 1.0);
            trips.emplace_back(row, lay.x_col(k, i), -1.0);
            lp.eq_rhs(row) = h * spec.lambda(i);
            lp.basis_hint[row] = lay.x_col(k + 1, i);
        }
        for (int j = 0; j < n; ++j) {
            // column of u_{k,j}: -h * A(:,j)
            trips.emplace_back(lay.dyn_row(k, j), lay.u_col(k, j), h * spec.mu(j));
            if (spec.successor[j] != kExit)
                trips.emplace_back(lay.dyn_row(k, spec.successor[j]), lay.u_col(k, j),
                                   -h * spec.mu(j));
            trips.emplace_back(lay.srv_row(k, spec.server_of[j]), lay.u_col(k, j), 1.0);
        }
        for (int j = 0; j < m; ++j) {
            const int row = lay.srv_row(k, j);
            trips.emplace_back(row, lay.s_col(k, j), 1.0);
            lp.eq_rhs(row) = 1.0;
            lp.basis_hint[row] = lay.s_col(k, j);
        }
    }
    lp.eq_matrix.resize(r, v);
    lp.eq_matrix.setFromTriplets(trips.begin(), trips.end());
    lp.eq_matrix.makeCompressed();
    (void)mats;
    return lp;
}

inline FluidSolution unpack_fluid_solution(const NetworkSpec& spec, const Eigen::VectorXd& x0,
                                           const Eigen::VectorXd& steps, const LpSolution& lp_sol,
                                           double empty_tol) {
    const int n = spec.n;
    const int intervals = static_cast<int>(steps.size());
    LpLayout lay{n, spec.m, intervals};

    FluidSolution sol;
    sol.grid.resize(intervals + 1);
    sol.grid(0) = 0.0;
    for (int k = 0; k < intervals; ++k) sol.grid(k + 1) = sol.grid(k) + steps(k);
    sol.u_pieces.resize(intervals, n);
    sol.x_nodes.resize(intervals + 1, n);
    sol.costate_nodes.resize(intervals + 1, n);
    for (int k = 0; k < intervals; ++k)
        for (int i = 0; i < n; ++i) sol.u_pieces(k, i) = lp_sol.primal(lay.u_col(k, i));
    for (int k = 0; k <= intervals; ++k)
        for (int i = 0; i < n; ++i) sol.x_nodes(k, i) = lp_sol.primal(lay.x_col(k, i));
    for (int i = 0; i < n; ++i) sol.costate_nodes(0, i) = lp_sol.dual(lay.fix_row(i));
    for (int k = 0; k < intervals; ++k)
        for (int i = 0; i < n; ++i) sol.costate_nodes(k + 1, i) = lp_sol.dual(lay.dyn_row(k, i));
    sol.objective = lp_sol.objective;
    sol.lp_iterations = lp_sol.iterations;

    const double x0_norm = x0.size() > 0 ? x0.cwiseAbs().maxCoeff() : 0.0;
    sol.empty_threshold = empty_tol * (1.0 + x0_norm);
    sol.depletion.assign(n, std::nullopt);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k <= intervals; ++k)
            if (sol.x_nodes(k, i) <= sol.empty_threshold) {
                sol.depletion[i] = sol.grid(k);
                break;
            }
    return sol;
}

inline Eigen::VectorXd refine_grid(const Eigen::VectorXd& steps, const Eigen::MatrixXd& u_pieces) {
    const int intervals = static_cast<int>(steps.size());
    std::vector<bool> split(intervals, false);
    for (int k = 1; k < intervals; ++k) {
        double change = (u_pieces.row(k) - u_pieces.row(k - 1)).cwiseAbs().maxCoeff();
        if (change > 1e-6) {
            split[k - 1] = true;
            split[k] = true;
        }
    }
    std::vector<double> refined;
    refined.reserve(static_cast<size_t>(intervals) * 2);
    for (int k = 0; k < intervals; ++k) {
        if (split[k])
            for (int q = 0; q < 4; ++q) refined.push_back(steps(k) / 4.0);
        else
            refined.push_back(steps(k));
    }
    return Eigen::Map<Eigen::VectorXd>(refined.data(), static_cast<Eigen::Index>(refined.size()));
}

}  // namespace detail

/// Discretizes the fluid problem on a uniform grid into an equality-form LP.
inline LpProblem discretize(const NetworkSpec& spec, const Eigen::VectorXd& x0,
                            const DiscretizationConfig& config) {
    if (config.n_intervals < 2)
        throw InvalidSpecError("fluid: need at least 2 intervals");
    NetworkMatrices mats = build_matrices(spec);
    double horizon = config.horizon ? *config.horizon : default_horizon(spec, x0);
    if (horizon <= 0.0) horizon = 1.0;
    Eigen::VectorXd steps =
        Eigen::VectorXd::Constant(config.n_intervals, horizon / config.n_intervals);
    return detail::build_fluid_lp(spec, mats, x0, steps);
}

/// Solves the fluid control problem by time-discretized LP.
/// Throws EmptyingFailedError when the final state is not (near-)zero,
/// which signals that the horizon was chosen too small.
inline FluidSolution solve_fluid(const NetworkSpec& spec, const Eigen::VectorXd& x0,
                                 const DiscretizationConfig& config = {}) {
    if (x0.size() != spec.n) throw InvalidSpecError("fluid: x0 must have length n");
    for (int i = 0; i < spec.n; ++i)
        if (x0(i) < 0.0) throw InvalidSpecError("fluid: x0 must be non-negative");
    if (config.n_intervals < 2)
        throw InvalidSpecError("fluid: need at least 2 intervals");

    NetworkMatrices mats = build_matrices(spec);
    double horizon = config.horizon ? *config.horizon : default_horizon(spec, x0);
    if (horizon <= 0.0) horizon = 1.0;  // empty start; keep processing any inflow

    Eigen::VectorXd steps =
        Eigen::VectorXd::Constant(config.n_intervals, horizon / config.n_intervals);
    LpProblem lp = detail::build_fluid_lp(spec, mats, x0, steps);
    LpSolution lp_sol = solve_lp(lp, config.feas_tol, config.max_iters);
    if (lp_sol.status != LpStatus::Optimal)
        throw NumericalFailureError("fluid: discretized LP not optimal");
    FluidSolution sol = detail::unpack_fluid_solution(spec, x0, steps, lp_sol, config.empty_tol);

    if (config.refine) {
        Eigen::VectorXd fine = detail::refine_grid(steps, sol.u_pieces);
        if (fine.size() > steps.size()) {
            LpProblem lp2 = detail::build_fluid_lp(spec, mats, x0, fine);
            LpSolution lp_sol2 = solve_lp(lp2, config.feas_tol, config.max_iters);
            if (lp_sol2.status != LpStatus::Optimal)
                throw NumericalFailureError("fluid: refined LP not optimal");
            sol = detail::unpack_fluid_solution(spec, x0, fine, lp_sol2, config.empty_tol);
            sol.lp_iterations += lp_sol.iterations;
        }
    }

    double terminal = sol.x_nodes.row(sol.num_intervals()).cwiseAbs().maxCoeff();
    if (terminal > sol.empty_threshold)
        throw EmptyingFailedError("fluid: state not emptied by T (residual " +
                                  std::to_string(terminal) + "); horizon too small");
    return sol;
}

/// Priority index vector r = y'A. Each server optimally gives full effort to
/// its constituent class with the most negative index and idles when all of
/// them are positive.
inline Eigen::VectorXd priority_indices(const NetworkSpec& spec, const Eigen::VectorXd& costate) {
    NetworkMatrices mats = build_matrices(spec);
    return (costate.transpose() * mats.flow).transpose();
}

inline Eigen::VectorXd initial_control(const FluidSolution& sol) {
    return sol.u_pieces.row(0);
}

/// Numerical check of the maximum-principle structure on a solved trajectory.
struct PontryaginReport {
    struct ServerCheck {
        int interval = 0;
        int server = 0;
        std::vector<int> constituents;
        std::vector<double> indices;    // priority index per constituent
        std::vector<int> effort_classes;  // classes receiving effort > activity tol
        double violation = 0.0;         // 0 when the pair passes
    };
    std::vector<ServerCheck> checks;      // one per (interval, server)
    double pass_fraction = 0.0;           // priority + boundary-costate combined
    double priority_pass_fraction = 0.0;
    double boundary_pass_fraction = 0.0;  // Lemma-style: empty classes carry ~zero costate
    double terminal_costate_norm = 0.0;
    bool terminal_ok = false;
};

inline PontryaginReport verify_pontryagin(const NetworkSpec& spec, const FluidSolution& sol,
                                          double tol) {
    NetworkMatrices mats = build_matrices(spec);
    const int n = spec.n;
    const int intervals = sol.num_intervals();
    const double horizon = sol.horizon();
    const double cost_scale = 1.0 + spec.c.norm() * horizon;

    std::vector<std::vector<int>> constituents(spec.m);
    for (int i = 0; i < n; ++i) constituents[spec.server_of[i]].push_back(i);

    PontryaginReport report;
    report.checks.reserve(static_cast<size_t>(intervals) * spec.m);
    long priority_pass = 0, boundary_pass = 0, combined_pass = 0, total = 0;

    for (int k = 0; k < intervals; ++k) {
        // the costate that governs interval k is the dual of its balance rows
        Eigen::VectorXd y = sol.costate_nodes.row(k + 1);
        Eigen::VectorXd idx = (y.transpose() * mats.flow).transpose();
        for (int j = 0; j < spec.m; ++j) {
            PontryaginReport::ServerCheck check;
            check.interval = k;
            check.server = j;
            double min_index = 0.0;  // idling has constant priority index 0
            for (int i : constituents[j]) {
                check.constituents.push_back(i);
                check.indices.push_back(idx(i));
                min_index = std::min(min_index, idx(i));
            }
            double priority_viol = 0.0;
            for (int i : constituents[j]) {
                if (sol.u_pieces(k, i) > tol) {
                    check.effort_classes.push_back(i);
                    priority_viol = std::max(priority_viol, idx(i) - min_index - tol);
                }
            }
            double boundary_viol = 0.0;
            for (int i : constituents[j]) {
                bool empty_arc = sol.x_nodes(k, i) <= sol.empty_threshold &&
                                 sol.x_nodes(k + 1, i) <= sol.empty_threshold;
                if (empty_arc)
                    boundary_viol =
                        std::max(boundary_viol, std::abs(y(i)) - tol * cost_scale);
            }
            check.violation = std::max({0.0, priority_viol, boundary_viol});
            bool prio_ok = priority_viol <= 0.0;
            bool bnd_ok = boundary_viol <= 0.0;
            priority_pass += prio_ok;
            boundary_pass += bnd_ok;
            combined_pass += (prio_ok && bnd_ok);
            ++total;
            report.checks.push_back(std::move(check));
        }
    }
    report.priority_pass_fraction = total ? static_cast<double>(priority_pass) / total : 1.0;
    report.boundary_pass_fraction = total ? static_cast<double>(boundary_pass) / total : 1.0;
    report.pass_fraction = total ? static_cast<double>(combined_pass) / total : 1.0;
    report.terminal_costate_norm = sol.costate_nodes.row(intervals).cwiseAbs().maxCoeff();
    report.terminal_ok = report.terminal_costate_norm <= tol * cost_scale;
    return report;
}

}  // namespace fluidtree
