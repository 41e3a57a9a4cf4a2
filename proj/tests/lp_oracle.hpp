#pragma once

// Brute-force LP oracle used to cross-check the simplex implementation.
// Independent of the solver: enumerates basic solutions directly.
//
// Works on small equality-form problems (v <= ~10, r <= ~5) with finite
// lower bounds. Feasibility is decided by enumerating all basis/bound
// configurations (the feasible set is pointed, so it is nonempty iff some
// basic solution is feasible). Unboundedness is decided by enumerating the
// support sets of the normalized recession cone
//   { d : A d = 0, e'd = 1, d >= 0, d_j = 0 whenever upper_j < inf }.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "fluidtree/lp.hpp"

namespace lp_oracle {

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
    Status status = Status::Infeasible;
    double objective = 0.0;
};

inline Result enumerate(const fluidtree::LpProblem& lp) {
    const int v = lp.num_vars();
    const int r = lp.num_rows();
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd dense = Eigen::MatrixXd(lp.eq_matrix);

    // --- feasibility and best vertex objective ---
    bool feasible = false;
    double best = inf;

    std::vector<int> cols(v);
    for (int j = 0; j < v; ++j) cols[j] = j;

    // iterate over all r-subsets of columns as candidate bases
    std::vector<int> pick(r);
    auto consider = [&](const std::vector<int>& basis_cols) {
        Eigen::MatrixXd basis_mat(r, r);
        for (int t = 0; t < r; ++t) basis_mat.col(t) = dense.col(basis_cols[t]);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(basis_mat);
        if (r > 0 && !lu.isInvertible()) return;

        std::vector<char> is_basic(v, 0);
        for (int col : basis_cols) is_basic[col] = 1;
        std::vector<int> nonbasic;
        for (int j = 0; j < v; ++j)
            if (!is_basic[j]) nonbasic.push_back(j);

        const int nn = static_cast<int>(nonbasic.size());
        for (long mask = 0; mask < (1L << nn); ++mask) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(v);
            bool valid = true;
            for (int t = 0; t < nn; ++t) {
                int j = nonbasic[t];
                if (mask & (1L << t)) {
                    if (!std::isfinite(lp.upper(j))) {
                        valid = false;
                        break;
                    }
                    x(j) = lp.upper(j);
                } else {
                    x(j) = lp.lower(j);
                }
            }
            if (!valid) continue;
            if (r > 0) {
                Eigen::VectorXd rhs = lp.eq_rhs;
                for (int j : nonbasic) rhs -= dense.col(j) * x(j);
                Eigen::VectorXd xb = lu.solve(rhs);
                for (int t = 0; t < r; ++t) x(basis_cols[t]) = xb(t);
            }
            bool ok = true;
            for (int j = 0; j < v && ok; ++j) {
                double slack = 1e-7 * (1.0 + std::abs(x(j)));
                if (x(j) < lp.lower(j) - slack || x(j) > lp.upper(j) + slack) ok = false;
            }
            if (r > 0 && ok) {
                double resid = (dense * x - lp.eq_rhs).cwiseAbs().maxCoeff();
                if (resid > 1e-7 * (1.0 + lp.eq_rhs.cwiseAbs().maxCoeff())) ok = false;
            }
            if (ok) {
                feasible = true;
                best = std::min(best, lp.cost.dot(x));
            }
        }
    };

    // recursive subset enumeration
    std::vector<int> subset(r);
    auto rec = [&](auto&& self, int start, int depth) -> void {
        if (depth == r) {
            consider(subset);
            return;
        }
        for (int j = start; j < v; ++j) {
            subset[depth] = j;
            self(self, j + 1, depth + 1);
        }
    };
    if (r == 0)
        consider({});
    else
        rec(rec, 0, 0);

    if (!feasible) return Result{Status::Infeasible, 0.0};

    // --- unboundedness via the normalized recession cone ---
    std::vector<int> ray_cols;
    for (int j = 0; j < v; ++j)
        if (!std::isfinite(lp.upper(j))) ray_cols.push_back(j);
    const int nray = static_cast<int>(ray_cols.size());
    bool unbounded = false;
    // support sets of vertices have size <= r+1
    for (long mask = 1; mask < (1L << nray) && !unbounded; ++mask) {
        std::vector<int> support;
        for (int t = 0; t < nray; ++t)
            if (mask & (1L << t)) support.push_back(ray_cols[t]);
        if (static_cast<int>(support.size()) > r + 1) continue;
        Eigen::MatrixXd sys(r + 1, support.size());
        for (size_t t = 0; t < support.size(); ++t) {
            sys.block(0, static_cast<int>(t), r, 1) = dense.col(support[t]);
            sys(r, static_cast<int>(t)) = 1.0;
        }
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(r + 1);
        rhs(r) = 1.0;
        Eigen::VectorXd d = sys.colPivHouseholderQr().solve(rhs);
        if ((sys * d - rhs).cwiseAbs().maxCoeff() > 1e-8) continue;
        if ((d.array() < -1e-9).any()) continue;
        double reduced = 0.0;
        for (size_t t = 0; t < support.size(); ++t) reduced += lp.cost(support[t]) * d(t);
        if (reduced < -1e-9) unbounded = true;
    }
    if (unbounded) return Result{Status::Unbounded, 0.0};
    return Result{Status::Optimal, best};
}

}  // namespace lp_oracle
