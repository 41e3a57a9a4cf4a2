#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "fluidtree/errors.hpp"

namespace fluidtree {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Linear program in equality form with per-variable bounds:
///   minimize cost'x  subject to  eq_matrix x = eq_rhs,  lower <= x <= upper.
/// Upper bounds may be +inf. Lower bounds must be finite.
struct LpProblem {
    Eigen::VectorXd cost;
    Eigen::SparseMatrix<double> eq_matrix;  // r x v, col-major
    Eigen::VectorXd eq_rhs;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    /// Optional warm start: column index of the basic variable for each row.
    /// Ignored when empty or when the implied basic point is infeasible.
    std::vector<int> basis_hint;

    int num_vars() const { return static_cast<int>(cost.size()); }
    int num_rows() const { return static_cast<int>(eq_rhs.size()); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd primal;  // length v
    Eigen::VectorXd dual;    // length r, multiplier per equality row
    double objective = 0.0;
    long iterations = 0;
    /// Final basic columns (one per row); usable as a basis_hint elsewhere.
    std::vector<int> basis;
};

namespace detail {

/// Bounded-variable revised simplex with a sparse LU of the basis and a
/// product-form eta file between refactorizations. Dantzig pricing, switching
/// to Bland's rule after 3(r+v) iterations to guarantee termination under
/// degeneracy.
class SimplexSolver {
public:
    SimplexSolver(const LpProblem& problem, double feas_tol, long max_iters)
        : p_(problem),
          r_(problem.num_rows()),
          v_(problem.num_vars()),
          feas_tol_(feas_tol),
          max_iters_(max_iters) {}

    LpSolution solve() {
        validate_problem();
        init_columns();

        bool have_basis = try_basis_hint();
        if (!have_basis) {
            if (!phase_one()) return finish(LpStatus::Infeasible);
        }
        LpStatus st = iterate(/*phase1=*/false);
        return finish(st);
    }

private:
    enum class VarStatus : unsigned char { Basic, AtLower, AtUpper };

    const LpProblem& p_;
    int r_;
    int v_;
    double feas_tol_;
    long max_iters_;
    long iter_count_ = 0;
    long bland_after_ = 0;

    int total_cols_ = 0;  // v_ + r_ artificials
    std::vector<double> cost_;            // active objective (phase-dependent)
    std::vector<double> lo_, up_;         // active bounds (artificials pinned in phase 2)
    std::vector<VarStatus> status_;
    std::vector<double> value_;           // nonbasic values (valid at bounds)
    std::vector<int> basic_;              // column per basis position
    std::vector<int> pos_of_;             // basis position per column, -1 if nonbasic
    std::vector<double> art_sign_;        // +-1 per row for artificial columns

    // mutable: SparseLU::transpose() is non-const in Eigen though solving
    // does not change the factorization
    mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    struct Eta {
        int pivot_pos;
        Eigen::VectorXd col;
    };
    std::vector<Eta> etas_;
    int refactor_interval_ = 64;

    Eigen::VectorXd x_basic_;
    Eigen::VectorXd work_, work2_;

    static constexpr double kPivotTol = 1e-9;

    bool is_artificial(int col) const { return col >= v_; }
    int art_row(int col) const { return col - v_; }

    void validate_problem() {
        if (p_.cost.size() != p_.lower.size() || p_.cost.size() != p_.upper.size())
            throw InvalidSpecError("lp: bound vectors must match cost length");
        if (p_.eq_matrix.rows() != r_ || p_.eq_matrix.cols() != v_)
            throw InvalidSpecError("lp: matrix dimensions inconsistent with rhs/cost");
        for (int j = 0; j < v_; ++j) {
            if (!std::isfinite(p_.lower(j)))
                throw InvalidSpecError("lp: lower bounds must be finite");
            if (p_.lower(j) > p_.upper(j) + feas_tol_)
                throw InvalidSpecError("lp: lower bound exceeds upper bound");
        }
    }

    void init_columns() {
        total_cols_ = v_ + r_;
        cost_.assign(total_cols_, 0.0);
        lo_.assign(total_cols_, 0.0);
        up_.assign(total_cols_, 0.0);
        status_.assign(total_cols_, VarStatus::AtLower);
        value_.assign(total_cols_, 0.0);
        pos_of_.assign(total_cols_, -1);
        basic_.assign(r_, -1);
        art_sign_.assign(r_, 1.0);
        for (int j = 0; j < v_; ++j) {
            cost_[j] = p_.cost(j);
            lo_[j] = p_.lower(j);
            up_[j] = p_.upper(j);
            set_nonbasic_at_nearest_bound(j);
        }
        for (int j = v_; j < total_cols_; ++j) {
            lo_[j] = 0.0;
            up_[j] = 0.0;  // pinned; phase 1 releases the ones it uses
        }
        bland_after_ = 3L * (r_ + v_);
        if (max_iters_ <= 0) max_iters_ = 40L * (r_ + v_) + 10000;
        x_basic_.resize(r_);
        work_.resize(r_);
        work2_.resize(r_);
    }

    void set_nonbasic_at_nearest_bound(int j) {
        if (std::isfinite(up_[j]) && std::abs(up_[j]) < std::abs(lo_[j])) {
            status_[j] = VarStatus::AtUpper;
            value_[j] = up_[j];
        } else {
            status_[j] = VarStatus::AtLower;
            value_[j] = lo_[j];
        }
    }

    // --- columns ------------------------------------------------------

    template <typename F>
    void for_col(int col, F&& f) const {
        if (is_artificial(col)) {
            f(art_row(col), art_sign_[art_row(col)]);
            return;
        }
        for (Eigen::SparseMatrix<double>::InnerIterator it(p_.eq_matrix, col); it; ++it)
            f(static_cast<int>(it.row()), it.value());
    }

    double col_dot(int col, const Eigen::VectorXd& y) const {
        double s = 0.0;
        for_col(col, [&](int row, double val) { s += y(row) * val; });
        return s;
    }

    // --- factorization --------------------------------------------------

    void refactorize() {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<size_t>(r_) * 4);
        for (int pos = 0; pos < r_; ++pos) {
            for_col(basic_[pos], [&](int row, double val) {
                trips.emplace_back(row, pos, val);
            });
        }
        Eigen::SparseMatrix<double> basis_mat(r_, r_);
        basis_mat.setFromTriplets(trips.begin(), trips.end());
        basis_mat.makeCompressed();
        lu_.compute(basis_mat);
        if (lu_.info() != Eigen::Success)
            throw NumericalFailureError("lp: basis factorization failed");
        etas_.clear();

        recompute_basic_values();
        // residual check on the fresh factorization
        Eigen::VectorXd resid = effective_rhs();
        for (int pos = 0; pos < r_; ++pos) {
            const double xb = x_basic_(pos);
            if (xb == 0.0) continue;
            for_col(basic_[pos], [&](int row, double val) { resid(row) -= val * xb; });
        }
        double scale = 1.0 + p_.eq_rhs.cwiseAbs().maxCoeff();
        if (r_ > 0 && resid.cwiseAbs().maxCoeff() > 1e-7 * scale)
            throw NumericalFailureError("lp: basis residual above tolerance");
    }

    Eigen::VectorXd effective_rhs() const {
        Eigen::VectorXd rhs = p_.eq_rhs;
        for (int j = 0; j < total_cols_; ++j) {
            if (status_[j] == VarStatus::Basic) continue;
            const double xj = value_[j];
            if (xj == 0.0) continue;
            for_col(j, [&](int row, double val) { rhs(row) -= val * xj; });
        }
        return rhs;
    }

    void recompute_basic_values() {
        if (r_ == 0) return;
        x_basic_ = lu_.solve(effective_rhs());
        for (const Eta& e : etas_) apply_eta(x_basic_, e);
    }

    static void apply_eta(Eigen::VectorXd& z, const Eta& e) {
        const int p = e.pivot_pos;
        const double zp = z(p) / e.col(p);
        if (zp == 0.0) return;
        z.noalias() -= zp * e.col;
        z(p) = zp;  // the axpy left z(p) == 0; the pivot entry is zp
    }

    static void apply_eta_transpose(Eigen::VectorXd& z, const Eta& e) {
        const int p = e.pivot_pos;
        const double dot = e.col.dot(z);
        z(p) = (z(p) - (dot - e.col(p) * z(p))) / e.col(p);
    }

    void ftran(Eigen::VectorXd& z) const {
        if (r_ == 0) return;
        Eigen::VectorXd tmp = lu_.solve(z);
        z.swap(tmp);
        for (const Eta& e : etas_) apply_eta(z, e);
    }

    void btran(Eigen::VectorXd& z) const {
        if (r_ == 0) return;
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) apply_eta_transpose(z, *it);
        Eigen::VectorXd tmp = lu_.transpose().solve(z);
        z.swap(tmp);
    }

    Eigen::VectorXd ftran_col(int col) const {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(r_);
        for_col(col, [&](int row, double val) { z(row) += val; });
        ftran(z);
        return z;
    }

    Eigen::VectorXd dual_vector() const {
        Eigen::VectorXd cb(r_);
        for (int pos = 0; pos < r_; ++pos) cb(pos) = cost_[basic_[pos]];
        Eigen::VectorXd y = cb;
        if (r_ > 0) btran(y);
        return y;
    }

    // --- basis setup ------------------------------------------------------

    bool try_basis_hint() {
        if (static_cast<int>(p_.basis_hint.size()) != r_ || r_ == 0) return false;
        std::vector<char> seen(v_, 0);
        for (int col : p_.basis_hint) {
            if (col < 0 || col >= v_ || seen[col]) return false;
            seen[col] = 1;
        }
        basic_ = p_.basis_hint;
        for (int pos = 0; pos < r_; ++pos) {
            status_[basic_[pos]] = VarStatus::Basic;
            pos_of_[basic_[pos]] = pos;
        }
        try {
            refactorize();
        } catch (const NumericalFailureError&) {
            reset_to_nonbasic();
            return false;
        }
        // accept only if primal feasible
        for (int pos = 0; pos < r_; ++pos) {
            const int col = basic_[pos];
            const double x = x_basic_(pos);
            if (x < lo_[col] - feas_tol_ * (1.0 + std::abs(lo_[col])) ||
                x > up_[col] + feas_tol_ * (1.0 + std::abs(up_[col]))) {
                reset_to_nonbasic();
                return false;
            }
        }
        return true;
    }

    void reset_to_nonbasic() {
        for (int pos = 0; pos < r_; ++pos) {
            int col = basic_[pos];
            if (col >= 0) {
                pos_of_[col] = -1;
                if (col < v_) set_nonbasic_at_nearest_bound(col);
            }
            basic_[pos] = -1;
        }
        etas_.clear();
    }

    bool phase_one() {
        if (r_ == 0) return true;
        // basis of artificials matching the residual sign
        Eigen::VectorXd resid = effective_rhs();
        for (int row = 0; row < r_; ++row) {
            art_sign_[row] = (resid(row) >= 0.0) ? 1.0 : -1.0;
            int col = v_ + row;
            basic_[row] = col;
            status_[col] = VarStatus::Basic;
            pos_of_[col] = row;
            cost_[col] = 1.0;
            up_[col] = kInf;
        }
        for (int j = 0; j < v_; ++j) cost_[j] = 0.0;
        refactorize();

        LpStatus st = iterate(/*phase1=*/true);
        if (st != LpStatus::Optimal)
            throw NumericalFailureError("lp: phase 1 did not terminate cleanly");
        double infeas = 0.0;
        for (int pos = 0; pos < r_; ++pos)
            if (is_artificial(basic_[pos])) infeas += std::abs(x_basic_(pos));
        double scale = 1.0 + p_.eq_rhs.cwiseAbs().maxCoeff();
        if (infeas > feas_tol_ * scale * 10.0) return false;

        drive_out_artificials();

        // restore the true objective; pin artificials to zero
        for (int j = 0; j < v_; ++j) cost_[j] = p_.cost(j);
        for (int j = v_; j < total_cols_; ++j) {
            cost_[j] = 0.0;
            up_[j] = 0.0;
            if (status_[j] != VarStatus::Basic) value_[j] = 0.0;
        }
        refactorize();
        return true;
    }

    void drive_out_artificials() {
        for (int pos = 0; pos < r_; ++pos) {
            if (!is_artificial(basic_[pos])) continue;
            // row of the basis inverse at this position
            Eigen::VectorXd rho = Eigen::VectorXd::Unit(r_, pos);
            btran(rho);
            int replacement = -1;
            double best = kPivotTol * 100.0;
            for (int j = 0; j < v_; ++j) {
                if (status_[j] == VarStatus::Basic) continue;
                double alpha = std::abs(col_dot(j, rho));
                if (alpha > best) {
                    best = alpha;
                    replacement = j;
                }
            }
            if (replacement < 0) continue;  // dependent row; artificial stays pinned at 0
            Eigen::VectorXd w = ftran_col(replacement);
            pivot(replacement, pos, w, /*entering_from_upper=*/status_[replacement] == VarStatus::AtUpper,
                  /*step=*/0.0, /*leave_to_upper=*/false);
        }
    }

    // --- main loop ------------------------------------------------------

    LpStatus iterate(bool phase1) {
        for (;;) {
            if (iter_count_ >= max_iters_)
                throw IterationLimitError("lp: iteration limit reached (" +
                                          std::to_string(max_iters_) + ")");
            const bool bland = iter_count_ >= bland_after_;
            Eigen::VectorXd y = dual_vector();

            int entering = -1;
            double best_viol = 0.0;
            double entering_dir = 1.0;
            for (int j = 0; j < total_cols_; ++j) {
                if (status_[j] == VarStatus::Basic) continue;
                if (lo_[j] == up_[j]) continue;  // fixed (incl. pinned artificials)
                const double d = cost_[j] - col_dot(j, y);
                const double dtol = feas_tol_ * (1.0 + std::abs(cost_[j]));
                double viol = 0.0;
                double dir = 1.0;
                if (status_[j] == VarStatus::AtLower && d < -dtol) {
                    viol = -d;
                    dir = 1.0;
                } else if (status_[j] == VarStatus::AtUpper && d > dtol) {
                    viol = d;
                    dir = -1.0;
                } else {
                    continue;
                }
                if (bland) {
                    entering = j;
                    entering_dir = dir;
                    break;
                }
                if (viol > best_viol) {
                    best_viol = viol;
                    entering = j;
                    entering_dir = dir;
                }
            }
            if (entering < 0) return LpStatus::Optimal;

            ++iter_count_;
            Eigen::VectorXd w = ftran_col(entering);

            // ratio test: x_B(t) = x_B - dir * t * w, t >= 0
            const double own_range = up_[entering] - lo_[entering];
            double t_best = own_range;  // may be +inf
            int leave_pos = -1;
            bool leave_to_upper = false;
            double best_pivot_mag = 0.0;
            for (int pos = 0; pos < r_; ++pos) {
                const double dw = entering_dir * w(pos);
                if (std::abs(dw) <= kPivotTol) continue;
                const int col = basic_[pos];
                double t;
                bool to_upper;
                if (dw > 0.0) {
                    t = (x_basic_(pos) - lo_[col]) / dw;
                    to_upper = false;
                } else {
                    if (!std::isfinite(up_[col])) continue;
                    t = (x_basic_(pos) - up_[col]) / dw;
                    to_upper = true;
                }
                if (t < 0.0) t = 0.0;
                const bool finite_best = std::isfinite(t_best);
                const double tie_eps = finite_best ? 1e-12 * (1.0 + t_best) : 0.0;
                const bool strictly_better = finite_best ? (t < t_best - tie_eps) : true;
                const bool tie = !strictly_better && t <= t_best + tie_eps;
                if (strictly_better || (tie && leave_pos >= 0 &&
                                        (bland ? basic_[pos] < basic_[leave_pos]
                                               : std::abs(w(pos)) > best_pivot_mag))) {
                    t_best = t;
                    leave_pos = pos;
                    leave_to_upper = to_upper;
                    best_pivot_mag = std::abs(w(pos));
                }
            }

            if (!std::isfinite(t_best)) {
                if (phase1)
                    throw NumericalFailureError("lp: phase 1 unbounded");
                return LpStatus::Unbounded;
            }

            if (leave_pos < 0 || (std::isfinite(own_range) && own_range <= t_best)) {
                // bound flip: entering variable crosses to its other bound
                const double t = own_range;
                if (t > 0.0) x_basic_.noalias() -= entering_dir * t * w;
                status_[entering] =
                    (status_[entering] == VarStatus::AtLower) ? VarStatus::AtUpper : VarStatus::AtLower;
                value_[entering] = (status_[entering] == VarStatus::AtUpper) ? up_[entering] : lo_[entering];
            } else {
                pivot(entering, leave_pos, w, status_[entering] == VarStatus::AtUpper, t_best,
                      leave_to_upper);
            }

            if (static_cast<int>(etas_.size()) >= refactor_interval_) refactorize();
        }
    }

    /// Replaces the basic variable at position `pos` with `entering`.
    /// `w` is the FTRAN'd entering column; `step` the ratio-test step length.
    void pivot(int entering, int pos, Eigen::VectorXd& w, bool entering_from_upper, double step,
               bool leave_to_upper) {
        const int leaving = basic_[pos];
        const double dir = entering_from_upper ? -1.0 : 1.0;
        if (step != 0.0) x_basic_.noalias() -= dir * step * w;
        const double entering_value =
            (entering_from_upper ? up_[entering] : lo_[entering]) + dir * step;

        status_[leaving] = leave_to_upper ? VarStatus::AtUpper : VarStatus::AtLower;
        value_[leaving] = leave_to_upper ? up_[leaving] : lo_[leaving];
        pos_of_[leaving] = -1;

        basic_[pos] = entering;
        status_[entering] = VarStatus::Basic;
        pos_of_[entering] = pos;
        x_basic_(pos) = entering_value;

        if (std::abs(w(pos)) < kPivotTol)
            throw NumericalFailureError("lp: vanishing pivot element");
        etas_.push_back(Eta{pos, std::move(w)});
    }

    // --- wrap-up ------------------------------------------------------

    LpSolution finish(LpStatus st) {
        LpSolution sol;
        sol.status = st;
        sol.iterations = iter_count_;
        if (st != LpStatus::Optimal) return sol;

        if (r_ > 0) refactorize();  // clean factorization for final values/duals
        sol.primal.resize(v_);
        for (int j = 0; j < v_; ++j) sol.primal(j) = value_[j];
        for (int pos = 0; pos < r_; ++pos)
            if (!is_artificial(basic_[pos])) sol.primal(basic_[pos]) = x_basic_(pos);
        sol.dual = dual_vector();
        sol.objective = p_.cost.dot(sol.primal);
        sol.basis = basic_;
        return sol;
    }
};

}  // namespace detail

/// Solves the LP with a bounded-variable revised simplex. Throws
/// IterationLimitError / NumericalFailureError on the corresponding failures;
/// infeasibility and unboundedness are reported through the status field.
inline LpSolution solve_lp(const LpProblem& problem, double feas_tol = 1e-9, long max_iters = 0) {
    detail::SimplexSolver solver(problem, feas_tol, max_iters);
    return solver.solve();
}

}  // namespace fluidtree
