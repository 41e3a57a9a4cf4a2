#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "fluidtree/lp.hpp"
#include "lp_oracle.hpp"

using namespace fluidtree;
using Catch::Approx;

namespace {

LpProblem dense_problem(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                        const Eigen::VectorXd& cost, const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper) {
    LpProblem lp;
    lp.cost = cost;
    lp.eq_rhs = b;
    lp.lower = lower;
    lp.upper = upper;
    lp.eq_matrix = a.sparseView();
    lp.eq_matrix.makeCompressed();
    return lp;
}

/// cost'x == rhs'y + sum of reduced-cost * bound-value terms, within tolerance
void check_strong_duality(const LpProblem& lp, const LpSolution& sol) {
    Eigen::VectorXd reduced = lp.cost;
    if (lp.num_rows() > 0) reduced -= Eigen::VectorXd(lp.eq_matrix.transpose() * sol.dual);
    double dual_obj = lp.num_rows() > 0 ? lp.eq_rhs.dot(sol.dual) : 0.0;
    for (int j = 0; j < lp.num_vars(); ++j) {
        // nonbasic-at-bound terms; basic variables have ~zero reduced cost
        if (std::abs(reduced(j)) > 1e-7 * (1.0 + std::abs(lp.cost(j))))
            dual_obj += reduced(j) * sol.primal(j);
    }
    REQUIRE(std::abs(sol.objective - dual_obj) <= 1e-6 * (1.0 + std::abs(sol.objective)));
}

LpProblem random_problem(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> vdist(1, 8);
    std::uniform_real_distribution<double> unit(0.0, 1.0), entry(-2.0, 2.0);
    const int v = vdist(rng);
    std::uniform_int_distribution<int> rdist(0, std::min(4, v));
    const int r = rdist(rng);

    Eigen::MatrixXd a(r, v);
    for (;;) {
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < v; ++j) a(i, j) = entry(rng);
        if (r == 0 || a.colPivHouseholderQr().rank() == r) break;
    }
    Eigen::VectorXd lower(v), upper(v), cost(v);
    for (int j = 0; j < v; ++j) {
        lower(j) = -2.0 + 2.5 * unit(rng);
        upper(j) = (unit(rng) < 0.3) ? kInf : lower(j) + 0.5 + 2.5 * unit(rng);
        cost(j) = entry(rng);
    }
    Eigen::VectorXd rhs(r);
    if (unit(rng) < 0.7) {
        // feasible by construction: rhs = A * (point within bounds)
        Eigen::VectorXd x(v);
        for (int j = 0; j < v; ++j) {
            double hi = std::isfinite(upper(j)) ? upper(j) : lower(j) + 3.0;
            x(j) = lower(j) + (hi - lower(j)) * unit(rng);
        }
        rhs = a * x;
    } else {
        for (int i = 0; i < r; ++i) rhs(i) = 4.0 * entry(rng);
    }
    return dense_problem(a, rhs, cost, lower, upper);
}

}  // namespace

TEST_CASE("single bounded variable, no equalities") {
    Eigen::MatrixXd a(0, 1);
    LpProblem lp = dense_problem(a, Eigen::VectorXd(0), Eigen::VectorXd::Constant(1, -1.0),
                                 Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
    LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    REQUIRE(sol.primal(0) == Approx(1.0));
    REQUIRE(sol.objective == Approx(-1.0));
}

TEST_CASE("degenerate optimal face: objective and dual are unique") {
    Eigen::MatrixXd a(1, 2);
    a << 1, 1;
    LpProblem lp = dense_problem(a, Eigen::VectorXd::Ones(1), Eigen::Vector2d(1, 1),
                                 Eigen::Vector2d::Zero(), Eigen::Vector2d::Constant(kInf));
    LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    REQUIRE(sol.objective == Approx(1.0));
    REQUIRE(sol.dual(0) == Approx(1.0));
    REQUIRE(sol.primal.sum() == Approx(1.0));
    REQUIRE(sol.primal.minCoeff() >= -1e-9);
    check_strong_duality(lp, sol);
}

TEST_CASE("two-equality problem matches the enumeration oracle") {
    Eigen::MatrixXd a(2, 2);
    a << 1, 2, 1, -1;
    Eigen::VectorXd b(2);
    b << 4, 1;
    LpProblem lp = dense_problem(a, b, Eigen::Vector2d(-2, -3), Eigen::Vector2d::Zero(),
                                 Eigen::Vector2d::Constant(kInf));
    LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);

    lp_oracle::Result oracle = lp_oracle::enumerate(lp);
    REQUIRE(oracle.status == lp_oracle::Status::Optimal);
    REQUIRE(sol.objective == Approx(oracle.objective).margin(1e-9));
    REQUIRE(sol.objective == Approx(-7.0));
    REQUIRE(sol.primal(0) == Approx(2.0));
    REQUIRE(sol.primal(1) == Approx(1.0));
    check_strong_duality(lp, sol);
}

TEST_CASE("infeasible system is detected") {
    Eigen::MatrixXd a(1, 2);
    a << 1, 1;
    LpProblem lp = dense_problem(a, Eigen::VectorXd::Constant(1, -1.0), Eigen::Vector2d(1, 1),
                                 Eigen::Vector2d::Zero(), Eigen::Vector2d::Constant(kInf));
    REQUIRE(solve_lp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("unbounded ray is detected") {
    Eigen::MatrixXd a(1, 2);
    a << 1, -1;
    LpProblem lp = dense_problem(a, Eigen::VectorXd::Zero(1), Eigen::Vector2d(-1, 0),
                                 Eigen::Vector2d::Zero(), Eigen::Vector2d::Constant(kInf));
    REQUIRE(solve_lp(lp).status == LpStatus::Unbounded);
}

TEST_CASE("iteration limit raises") {
    Eigen::MatrixXd a(2, 4);
    a << 1, 2, 1, 0, 1, -1, 0, 1;
    Eigen::VectorXd b(2);
    b << 4, 1;
    LpProblem lp = dense_problem(a, b, Eigen::Vector4d(-2, -3, 0, 0), Eigen::Vector4d::Zero(),
                                 Eigen::Vector4d::Constant(kInf));
    REQUIRE_THROWS_AS(solve_lp(lp, 1e-9, 1), IterationLimitError);
}

TEST_CASE("valid basis hint is accepted and solves to the same optimum") {
    Eigen::MatrixXd a(2, 4);
    a << 1, 2, 1, 0, 1, -1, 0, 1;
    Eigen::VectorXd b(2);
    b << 4, 1;
    LpProblem lp = dense_problem(a, b, Eigen::Vector4d(-2, -3, 0, 0), Eigen::Vector4d::Zero(),
                                 Eigen::Vector4d::Constant(kInf));
    LpSolution cold = solve_lp(lp);
    REQUIRE(cold.status == LpStatus::Optimal);

    lp.basis_hint = {2, 3};  // slack-like columns; x = (0,0,4,1) is feasible
    LpSolution warm = solve_lp(lp);
    REQUIRE(warm.status == LpStatus::Optimal);
    REQUIRE(warm.objective == Approx(cold.objective).margin(1e-9));
}

TEST_CASE("random LPs match the basic-solution enumeration oracle") {
    std::mt19937_64 rng(20240817);
    int optimal_count = 0, infeasible_count = 0, unbounded_count = 0;
    for (int trial = 0; trial < 200; ++trial) {
        LpProblem lp = random_problem(rng);
        lp_oracle::Result oracle = lp_oracle::enumerate(lp);
        LpSolution sol = solve_lp(lp);
        CAPTURE(trial, lp.num_vars(), lp.num_rows());
        switch (oracle.status) {
            case lp_oracle::Status::Optimal:
                ++optimal_count;
                REQUIRE(sol.status == LpStatus::Optimal);
                REQUIRE(std::abs(sol.objective - oracle.objective) <=
                        1e-8 * (1.0 + std::abs(oracle.objective)));
                check_strong_duality(lp, sol);
                break;
            case lp_oracle::Status::Infeasible:
                ++infeasible_count;
                REQUIRE(sol.status == LpStatus::Infeasible);
                break;
            case lp_oracle::Status::Unbounded:
                ++unbounded_count;
                REQUIRE(sol.status == LpStatus::Unbounded);
                break;
        }
    }
    // make sure the generator exercises every status
    REQUIRE(optimal_count > 100);
    REQUIRE(infeasible_count > 5);
    REQUIRE(unbounded_count > 5);
}
