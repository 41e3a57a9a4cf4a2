// Timing harness for the discretized fluid solves; not part of the test suite.

#include <chrono>
#include <cstdio>

#include "fluidtree/fluid_solver.hpp"
#include "fluidtree/network.hpp"
#include "fluidtree/rng.hpp"

using namespace fluidtree;

namespace {

double time_solve(const NetworkSpec& spec, const Eigen::VectorXd& x0, int intervals,
                  long* iters_out) {
    DiscretizationConfig config;
    config.n_intervals = intervals;
    auto t0 = std::chrono::steady_clock::now();
    FluidSolution sol = solve_fluid(spec, x0, config);
    auto t1 = std::chrono::steady_clock::now();
    *iters_out = sol.lp_iterations;
    std::printf("    objective=%.6f horizon=%.3f\n", sol.objective, sol.horizon());
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main() {
    NetworkSpec cc = make_crisscross(Eigen::Vector3d(1.5, 2.0, 1.0), 0.5, 0.5,
                                     Eigen::Vector3d::Ones());
    Eigen::VectorXd x0 = Eigen::Vector3d(1.0, 1.0, 1.0);
    for (int n_intervals : {100, 200, 400, 800}) {
        long iters = 0;
        double secs = time_solve(cc, x0, n_intervals, &iters);
        std::printf("crisscross N=%4d: %.3f s, %ld simplex iterations\n", n_intervals, secs,
                    iters);
    }

    // reentrant m=3 with benign random parameters
    std::mt19937_64 rng = make_engine(derive_seed(42, 1));
    std::uniform_real_distribution<double> mu_dist(1.0, 3.0), c_dist(0.2, 2.0);
    Eigen::VectorXd mu(9), c(9);
    for (int i = 0; i < 9; ++i) {
        mu(i) = mu_dist(rng);
        c(i) = c_dist(rng);
    }
    NetworkSpec re = make_reentrant(3, mu, 0.1, c);
    double max_rho = workload(re).rho.maxCoeff();
    re.lambda(0) *= 0.65 / max_rho;  // utilization target 0.65
    Eigen::VectorXd x9 = Eigen::VectorXd::Ones(9) / 3.0;
    for (int n_intervals : {100, 200, 400}) {
        long iters = 0;
        double secs = time_solve(re, x9, n_intervals, &iters);
        std::printf("reentrant3 N=%4d: %.3f s, %ld simplex iterations\n", n_intervals, secs,
                    iters);
    }
    return 0;
}
