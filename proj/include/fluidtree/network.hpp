#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "fluidtree/errors.hpp"

namespace fluidtree {

/// Sentinel successor value: jobs of this class leave the system after service.
inline constexpr int kExit = -1;

/// A multiclass fluid queueing network instance.
///
/// Classes and servers are 0-based internally; the JSON spec format uses
/// 1-based indices (see serialization.hpp). Routing is deterministic
/// single-successor: class i becomes class successor[i] after service, or
/// leaves if successor[i] == kExit.
struct NetworkSpec {
    int n = 0;  ///< number of job classes
    int m = 0;  ///< number of servers
    Eigen::VectorXd mu;      ///< service rate per class, > 0
    Eigen::VectorXd lambda;  ///< external arrival rate per class, >= 0
    Eigen::VectorXd c;       ///< holding cost per job per unit time, > 0
    std::vector<int> successor;  ///< kExit or 0-based class index
    std::vector<int> server_of;  ///< 0-based server per class
};

/// Flow and constituency matrices derived from a NetworkSpec.
/// flow is n x n with -mu_i on the diagonal and mu_j at (successor(j), j);
/// constituency is the m x n binary server-membership matrix.
struct NetworkMatrices {
    Eigen::MatrixXd flow;
    Eigen::MatrixXd constituency;
};

inline constexpr double kConditionLimit = 1e12;

namespace detail {

inline Eigen::MatrixXd flow_matrix(const NetworkSpec& spec) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(spec.n, spec.n);
    for (int j = 0; j < spec.n; ++j) {
        a(j, j) = -spec.mu(j);
        if (spec.successor[j] != kExit) a(spec.successor[j], j) = spec.mu(j);
    }
    return a;
}

inline Eigen::MatrixXd constituency_matrix(const NetworkSpec& spec) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(spec.m, spec.n);
    for (int j = 0; j < spec.n; ++j) d(spec.server_of[j], j) = 1.0;
    return d;
}

}  // namespace detail

/// Validates dimensions, rate signs, routing and server assignment, and the
/// numerical invertibility of the flow matrix (condition estimate below 1e12).
inline void validate(const NetworkSpec& spec) {
    if (spec.n < 1) throw InvalidSpecError("network: need at least one class");
    if (spec.m < 1) throw InvalidSpecError("network: need at least one server");
    auto check_len = [&](const Eigen::VectorXd& v, const char* name) {
        if (v.size() != spec.n)
            throw InvalidSpecError(std::string("network: ") + name + " must have length n");
    };
    check_len(spec.mu, "mu");
    check_len(spec.lambda, "lambda");
    check_len(spec.c, "c");
    if (static_cast<int>(spec.successor.size()) != spec.n ||
        static_cast<int>(spec.server_of.size()) != spec.n)
        throw InvalidSpecError("network: successor/server_of must have length n");
    for (int i = 0; i < spec.n; ++i) {
        if (!(spec.mu(i) > 0.0)) throw InvalidSpecError("network: mu must be positive");
        if (!(spec.lambda(i) >= 0.0)) throw InvalidSpecError("network: lambda must be non-negative");
        if (!(spec.c(i) > 0.0)) throw InvalidSpecError("network: c must be positive");
        if (spec.successor[i] == i)
            throw InvalidSpecError("network: class cannot route to itself");
        if (spec.successor[i] != kExit && (spec.successor[i] < 0 || spec.successor[i] >= spec.n))
            throw InvalidSpecError("network: successor index out of range");
        if (spec.server_of[i] < 0 || spec.server_of[i] >= spec.m)
            throw InvalidSpecError("network: server index out of range");
    }
    std::vector<int> per_server(spec.m, 0);
    for (int i = 0; i < spec.n; ++i) per_server[spec.server_of[i]]++;
    for (int s = 0; s < spec.m; ++s)
        if (per_server[s] == 0)
            throw InvalidSpecError("network: server " + std::to_string(s + 1) +
                                   " has no constituent class");

    Eigen::MatrixXd a = detail::flow_matrix(spec);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    double rcond = lu.rcond();
    if (!(rcond > 1.0 / kConditionLimit))
        throw SingularMatrixError("network: flow matrix is numerically singular (condition estimate " +
                                  std::to_string(rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity()) + ")");
}

inline NetworkMatrices build_matrices(const NetworkSpec& spec) {
    validate(spec);
    return NetworkMatrices{detail::flow_matrix(spec), detail::constituency_matrix(spec)};
}

/// Workload vector rho = -D A^-1 lambda plus the stability flag (all rho_j < 1).
struct WorkloadResult {
    Eigen::VectorXd rho;
    bool stable = false;
};

inline WorkloadResult workload(const NetworkSpec& spec) {
    NetworkMatrices mats = build_matrices(spec);
    Eigen::VectorXd z = mats.flow.partialPivLu().solve(-spec.lambda);
    WorkloadResult result;
    result.rho = mats.constituency * z;
    result.stable = (result.rho.array() < 1.0).all();
    return result;
}

/// Criss-cross network: 3 classes, 2 servers. Server 1 processes classes 1
/// and 2, server 2 processes class 3; class 1 turns into class 3, classes 2
/// and 3 exit. External arrivals feed classes 1 and 2.
inline NetworkSpec make_crisscross(const Eigen::Vector3d& mu, double lambda1, double lambda2,
                                   const Eigen::Vector3d& c) {
    NetworkSpec spec;
    spec.n = 3;
    spec.m = 2;
    spec.mu = mu;
    spec.lambda = Eigen::Vector3d(lambda1, lambda2, 0.0);
    spec.c = c;
    spec.successor = {2, kExit, kExit};
    spec.server_of = {0, 0, 1};
    validate(spec);
    return spec;
}

/// Rybko-Stolyar network: 4 classes, 2 servers. Server 1 processes classes 1
/// and 4, server 2 processes classes 2 and 3; 1 -> 2 and 3 -> 4, classes 2
/// and 4 exit. External arrivals feed classes 1 and 3.
inline NetworkSpec make_rybko_stolyar(const Eigen::Vector4d& mu, double lambda1, double lambda3,
                                      const Eigen::Vector4d& c) {
    NetworkSpec spec;
    spec.n = 4;
    spec.m = 2;
    spec.mu = mu;
    spec.lambda = Eigen::Vector4d(lambda1, 0.0, lambda3, 0.0);
    spec.c = c;
    spec.successor = {1, kExit, 3, kExit};
    spec.server_of = {0, 1, 1, 0};
    validate(spec);
    return spec;
}

/// Reentrant line with m servers and 3m classes. Server i owns classes
/// 3(i-1)+{1,2,3}. Jobs enter at class 1 and traverse
/// 1 -> 4 -> ... -> 3(m-1)+1 -> 2 -> 5 -> ... -> 3(m-1)+2 -> 3 -> 6 -> ... -> 3m,
/// exiting after class 3m. Only class 1 takes external arrivals.
inline NetworkSpec make_reentrant(int m, const Eigen::VectorXd& mu, double lambda1,
                                  const Eigen::VectorXd& c) {
    if (m < 1) throw InvalidSpecError("reentrant: m must be >= 1");
    const int n = 3 * m;
    if (mu.size() != n || c.size() != n)
        throw InvalidSpecError("reentrant: mu and c must have length 3m");
    NetworkSpec spec;
    spec.n = n;
    spec.m = m;
    spec.mu = mu;
    spec.lambda = Eigen::VectorXd::Zero(n);
    spec.lambda(0) = lambda1;
    spec.c = c;
    spec.successor.assign(n, kExit);
    spec.server_of.assign(n, 0);
    for (int i = 1; i <= m; ++i) {
        for (int leg = 1; leg <= 3; ++leg) {
            int cls = 3 * (i - 1) + leg;  // 1-based class id
            spec.server_of[cls - 1] = i - 1;
            if (i < m) {
                spec.successor[cls - 1] = (3 * i + leg) - 1;
            } else {
                // last server: legs 1 and 2 re-enter server 1, leg 3 exits
                if (leg == 1) spec.successor[cls - 1] = 2 - 1;
                else if (leg == 2) spec.successor[cls - 1] = 3 - 1;
                else spec.successor[cls - 1] = kExit;
            }
        }
    }
    validate(spec);
    return spec;
}

}  // namespace fluidtree
