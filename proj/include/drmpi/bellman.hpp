#pragma once

#include "drmpi/mdp.hpp"

#include <string>
#include <vector>

namespace drmpi {

/**
 * Modified policy iteration settings.
 *
 * m is the partial-evaluation depth: m=1 is value iteration, m=infinity
 * (kMInfinity) evaluates each greedy policy exactly via a linear solve.
 */
struct MpiConfig {
    static constexpr int kMInfinity = -1;

    int m = 1;                       // >= 1, or kMInfinity
    int max_iterations = 500;        // >= 1
    double convergence_tol = 1e-12;  // > 0, sup-norm change threshold
    std::string tie_break = "lowest-action-index";
};

/// Throws std::invalid_argument when a field is out of range.
void validate_config(const MpiConfig& cfg);

/// One iterate of the MPI loop: the improved policy and its (partial) evaluation.
struct MpiStep {
    Policy policy;
    ValueFunction value;
};

/// [T^pi v](s) = <pi(.|s), Q_v(s,.)>.
ValueFunction apply_bellman(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v);

/// [T* v](s) = max_a Q_v(s,a).
ValueFunction bellman_optimality(const TabularMdp& mdp, const ValueFunction& v);

/**
 * One deterministic member of the greedy set G(v): argmax_a Q_v(s,a) per
 * state, exact ties resolved to the lowest action index. Satisfies
 * apply_bellman(greedy, v) == bellman_optimality(v) up to rounding.
 */
Policy greedy_policy(const TabularMdp& mdp, const ValueFunction& v,
                     const std::string& tie_break = "lowest-action-index");

/**
 * Exact MPI: pi_{t+1} = greedy(V_t), V_{t+1} = (T^{pi_{t+1}})^m V_t.
 * Stops when the sup-norm change drops below convergence_tol or after
 * max_iterations. The returned sequence starts at t=1 (v0 not included).
 */
std::vector<MpiStep> run_mpi(const TabularMdp& mdp, const MpiConfig& cfg, const ValueFunction& v0);

/// <pi, Q_v> + alpha*H(pi) per state: entropy bonus so that the greedy step
/// of the regularized scheme is exactly the Boltzmann policy.
ValueFunction regularized_bellman(const TabularMdp& mdp, const Policy& pi,
                                  const ValueFunction& v, double alpha);

/// Fixed point of bellman_optimality to within tol (value iteration with the
/// standard (1-gamma)/(2 gamma) stopping rule).
ValueFunction optimal_value(const TabularMdp& mdp, double tol);

/// Fixed point of the entropy-regularized optimality operator
/// [T v](s) = alpha*log sum_a exp(Q_v(s,a)/alpha), same stopping rule.
ValueFunction soft_optimal_value(const TabularMdp& mdp, double alpha, double tol);

} // namespace drmpi
