#pragma once

#include <span>
#include <string>
#include <vector>

namespace drmpi {

/// Per-state value vector, indexed by state.
using ValueFunction = std::vector<double>;

/**
 * Finite MDP (S, A, P, r, gamma) with a declared reward magnitude bound.
 *
 * Dense row-major storage: transition[s*A*S + a*S + s'], reward[s*A + a].
 * S and A are desk-scale, and every algorithm here sweeps all actions
 * anyway, so sparse storage would buy nothing.
 *
 * r_max is a bound, not necessarily the attained maximum: |r[s][a]| <= r_max.
 */
struct TabularMdp {
    int n_states = 0;
    int n_actions = 0;
    double gamma = 0.0;
    double r_max = 0.0;
    std::vector<double> transition; // S*A*S probabilities
    std::vector<double> reward;     // S*A rewards

    TabularMdp() = default;
    TabularMdp(int s, int a, double gamma_, double r_max_)
        : n_states(s), n_actions(a), gamma(gamma_), r_max(r_max_),
          transition(static_cast<std::size_t>(s) * a * s, 0.0),
          reward(static_cast<std::size_t>(s) * a, 0.0) {}

    double p(int s, int a, int s2) const {
        return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
    }
    double& p(int s, int a, int s2) {
        return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
    }
    std::span<const double> p_row(int s, int a) const {
        return {transition.data() + (static_cast<std::size_t>(s) * n_actions + a) * n_states,
                static_cast<std::size_t>(n_states)};
    }
    double r(int s, int a) const {
        return reward[static_cast<std::size_t>(s) * n_actions + a];
    }
    double& r(int s, int a) {
        return reward[static_cast<std::size_t>(s) * n_actions + a];
    }
};

/**
 * Row-stochastic state->action matrix.
 *
 * The same type carries the evaluated policy pi, the prior mu of the
 * regularized operators, and the adversarial reweighting pi^eps.
 */
struct Policy {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> probs; // S*A

    Policy() = default;
    Policy(int s, int a)
        : n_states(s), n_actions(a), probs(static_cast<std::size_t>(s) * a, 0.0) {}

    double prob(int s, int a) const {
        return probs[static_cast<std::size_t>(s) * n_actions + a];
    }
    double& prob(int s, int a) {
        return probs[static_cast<std::size_t>(s) * n_actions + a];
    }
    std::span<const double> row(int s) const {
        return {probs.data() + static_cast<std::size_t>(s) * n_actions,
                static_cast<std::size_t>(n_actions)};
    }
};

/// Per-state-action value table Q[s][a].
struct QFunction {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> values; // S*A

    QFunction() = default;
    QFunction(int s, int a)
        : n_states(s), n_actions(a), values(static_cast<std::size_t>(s) * a, 0.0) {}

    double q(int s, int a) const {
        return values[static_cast<std::size_t>(s) * n_actions + a];
    }
    double& q(int s, int a) {
        return values[static_cast<std::size_t>(s) * n_actions + a];
    }
    std::span<const double> row(int s) const {
        return {values.data() + static_cast<std::size_t>(s) * n_actions,
                static_cast<std::size_t>(n_actions)};
    }
};

/// Outcome of validate_mdp / validate_policy: ok iff no violations collected.
struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Probability rows must sum to 1 within this tolerance; no silent renormalization.
inline constexpr double kProbTolerance = 1e-12;

/// Reports every invariant violation (row sums, negativity, reward bound, discount range).
ValidationReport validate_mdp(const TabularMdp& mdp);

/// Same row-stochasticity checks for a policy against an MDP's dimensions.
ValidationReport validate_policy(const TabularMdp& mdp, const Policy& pi);

/// Q[s][a] = r[s][a] + gamma * sum_s' P[s][a][s'] v[s'].
QFunction q_from_v(const TabularMdp& mdp, const ValueFunction& v);

/**
 * Exact policy evaluation: solves V = r^pi + gamma P^pi V by dense
 * Gaussian elimination with partial pivoting. The system is always
 * nonsingular for gamma < 1; the result is checked against the Bellman
 * residual ||V - T^pi V||_inf <= 1e-10 and a numerical failure is thrown
 * if the check does not hold.
 */
ValueFunction exact_policy_value(const TabularMdp& mdp, const Policy& pi);

/**
 * KL divergence sum_a p[a] log(p[a]/q[a]).
 *
 * Convention: terms with p[a]=0 contribute 0; p[a]>0 with q[a]=0 yields
 * +infinity, so an infeasible direction shows up as an infinite radius
 * rather than an error.
 */
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// Shannon entropy -sum_a p[a] log p[a] in nats, with 0 log 0 = 0.
double entropy(std::span<const double> p);

/// Total variation-style L1 distance sum_a |p[a] - q[a]|.
double l1_distance(std::span<const double> p, std::span<const double> q);

/// sup-norm of a vector.
double sup_norm(const ValueFunction& v);

/// sup-norm distance between equal-length vectors.
double sup_distance(const ValueFunction& a, const ValueFunction& b);

} // namespace drmpi
