#pragma once

#include "drmpi/mdp.hpp"

#include <span>
#include <vector>

namespace drmpi {

/**
 * Potential-based shaping data: per-state potential phi together with the
 * multiplier that produced it. lambda_shape < 0 turns the action-value
 * variance into a penalty, steering greedy policies toward states whose
 * backup is less spread out.
 */
struct ShapingPotential {
    std::vector<double> phi;
    double lambda_shape = -1.0; // != 0
};

/// Diagonal Gaussian action distribution (mean action and per-coordinate stddev).
struct GaussianPolicySpec {
    std::vector<double> mean;
    std::vector<double> stddev; // entries > 0
};

/**
 * lambda * log sum_a mu(a) exp(Q(a)/lambda), shift-stabilized.
 * Smoothed maximum for lambda > 0, smoothed minimum for lambda < 0.
 */
double klreg_dual_logsumexp(std::span<const double> q_row, std::span<const double> mu_row,
                            double lambda);

/// Second-order expansion of the above: E_mu[Q] + Var_mu(Q) / (2 lambda).
double klreg_dual_taylor(std::span<const double> q_row, std::span<const double> mu_row,
                         double lambda);

/// Three-index shaped reward r(s,a) + gamma*phi(s') - phi(s), indexed [s*A*S + a*S + s'].
std::vector<double> shaped_reward(const TabularMdp& mdp, const ShapingPotential& phi);

/// phi[s] = Var_{a ~ mu(.|s)}(Q(s,a)) / (2 lambda_shape).
ShapingPotential variance_potential(const TabularMdp& mdp, const QFunction& q,
                                    const Policy& mu, double lambda_shape);

/**
 * Per state, E_{a~mu, s'~P}[r_shaped(s,a,s') + gamma*v(s')]. Telescoping
 * makes this identical to apply_bellman(mu, v) + gamma*E[phi(s')] - phi(s).
 */
ValueFunction shaped_backup(const TabularMdp& mdp, const ValueFunction& v,
                            const Policy& mu, const ShapingPotential& phi);

/**
 * Folds a shaping potential into an ordinary MDP: reward rows become the
 * P-expectation of the shaped three-index reward and r_max is recomputed.
 * Greedy optimal action sets are preserved exactly.
 */
TabularMdp shaped_mdp(const TabularMdp& mdp, const ShapingPotential& phi);

/// First-order (delta-method) variance of Q under a diagonal Gaussian:
/// sum_i g0[i]^2 * stddev[i]^2, with g0 the action gradient at the mean.
double gaussian_q_variance(const GaussianPolicySpec& policy,
                           const std::vector<double>& q_gradient_at_mean);

} // namespace drmpi
