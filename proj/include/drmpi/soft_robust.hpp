#pragma once

#include "drmpi/bellman.hpp"
#include "drmpi/mdp.hpp"
#include "drmpi/robust.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace drmpi {

/// Parameters of the entropy-regularized robust scheme.
struct SoftConfig {
    double alpha = 0.2; // exploration temperature, > 0
    RobustConfig robust;
    MpiConfig mpi;
};

/// Throws std::invalid_argument when a field is out of range.
void validate_config(const SoftConfig& cfg);

/// pi(a|s) proportional to exp(Q(s,a)/alpha), shift-stabilized per row.
Policy boltzmann_policy(const QFunction& q, double alpha);

/**
 * Rows proportional to exp((1/alpha - 1/lambda_s[s]) * Q(s,.)). Identical to
 * adversarial_policy applied to the Boltzmann row: the two exponential tilts
 * compose into a single exponent.
 */
Policy soft_adversarial_policy(const QFunction& q, double alpha,
                               const std::vector<double>& lambda_s);

/**
 * Per state, minimizes the entropy-bonus backup <p, Q_v(s,.)> + alpha*H(p)
 * over the KL ball of radius radii.eps[s] around pi(.|s).
 *
 * The inner objective is concave in p, so the minimum sits at an extreme
 * point of the feasible set and the plain Lagrangian dual is not tight.
 * Every KKT point lies on an exponential family p ~ pi * exp(-tau * c)
 * with c_a = Q_a - alpha*log pi_a restricted to a support subset, and KL is
 * monotone along each signed direction of the family (dKL/dtau =
 * tau*Var(c)), so the solver enumerates: the KL=eps crossings of the family
 * on every support subset (pruned when the subset's minimal KL, -log pi(B),
 * already exceeds eps), the feasible one-hot vertices, and pi itself, then
 * takes the best candidate. lambda is recovered from the winning crossing as
 * alpha + 1/tau, clamped to [lambda_min, lambda_max].
 */
AdversarialBackup soft_adversarial_bellman(const TabularMdp& mdp, const Policy& pi,
                                           const ValueFunction& v, const UncertaintyRadii& radii,
                                           const SoftConfig& cfg);

/**
 * Gap bound for the soft sandwich: regularized_bellman - soft_adversarial_bellman
 * <= (R_max + gamma*||v||_inf + alpha*max_{a in supp}|log pi_row[a]|)*sqrt(2*eps)
 *    + alpha*eps,
 * from H(pi) - H(p) = KL(p||pi) + sum_a (p_a - pi_a) log pi_a plus Pinsker.
 * For a uniform row the entropy factor is exactly alpha*log A.
 */
double soft_pinsker_gap_bound(const TabularMdp& mdp, const ValueFunction& v, double eps_s,
                              double alpha, std::span<const double> pi_row);

/**
 * The soft robust MPI loop: pi_{t+1} = boltzmann_policy(Q_{V~_t}, alpha),
 * then m soft-adversarial backups with radii refreshed once per outer
 * iteration. Logged like run_dr_mpi; the comparison trajectory applies
 * regularized_bellman with the same policy sequence, and losses/margins are
 * measured against the fixed point of the regularized optimality operator.
 */
std::vector<RunRecord> run_soft_dr_mpi(const TabularMdp& mdp, const SoftConfig& cfg,
                                       const ValueFunction& v0, std::uint64_t seed);

} // namespace drmpi
