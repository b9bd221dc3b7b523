#pragma once

#include "drmpi/bellman.hpp"
#include "drmpi/mdp.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace drmpi {

/// Per-state KL radius eps(s) >= 0 defining the uncertainty ball around pi.
struct UncertaintyRadii {
    std::vector<double> eps;
};

/// State visitation counts n[s] plus the total environment steps t they came from.
struct VisitCounter {
    std::vector<long> counts;
    long total_steps = 0;
};

/**
 * Parameters of the robust scheme: the radius schedule constants (C, eta),
 * the dual search interval and tolerance, and how visitation counts are
 * collected.
 *
 * counter_mode "uniform-synthetic" sets n[s] = ceil(t/S) for every state
 * (one synthetic environment step per outer iteration), making the radius
 * schedule a deterministic function of the iteration index. "trajectory"
 * rolls out S environment steps under the current greedy policy between
 * outer iterations, from a uniformly drawn start state.
 *
 * pessimistic_unvisited is a deliberate departure from the written schedule
 * (which assigns radius 0 below the visitation threshold): when set,
 * under-visited states keep the radius C*max(n,1)^(-eta) instead of 0, i.e.
 * scarce data means a larger ball. Off by default and excluded from the
 * acceptance suite.
 */
struct RobustConfig {
    double big_c = 1.0;   // C > 0 (C = 0 allowed: degenerate, radii all zero)
    double eta = 0.5;     // eta > 0
    double lambda_min = 1e-6;
    double lambda_max = 1e6;
    double dual_tol = 1e-10; // golden-section bracket width in log-lambda
    std::string counter_mode = "uniform-synthetic";
    bool pessimistic_unvisited = false;
};

/// Throws std::invalid_argument when a field is out of range.
void validate_config(const RobustConfig& cfg);

/**
 * Outcome of the per-state dual minimization.
 *
 * robust_value = -g(lambda_star) is the adversarial backup; realized_kl is
 * the KL divergence of the induced adversarial policy from pi. At an
 * interior lambda_star complementary slackness pins realized_kl to eps; at
 * the lambda_min boundary the constraint may be slack (realized_kl <= eps).
 */
struct DualSolution {
    double lambda_star = 0.0;
    double dual_value = 0.0;
    double robust_value = 0.0;
    double realized_kl = 0.0;
};

/**
 * One logged iteration of a robust/soft run.
 *
 * v is the robust iterate; comparison_v is the exact-operator trajectory
 * driven by the same policy sequence (the V_t of the safety ordering).
 * delta_sup is the sup norm of the deviation between the actual update and
 * the exact m-fold plain backup of the previous iterate; e_n is its
 * discounted accumulation E_t = gamma*(E_{t-1} + delta_{t-1}).
 * alpha and lambda_mean are NaN for runs where they do not apply.
 */
struct RunRecord {
    int t = 0;
    ValueFunction v;
    ValueFunction comparison_v;
    std::vector<double> eps;
    double eps_max = 0.0;
    double delta_sup = 0.0;
    double sup_loss = 0.0;
    double safety_margin_min = 0.0;
    double e_n = 0.0;
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double lambda_mean = std::numeric_limits<double>::quiet_NaN();
};

/// Adversarial backup values together with the per-state dual solutions.
struct AdversarialBackup {
    ValueFunction value;
    std::vector<DualSolution> duals;
};

/**
 * Radius schedule: eps[s] = C*n[s]^(-eta) when n[s] >= t/S, else 0.
 * Requires counter.total_steps >= 1.
 */
UncertaintyRadii uncertainty_radius(const VisitCounter& counter, const RobustConfig& cfg,
                                    int n_states);

/**
 * The 1-d dual objective g(lambda) = lambda*log sum_a pi(a)*exp(-Q(a)/lambda)
 * + lambda*eps, shift-stabilized. g is convex in lambda and the adversarial
 * backup equals -inf_{lambda>0} g(lambda).
 */
double dual_objective(std::span<const double> q_row, std::span<const double> pi_row, double eps,
                      double lambda);

/**
 * Minimizes g over [lambda_min, lambda_max] by golden-section search in
 * log-lambda (convexity survives the monotone reparametrization) down to
 * bracket width dual_tol. eps = 0 short-circuits to the exact no-adversary
 * backup <pi, Q> with lambda_star = lambda_max as a sentinel.
 */
DualSolution optimal_lambda(std::span<const double> q_row, std::span<const double> pi_row,
                            double eps, const RobustConfig& cfg);

/// pi_eps(a) proportional to pi(a)*exp(-Q(a)/lambda), shift-stabilized.
std::vector<double> adversarial_policy(std::span<const double> q_row,
                                       std::span<const double> pi_row, double lambda);

/// Per-state adversarial backup: Q row from v, then optimal_lambda.
AdversarialBackup adversarial_bellman(const TabularMdp& mdp, const Policy& pi,
                                      const ValueFunction& v, const UncertaintyRadii& radii,
                                      const RobustConfig& cfg);

/// (R_max + gamma*||v||_inf) * sqrt(2*eps_s): per-state bound on the gap
/// between the plain and adversarial backups (TV-Lipschitz bound through
/// Pinsker's inequality).
double pinsker_gap_bound(const TabularMdp& mdp, const ValueFunction& v, double eps_s);

/**
 * The robust MPI loop: pi_{t+1} = greedy(V~_t), radii refreshed once per
 * outer iteration from the visit counter, then m adversarial backups with
 * those radii (m = infinity iterates the adversarial operator to its fixed
 * point). Records carry the exact-operator comparison trajectory (same
 * policy sequence) and safety margins against V* computed internally.
 * seed drives the trajectory-mode counter stream only.
 */
std::vector<RunRecord> run_dr_mpi(const TabularMdp& mdp, const RobustConfig& cfg,
                                  const MpiConfig& mpi_cfg, const ValueFunction& v0,
                                  std::uint64_t seed);

/**
 * E_N over a record sequence: sum_{k=1}^{N-1} gamma^k * x_{N-k} where x_t is
 * ||delta_t||_inf for which="delta", or box*eps_max_t with
 * box = R_max/(1-gamma) for which="epsilon".
 */
double compute_error_bound(const std::vector<RunRecord>& records, const TabularMdp& mdp,
                           const std::string& which);

} // namespace drmpi
