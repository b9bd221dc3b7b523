#pragma once

#include "drmpi/continuous.hpp"
#include "drmpi/mdp.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace drmpi::oracles {

/**
 * Settings for the simplex-grid searches.
 *
 * The grid enumerates compositions of round(1/resolution) into |A| parts,
 * which is only feasible for small action counts; max_actions guards the
 * combinatorial blow-up.
 */
struct GridOracleConfig {
    double resolution = 1e-3; // > 0; <= 1e-3 for acceptance-grade runs
    int max_actions = 4;
};

/// Result of a brute-force inner minimization.
struct WorstCase {
    double value = 0.0;
    std::vector<double> row;
};

/**
 * Brute-force min of <p, q_row> over {p : KL(p || pi_row) <= eps} by simplex
 * grid enumeration followed by 50 steps of projected exponentiated-gradient
 * descent from the grid minimizer (feasibility restored by bisecting the
 * mixture path back toward pi_row, along which KL is monotone).
 */
WorstCase brute_force_worst_case(std::span<const double> q_row, std::span<const double> pi_row,
                                 double eps, const GridOracleConfig& cfg);

/// Same search for the entropy-bonus objective <p, q_row> + alpha*H(p).
WorstCase brute_force_soft_worst_case(std::span<const double> q_row, std::span<const double> pi_row,
                                      double eps, double alpha, const GridOracleConfig& cfg);

/// Value iteration to ||V - V*||_inf <= tol; written out here, independent of
/// the library's optimal_value, so it can serve as a cross-check oracle.
ValueFunction value_iteration_reference(const TabularMdp& mdp, double tol);

/// Unbiased sample variance of q(a) over `samples` Gaussian draws.
double monte_carlo_variance(const GaussianPolicySpec& spec,
                            const std::function<double(const std::vector<double>&)>& q,
                            long samples, std::uint64_t seed);

/// Central finite differences per coordinate.
std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& q,
    const std::vector<double>& point, double step);

} // namespace drmpi::oracles
