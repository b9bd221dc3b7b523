#include "drmpi/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace drmpi {

void validate_config(const MpiConfig& cfg) {
    if (cfg.m != MpiConfig::kMInfinity && cfg.m < 1) {
        throw std::invalid_argument("MpiConfig: m must be >= 1 or infinity");
    }
    if (cfg.max_iterations < 1) {
        throw std::invalid_argument("MpiConfig: max_iterations must be >= 1");
    }
    if (!(cfg.convergence_tol > 0.0)) {
        throw std::invalid_argument("MpiConfig: convergence_tol must be positive");
    }
    if (cfg.tie_break != "lowest-action-index") {
        throw std::invalid_argument("MpiConfig: unknown tie_break rule '" + cfg.tie_break + "'");
    }
}

ValueFunction apply_bellman(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v) {
    if (static_cast<int>(v.size()) != mdp.n_states ||
        pi.n_states != mdp.n_states || pi.n_actions != mdp.n_actions) {
        throw std::invalid_argument("apply_bellman: dimension mismatch");
    }
    ValueFunction out(mdp.n_states, 0.0);
    for (int s = 0; s < mdp.n_states; ++s) {
        double acc = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) {
            const double pa = pi.prob(s, a);
            if (pa == 0.0) continue;
            const auto row = mdp.p_row(s, a);
            double ev = 0.0;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) ev += row[s2] * v[s2];
            acc += pa * (mdp.r(s, a) + mdp.gamma * ev);
        }
        out[s] = acc;
    }
    return out;
}

ValueFunction bellman_optimality(const TabularMdp& mdp, const ValueFunction& v) {
    if (static_cast<int>(v.size()) != mdp.n_states) {
        throw std::invalid_argument("bellman_optimality: dimension mismatch");
    }
    ValueFunction out(mdp.n_states, 0.0);
    for (int s = 0; s < mdp.n_states; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < mdp.n_actions; ++a) {
            const auto row = mdp.p_row(s, a);
            double ev = 0.0;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) ev += row[s2] * v[s2];
            best = std::max(best, mdp.r(s, a) + mdp.gamma * ev);
        }
        out[s] = best;
    }
    return out;
}

Policy greedy_policy(const TabularMdp& mdp, const ValueFunction& v, const std::string& tie_break) {
    if (tie_break != "lowest-action-index") {
        throw std::invalid_argument("greedy_policy: unknown tie_break rule '" + tie_break + "'");
    }
    const QFunction q = q_from_v(mdp, v);
    Policy pi(mdp.n_states, mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s) {
        int best = 0;
        // Strict comparison keeps the lowest index on exact ties.
        for (int a = 1; a < mdp.n_actions; ++a) {
            if (q.q(s, a) > q.q(s, best)) best = a;
        }
        pi.prob(s, best) = 1.0;
    }
    return pi;
}

std::vector<MpiStep> run_mpi(const TabularMdp& mdp, const MpiConfig& cfg, const ValueFunction& v0) {
    validate_config(cfg);
    if (static_cast<int>(v0.size()) != mdp.n_states) {
        throw std::invalid_argument("run_mpi: v0 dimension mismatch");
    }
    std::vector<MpiStep> trace;
    trace.reserve(cfg.max_iterations);
    ValueFunction v = v0;
    for (int t = 0; t < cfg.max_iterations; ++t) {
        Policy pi = greedy_policy(mdp, v, cfg.tie_break);
        ValueFunction next;
        if (cfg.m == MpiConfig::kMInfinity) {
            next = exact_policy_value(mdp, pi);
        } else {
            next = v;
            for (int k = 0; k < cfg.m; ++k) next = apply_bellman(mdp, pi, next);
        }
        const double change = sup_distance(next, v);
        v = std::move(next);
        trace.push_back({std::move(pi), v});
        if (change < cfg.convergence_tol) break;
    }
    return trace;
}

ValueFunction regularized_bellman(const TabularMdp& mdp, const Policy& pi,
                                  const ValueFunction& v, double alpha) {
    if (alpha < 0.0) {
        throw std::invalid_argument("regularized_bellman: alpha must be >= 0");
    }
    ValueFunction out = apply_bellman(mdp, pi, v);
    if (alpha == 0.0) return out;
    for (int s = 0; s < mdp.n_states; ++s) {
        out[s] += alpha * entropy(pi.row(s));
    }
    return out;
}

namespace {

// Iterates `step` until sup-change < tol*(1-gamma)/(2*gamma), which leaves
// the iterate within tol of the operator's fixed point.
template <typename StepFn>
ValueFunction iterate_to_fixed_point(const TabularMdp& mdp, double tol, StepFn step) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const double gamma = mdp.gamma;
    const double stop = gamma > 0.0 ? tol * (1.0 - gamma) / (2.0 * gamma) : tol;
    ValueFunction v(mdp.n_states, 0.0);
    // gamma=0 converges in one step; cap generously otherwise.
    const int cap = 1 + static_cast<int>(
        gamma > 0.0 ? std::ceil(std::log(stop > 1e-300 ? stop : 1e-300) / std::log(gamma)) + 64.0
                    : 2.0);
    for (int t = 0; t < std::max(cap, 2); ++t) {
        ValueFunction next = step(v);
        const double change = sup_distance(next, v);
        v = std::move(next);
        if (change < stop) break;
    }
    return v;
}

} // namespace

ValueFunction optimal_value(const TabularMdp& mdp, double tol) {
    return iterate_to_fixed_point(mdp, tol, [&](const ValueFunction& v) {
        return bellman_optimality(mdp, v);
    });
}

ValueFunction soft_optimal_value(const TabularMdp& mdp, double alpha, double tol) {
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("soft_optimal_value: alpha must be positive");
    }
    return iterate_to_fixed_point(mdp, tol, [&](const ValueFunction& v) {
        const QFunction q = q_from_v(mdp, v);
        ValueFunction out(mdp.n_states, 0.0);
        for (int s = 0; s < mdp.n_states; ++s) {
            const auto row = q.row(s);
            double hi = row[0];
            for (const double x : row) hi = std::max(hi, x);
            double z = 0.0;
            for (const double x : row) z += std::exp((x - hi) / alpha);
            out[s] = hi + alpha * std::log(z);
        }
        return out;
    });
}

} // namespace drmpi
