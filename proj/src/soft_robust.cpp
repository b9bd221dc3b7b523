#include "drmpi/soft_robust.hpp"

#include "drmpi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace drmpi {

void validate_config(const SoftConfig& cfg) {
    if (!(cfg.alpha > 0.0)) {
        throw std::invalid_argument("SoftConfig: alpha must be positive");
    }
    validate_config(cfg.robust);
    validate_config(cfg.mpi);
}

Policy boltzmann_policy(const QFunction& q, double alpha) {
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("boltzmann_policy: alpha must be positive");
    }
    Policy pi(q.n_states, q.n_actions);
    for (int s = 0; s < q.n_states; ++s) {
        const auto row = q.row(s);
        double hi = row[0];
        for (const double x : row) hi = std::max(hi, x);
        double z = 0.0;
        for (int a = 0; a < q.n_actions; ++a) {
            pi.prob(s, a) = std::exp((row[a] - hi) / alpha);
            z += pi.prob(s, a);
        }
        for (int a = 0; a < q.n_actions; ++a) pi.prob(s, a) /= z;
    }
    return pi;
}

Policy soft_adversarial_policy(const QFunction& q, double alpha,
                               const std::vector<double>& lambda_s) {
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("soft_adversarial_policy: alpha must be positive");
    }
    if (static_cast<int>(lambda_s.size()) != q.n_states) {
        throw std::invalid_argument("soft_adversarial_policy: lambda dimension mismatch");
    }
    Policy pi(q.n_states, q.n_actions);
    for (int s = 0; s < q.n_states; ++s) {
        const double lambda = lambda_s[s];
        if (!(lambda > 0.0)) {
            throw std::invalid_argument("soft_adversarial_policy: lambda must be positive");
        }
        const double coef = 1.0 / alpha - 1.0 / lambda;
        const auto row = q.row(s);
        // Shift keeps every exponent <= 0 regardless of the coefficient sign.
        double shift = row[0];
        for (const double x : row) shift = coef >= 0.0 ? std::max(shift, x) : std::min(shift, x);
        double z = 0.0;
        for (int a = 0; a < q.n_actions; ++a) {
            pi.prob(s, a) = std::exp(coef * (row[a] - shift));
            z += pi.prob(s, a);
        }
        for (int a = 0; a < q.n_actions; ++a) pi.prob(s, a) /= z;
    }
    return pi;
}

namespace {

// Entropy-bonus objective over a candidate row.
double soft_objective(std::span<const double> p, std::span<const double> q_row, double alpha) {
    double v = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) v += p[a] * q_row[a];
    return v + alpha * entropy(p);
}

struct SoftCandidate {
    double value = std::numeric_limits<double>::infinity();
    double kl = 0.0;
    double lambda = 0.0;
};

// Tilted row over support subset `members`: p_a ~ pi_a * exp(-tau * c_a),
// normalized over the subset, zero elsewhere.
std::vector<double> tilt_row(std::span<const double> pi_row, const std::vector<int>& members,
                             const std::vector<double>& c, double tau) {
    // Shift so every exponent is <= 0.
    double ext = tau >= 0.0 ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < members.size(); ++i) {
        ext = tau >= 0.0 ? std::min(ext, c[i]) : std::max(ext, c[i]);
    }
    std::vector<double> p(pi_row.size(), 0.0);
    double z = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        const double w = pi_row[members[i]] * std::exp(-tau * (c[i] - ext));
        p[members[i]] = w;
        z += w;
    }
    for (double& x : p) x /= z;
    return p;
}

// Exact primal minimizer of <p,Q> + alpha*H(p) over the KL ball; see the
// header comment on soft_adversarial_bellman for the KKT enumeration.
DualSolution soft_worst_case(std::span<const double> q_row, std::span<const double> pi_row,
                             double eps, double alpha, const RobustConfig& rcfg) {
    const int n = static_cast<int>(q_row.size());
    for (const double q : q_row) {
        if (!std::isfinite(q)) {
            throw std::invalid_argument("soft_adversarial_bellman: non-finite Q entries");
        }
    }
    if (eps < 0.0) throw std::invalid_argument("soft_adversarial_bellman: eps must be >= 0");

    std::vector<int> support;
    for (int a = 0; a < n; ++a) {
        if (pi_row[a] > 0.0) support.push_back(a);
    }
    if (support.empty()) {
        throw std::invalid_argument("soft_adversarial_bellman: pi has empty support");
    }

    const double f_pi = soft_objective(pi_row, q_row, alpha);
    DualSolution sol;
    sol.lambda_star = rcfg.lambda_max;
    sol.dual_value = -f_pi;
    sol.robust_value = f_pi;
    sol.realized_kl = 0.0;
    if (eps == 0.0 || support.size() < 2) return sol;

    SoftCandidate best{f_pi, 0.0, rcfg.lambda_max};

    // Feasible one-hot vertices.
    for (const int a : support) {
        const double kl = -std::log(pi_row[a]);
        if (kl <= eps && q_row[a] < best.value) {
            best = {q_row[a], kl, rcfg.lambda_min};
        }
    }

    // Support subsets carrying a tilt family. Bitmask enumeration is fine at
    // desk scale; very wide supports fall back to the full-support family.
    const int m = static_cast<int>(support.size());
    std::vector<std::vector<int>> subsets;
    if (m <= 16) {
        for (unsigned mask = 0; mask < (1u << m); ++mask) {
            if (__builtin_popcount(mask) < 2) continue;
            std::vector<int> members;
            for (int i = 0; i < m; ++i) {
                if (mask & (1u << i)) members.push_back(support[i]);
            }
            subsets.push_back(std::move(members));
        }
    } else {
        subsets.push_back(support);
    }

    for (const std::vector<int>& members : subsets) {
        double mass = 0.0;
        for (const int a : members) mass += pi_row[a];
        // Minimal KL reachable inside this face is -log pi(B).
        if (-std::log(mass) > eps) continue;

        std::vector<double> c(members.size());
        for (std::size_t i = 0; i < members.size(); ++i) {
            c[i] = q_row[members[i]] - alpha * std::log(pi_row[members[i]]);
        }

        // The objective splits as <p,c> - alpha*KL(p||pi). When c is constant
        // on the face (pi is the Boltzmann row of this very Q), the objective
        // equals c_bar - alpha*KL there: every KL = eps point of the face ties
        // at c_bar - alpha*eps and the tilt family collapses to pi, so the
        // sphere candidate has to be taken directly. Its multiplier is the
        // tau -> inf limit of alpha + 1/tau.
        double c_lo = c[0], c_hi = c[0], vertex_kl_max = 0.0;
        for (std::size_t i = 0; i < members.size(); ++i) {
            c_lo = std::min(c_lo, c[i]);
            c_hi = std::max(c_hi, c[i]);
            vertex_kl_max = std::max(vertex_kl_max, -std::log(pi_row[members[i]]));
        }
        if (c_hi - c_lo <= 1e-10 * (1.0 + std::max(std::abs(c_lo), std::abs(c_hi)))) {
            if (eps <= vertex_kl_max) {
                double c_bar = 0.0;
                for (std::size_t i = 0; i < members.size(); ++i) c_bar += pi_row[members[i]] * c[i];
                c_bar /= mass;
                const double value = c_bar - alpha * eps;
                if (value < best.value) {
                    best = {value, eps, std::clamp(alpha, rcfg.lambda_min, rcfg.lambda_max)};
                }
            }
            // Otherwise the ball swallows the whole face and its vertices,
            // which are already enumerated, carry the minimum.
            continue;
        }

        for (const double sign : {1.0, -1.0}) {
            // Bracket the KL = eps crossing; if the whole branch stays inside
            // the ball its limit is a vertex, which is already enumerated.
            double lo = 0.0, hi = 1.0;
            bool crossed = false;
            for (int it = 0; it < 120; ++it) {
                const std::vector<double> p = tilt_row(pi_row, members, c, sign * hi);
                if (kl_divergence(p, pi_row) >= eps) {
                    crossed = true;
                    break;
                }
                lo = hi;
                hi *= 2.0;
            }
            if (!crossed) continue;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const std::vector<double> p = tilt_row(pi_row, members, c, sign * mid);
                if (kl_divergence(p, pi_row) >= eps) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            const double tau = sign * hi;
            const std::vector<double> p = tilt_row(pi_row, members, c, tau);
            const double value = soft_objective(p, q_row, alpha);
            if (value < best.value) {
                const double lambda = alpha + 1.0 / tau;
                best = {value, kl_divergence(p, pi_row),
                        std::clamp(lambda, rcfg.lambda_min, rcfg.lambda_max)};
            }
        }
    }

    // The ball contains pi, so the minimum can never exceed f(pi).
    best.value = std::min(best.value, f_pi);
    sol.lambda_star = best.lambda;
    sol.robust_value = best.value;
    sol.dual_value = -best.value;
    sol.realized_kl = best.kl;
    return sol;
}

ValueFunction regularized_backup_m(const TabularMdp& mdp, const Policy& pi,
                                   const ValueFunction& v, double alpha, int m) {
    if (m == MpiConfig::kMInfinity) {
        // Fixed point of the gamma-contraction T^{pi,alpha}.
        ValueFunction out = v;
        for (int k = 0; k < 100000; ++k) {
            ValueFunction next = regularized_bellman(mdp, pi, out, alpha);
            const double change = sup_distance(next, out);
            out = std::move(next);
            if (change < 1e-13) break;
        }
        return out;
    }
    ValueFunction out = v;
    for (int k = 0; k < m; ++k) out = regularized_bellman(mdp, pi, out, alpha);
    return out;
}

} // namespace

AdversarialBackup soft_adversarial_bellman(const TabularMdp& mdp, const Policy& pi,
                                           const ValueFunction& v, const UncertaintyRadii& radii,
                                           const SoftConfig& cfg) {
    if (static_cast<int>(radii.eps.size()) != mdp.n_states) {
        throw std::invalid_argument("soft_adversarial_bellman: radii dimension mismatch");
    }
    const QFunction q = q_from_v(mdp, v);
    AdversarialBackup out;
    out.value.assign(mdp.n_states, 0.0);
    out.duals.resize(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) {
        out.duals[s] = soft_worst_case(q.row(s), pi.row(s), radii.eps[s], cfg.alpha, cfg.robust);
        out.value[s] = out.duals[s].robust_value;
    }
    return out;
}

double soft_pinsker_gap_bound(const TabularMdp& mdp, const ValueFunction& v, double eps_s,
                              double alpha, std::span<const double> pi_row) {
    const double radius = std::max(eps_s, 0.0);
    double log_range = 0.0;
    for (const double p : pi_row) {
        if (p > 0.0) log_range = std::max(log_range, std::abs(std::log(p)));
    }
    return (mdp.r_max + mdp.gamma * sup_norm(v) + alpha * log_range) * std::sqrt(2.0 * radius) +
           alpha * radius;
}

std::vector<RunRecord> run_soft_dr_mpi(const TabularMdp& mdp, const SoftConfig& cfg,
                                       const ValueFunction& v0, std::uint64_t seed) {
    validate_config(cfg);
    if (static_cast<int>(v0.size()) != mdp.n_states) {
        throw std::invalid_argument("run_soft_dr_mpi: v0 dimension mismatch");
    }
    const int n = mdp.n_states;
    const ValueFunction v_star = soft_optimal_value(mdp, cfg.alpha, 1e-12);

    VisitCounter counter;
    counter.counts.assign(n, 0);
    Rng counter_rng(mix_seed(seed, 0xC0));
    int traj_state = static_cast<int>(counter_rng.uniform_below(n));

    std::vector<RunRecord> records;
    records.reserve(cfg.mpi.max_iterations);
    ValueFunction v = v0;
    ValueFunction v_cmp = v0;
    double e_acc = 0.0;
    double prev_delta = 0.0;

    for (int t = 1; t <= cfg.mpi.max_iterations; ++t) {
        const QFunction q = q_from_v(mdp, v);
        const Policy pi = boltzmann_policy(q, cfg.alpha);

        if (cfg.robust.counter_mode == "uniform-synthetic") {
            counter.total_steps = t;
            const long visits = (t + n - 1) / n;
            std::fill(counter.counts.begin(), counter.counts.end(), visits);
        } else {
            for (int k = 0; k < n; ++k) {
                ++counter.counts[traj_state];
                const int a = static_cast<int>(counter_rng.categorical(pi.row(traj_state)));
                traj_state = static_cast<int>(counter_rng.categorical(mdp.p_row(traj_state, a)));
            }
            counter.total_steps += n;
        }
        const UncertaintyRadii radii = uncertainty_radius(counter, cfg.robust, n);

        ValueFunction next;
        std::vector<DualSolution> duals;
        if (cfg.mpi.m == MpiConfig::kMInfinity) {
            next = v;
            for (int k = 0; k < 100000; ++k) {
                AdversarialBackup b = soft_adversarial_bellman(mdp, pi, next, radii, cfg);
                const double change = sup_distance(b.value, next);
                next = std::move(b.value);
                duals = std::move(b.duals);
                if (change < 1e-13) break;
            }
        } else {
            next = v;
            for (int k = 0; k < cfg.mpi.m; ++k) {
                AdversarialBackup b = soft_adversarial_bellman(mdp, pi, next, radii, cfg);
                next = std::move(b.value);
                duals = std::move(b.duals);
            }
        }

        const ValueFunction plain_on_robust =
            regularized_backup_m(mdp, pi, v, cfg.alpha, cfg.mpi.m);
        v_cmp = regularized_backup_m(mdp, pi, v_cmp, cfg.alpha, cfg.mpi.m);
        e_acc = mdp.gamma * (e_acc + prev_delta);

        RunRecord rec;
        rec.t = t;
        rec.v = next;
        rec.comparison_v = v_cmp;
        rec.eps = radii.eps;
        rec.eps_max = *std::max_element(radii.eps.begin(), radii.eps.end());
        rec.delta_sup = sup_distance(next, plain_on_robust);
        rec.sup_loss = sup_distance(next, v_star);
        double margin = std::numeric_limits<double>::infinity();
        for (int s = 0; s < n; ++s) margin = std::min(margin, v_star[s] - next[s]);
        rec.safety_margin_min = margin;
        rec.e_n = e_acc;
        rec.alpha = cfg.alpha;
        double lam = 0.0;
        for (const DualSolution& d : duals) lam += d.lambda_star;
        rec.lambda_mean = lam / n;
        prev_delta = rec.delta_sup;

        const double change = sup_distance(next, v);
        v = std::move(next);
        records.push_back(std::move(rec));
        if (change < cfg.mpi.convergence_tol) break;
    }
    return records;
}

} // namespace drmpi
