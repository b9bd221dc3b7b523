#include "drmpi/oracles.hpp"

#include "drmpi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace drmpi::oracles {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

// Largest step back toward pi that restores KL(p' || pi) <= eps.
//
// The retraction follows the exponential-coordinate path
// q(t)_a ~ p_a^(1-t) * pi_a^t, along which KL(q(t) || pi) is monotone
// decreasing (with s = 1-t, q is the family pi*exp(s*log(p/pi)) and
// dKL/ds = s*Var(log(p/pi)) >= 0), so bisection finds the sphere crossing.
// For a linear objective this path is exactly the optimal tilt family, which
// keeps the polish from stalling tangentially the way a straight mixture
// chord does. Rows with zeros outside supp(pi) never arise here: callers
// polish from full-support starts.
std::vector<double> project_to_ball(const std::vector<double>& p, std::span<const double> pi,
                                    double eps) {
    if (kl_divergence(p, pi) <= eps) return p;
    std::vector<double> log_ratio(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        log_ratio[i] = p[i] > 0.0 && pi[i] > 0.0 ? std::log(p[i] / pi[i]) : 0.0;
    }
    auto tilt = [&](double t) {
        std::vector<double> out(p.size(), 0.0);
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] > 0.0) hi = std::max(hi, (1.0 - t) * log_ratio[i]);
        }
        double z = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] > 0.0) {
                out[i] = pi[i] * std::exp((1.0 - t) * log_ratio[i] - hi);
                z += out[i];
            }
        }
        for (double& x : out) x /= z;
        return out;
    };
    // The t -> 1 limit is pi restricted to supp(p); if even that limit sits
    // outside the ball, fall back to the mixture chord, which always reaches
    // pi itself (KL along the chord is convex with minimum 0 at t = 1, hence
    // non-increasing).
    if (kl_divergence(tilt(1.0), pi) > eps) {
        auto mix = [&](double t) {
            std::vector<double> out(p.size());
            for (std::size_t i = 0; i < p.size(); ++i) out[i] = (1.0 - t) * p[i] + t * pi[i];
            return out;
        };
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (kl_divergence(mix(mid), pi) <= eps) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return mix(hi);
    }
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (kl_divergence(tilt(mid), pi) <= eps) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return tilt(hi);
}

// Shared grid + polish driver; `objective` maps a candidate row to the value
// being minimized, `gradient` supplies its simplex gradient for the polish.
template <typename Objective, typename Gradient>
WorstCase grid_search(std::span<const double> q_row, std::span<const double> pi_row, double eps,
                      const GridOracleConfig& cfg, Objective objective, Gradient gradient) {
    const int n = static_cast<int>(q_row.size());
    if (n != static_cast<int>(pi_row.size())) {
        throw std::invalid_argument("grid oracle: row length mismatch");
    }
    if (n < 1 || n > cfg.max_actions) {
        throw std::invalid_argument("grid oracle: action count exceeds max_actions");
    }
    if (!(cfg.resolution > 0.0)) {
        throw std::invalid_argument("grid oracle: resolution must be positive");
    }
    if (eps < 0.0) throw std::invalid_argument("grid oracle: eps must be >= 0");

    std::vector<double> base(pi_row.begin(), pi_row.end());
    if (eps == 0.0) {
        return {objective(base), base};
    }

    const long K = std::lround(1.0 / cfg.resolution);

    // log(k/K) table plus per-instance log pi makes the KL feasibility test
    // in the inner loop multiplication-only.
    std::vector<double> log_grid(K + 1, 0.0);
    for (long k = 1; k <= K; ++k) log_grid[k] = std::log(static_cast<double>(k) / K);
    std::vector<double> log_pi(n);
    for (int i = 0; i < n; ++i) {
        log_pi[i] = pi_row[i] > 0.0 ? std::log(pi_row[i])
                                    : -std::numeric_limits<double>::infinity();
    }

    WorstCase best{objective(base), base};
    std::vector<long> parts(n, 0);
    std::vector<double> cand(n, 0.0);
    auto emit = [&]() {
        double kl = 0.0;
        for (int i = 0; i < n; ++i) {
            const long k = parts[i];
            cand[i] = static_cast<double>(k) / K;
            if (k == 0) continue;
            if (!std::isfinite(log_pi[i])) return; // outside supp(pi)
            kl += cand[i] * (log_grid[k] - log_pi[i]);
        }
        if (kl > eps) return;
        const double val = objective(cand);
        if (val < best.value) best = {val, cand};
    };
    // Enumerate all compositions of K into n parts.
    std::function<void(int, long)> rec = [&](int idx, long remaining) {
        if (idx == n - 1) {
            parts[idx] = remaining;
            emit();
            return;
        }
        for (long k = 0; k <= remaining; ++k) {
            parts[idx] = k;
            rec(idx + 1, remaining - k);
        }
    };
    rec(0, K);

    // Projected exponentiated-gradient polish: 50 outer steps, each a line
    // search over geometric step sizes keeping the best feasible candidate.
    // The start blends a sliver of pi into the grid minimizer so the iterate
    // has full supp(pi) and the exponential retraction stays applicable.
    std::vector<double> cur(n);
    for (int i = 0; i < n; ++i) cur[i] = 0.999 * best.row[i] + 0.001 * pi_row[i];
    cur = project_to_ball(cur, pi_row, eps);
    double cur_val = objective(cur);
    for (int it = 0; it < 50; ++it) {
        const std::vector<double> g = gradient(cur);
        std::vector<double> best_next;
        double best_next_val = cur_val;
        double step = 2.0;
        for (int bt = 0; bt < 40; ++bt, step *= 0.5) {
            std::vector<double> next(n);
            double hi = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) hi = std::max(hi, -step * g[i]);
            double z = 0.0;
            for (int i = 0; i < n; ++i) {
                next[i] = cur[i] * std::exp(-step * g[i] - hi);
                z += next[i];
            }
            if (z <= 0.0) continue;
            for (int i = 0; i < n; ++i) next[i] /= z;
            next = project_to_ball(next, pi_row, eps);
            const double val = objective(next);
            if (val < best_next_val) {
                best_next = std::move(next);
                best_next_val = val;
            }
        }
        if (best_next_val >= cur_val - 1e-18) break;
        cur = std::move(best_next);
        cur_val = best_next_val;
    }
    if (cur_val < best.value) best = {cur_val, cur};
    return best;
}

} // namespace

WorstCase brute_force_worst_case(std::span<const double> q_row, std::span<const double> pi_row,
                                 double eps, const GridOracleConfig& cfg) {
    return grid_search(
        q_row, pi_row, eps, cfg,
        [&](const std::vector<double>& p) { return dot(p, q_row); },
        [&](const std::vector<double>& p) {
            (void)p;
            return std::vector<double>(q_row.begin(), q_row.end());
        });
}

WorstCase brute_force_soft_worst_case(std::span<const double> q_row, std::span<const double> pi_row,
                                      double eps, double alpha, const GridOracleConfig& cfg) {
    if (alpha < 0.0) throw std::invalid_argument("soft oracle: alpha must be >= 0");
    return grid_search(
        q_row, pi_row, eps, cfg,
        [&](const std::vector<double>& p) { return dot(p, q_row) + alpha * entropy(p); },
        [&](const std::vector<double>& p) {
            // d/dp_a [<p,Q> - alpha sum p log p] = Q_a - alpha (log p_a + 1).
            std::vector<double> g(q_row.begin(), q_row.end());
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double pa = std::max(p[i], 1e-300);
                g[i] -= alpha * (std::log(pa) + 1.0);
            }
            return g;
        });
}

ValueFunction value_iteration_reference(const TabularMdp& mdp, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("value_iteration_reference: tol must be positive");
    const double gamma = mdp.gamma;
    const double stop = gamma > 0.0 ? tol * (1.0 - gamma) / (2.0 * gamma) : tol;
    ValueFunction v(mdp.n_states, 0.0);
    for (long guard = 0; guard < 100000000L; ++guard) {
        ValueFunction next(mdp.n_states, 0.0);
        for (int s = 0; s < mdp.n_states; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < mdp.n_actions; ++a) {
                const auto row = mdp.p_row(s, a);
                double ev = 0.0;
                for (int s2 = 0; s2 < mdp.n_states; ++s2) ev += row[s2] * v[s2];
                best = std::max(best, mdp.r(s, a) + gamma * ev);
            }
            next[s] = best;
        }
        const double change = sup_distance(next, v);
        v = std::move(next);
        if (change < stop) break;
    }
    return v;
}

double monte_carlo_variance(const GaussianPolicySpec& spec,
                            const std::function<double(const std::vector<double>&)>& q,
                            long samples, std::uint64_t seed) {
    if (samples < 10000) {
        throw std::invalid_argument("monte_carlo_variance: need at least 1e4 samples");
    }
    const std::size_t k = spec.mean.size();
    if (spec.stddev.size() != k) {
        throw std::invalid_argument("monte_carlo_variance: mean/stddev length mismatch");
    }
    Rng rng(seed);
    // Welford keeps two-pass accuracy in one pass.
    double mean = 0.0, m2 = 0.0;
    std::vector<double> a(k, 0.0);
    for (long i = 1; i <= samples; ++i) {
        for (std::size_t j = 0; j < k; ++j) a[j] = spec.mean[j] + spec.stddev[j] * rng.normal();
        const double x = q(a);
        const double d = x - mean;
        mean += d / static_cast<double>(i);
        m2 += d * (x - mean);
    }
    return m2 / static_cast<double>(samples - 1);
}

std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& q,
    const std::vector<double>& point, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("finite_difference_gradient: step must be positive");
    std::vector<double> g(point.size(), 0.0);
    std::vector<double> x = point;
    for (std::size_t i = 0; i < point.size(); ++i) {
        x[i] = point[i] + step;
        const double hi = q(x);
        x[i] = point[i] - step;
        const double lo = q(x);
        x[i] = point[i];
        g[i] = (hi - lo) / (2.0 * step);
    }
    return g;
}

} // namespace drmpi::oracles
