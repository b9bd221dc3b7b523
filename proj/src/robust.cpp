#include "drmpi/robust.hpp"

#include "drmpi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drmpi {

void validate_config(const RobustConfig& cfg) {
    if (!(cfg.big_c >= 0.0) || !std::isfinite(cfg.big_c)) {
        throw std::invalid_argument("RobustConfig: big_c must be finite and >= 0");
    }
    if (!(cfg.eta > 0.0)) {
        throw std::invalid_argument("RobustConfig: eta must be positive");
    }
    if (!(cfg.lambda_min > 0.0) || !(cfg.lambda_min < cfg.lambda_max)) {
        throw std::invalid_argument("RobustConfig: need 0 < lambda_min < lambda_max");
    }
    if (!(cfg.dual_tol > 0.0)) {
        throw std::invalid_argument("RobustConfig: dual_tol must be positive");
    }
    if (cfg.counter_mode != "trajectory" && cfg.counter_mode != "uniform-synthetic") {
        throw std::invalid_argument("RobustConfig: unknown counter_mode '" + cfg.counter_mode + "'");
    }
}

UncertaintyRadii uncertainty_radius(const VisitCounter& counter, const RobustConfig& cfg,
                                    int n_states) {
    if (counter.total_steps < 1) {
        throw std::invalid_argument("uncertainty_radius: total_steps must be >= 1");
    }
    if (static_cast<int>(counter.counts.size()) != n_states) {
        throw std::invalid_argument("uncertainty_radius: counter size mismatch");
    }
    const double threshold = static_cast<double>(counter.total_steps) / n_states;
    UncertaintyRadii radii;
    radii.eps.assign(n_states, 0.0);
    for (int s = 0; s < n_states; ++s) {
        const long n = counter.counts[s];
        if (n < 0) throw std::invalid_argument("uncertainty_radius: negative count");
        if (static_cast<double>(n) >= threshold) {
            radii.eps[s] = cfg.big_c * std::pow(static_cast<double>(n), -cfg.eta);
        } else if (cfg.pessimistic_unvisited) {
            radii.eps[s] = cfg.big_c * std::pow(static_cast<double>(std::max(n, 1L)), -cfg.eta);
        }
    }
    return radii;
}

double dual_objective(std::span<const double> q_row, std::span<const double> pi_row, double eps,
                      double lambda) {
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("dual_objective: lambda must be positive");
    }
    if (q_row.size() != pi_row.size()) {
        throw std::invalid_argument("dual_objective: row length mismatch");
    }
    // Shift by the support maximum of -Q/lambda so every exponent is <= 0.
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < q_row.size(); ++a) {
        if (pi_row[a] > 0.0) hi = std::max(hi, -q_row[a] / lambda);
    }
    if (!std::isfinite(hi)) {
        throw std::invalid_argument("dual_objective: pi has empty support");
    }
    double z = 0.0;
    for (std::size_t a = 0; a < q_row.size(); ++a) {
        if (pi_row[a] > 0.0) z += pi_row[a] * std::exp(-q_row[a] / lambda - hi);
    }
    return lambda * (hi + std::log(z)) + lambda * eps;
}

std::vector<double> adversarial_policy(std::span<const double> q_row,
                                       std::span<const double> pi_row, double lambda) {
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("adversarial_policy: lambda must be positive");
    }
    if (q_row.size() != pi_row.size()) {
        throw std::invalid_argument("adversarial_policy: row length mismatch");
    }
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < q_row.size(); ++a) {
        if (pi_row[a] > 0.0) hi = std::max(hi, -q_row[a] / lambda);
    }
    std::vector<double> out(q_row.size(), 0.0);
    double z = 0.0;
    for (std::size_t a = 0; a < q_row.size(); ++a) {
        if (pi_row[a] > 0.0) {
            out[a] = pi_row[a] * std::exp(-q_row[a] / lambda - hi);
            z += out[a];
        }
    }
    if (!(z > 0.0)) {
        throw std::invalid_argument("adversarial_policy: pi has empty support");
    }
    for (double& x : out) x /= z;
    return out;
}

DualSolution optimal_lambda(std::span<const double> q_row, std::span<const double> pi_row,
                            double eps, const RobustConfig& cfg) {
    for (const double q : q_row) {
        if (!std::isfinite(q)) {
            throw std::invalid_argument("optimal_lambda: non-finite Q entries");
        }
    }
    if (eps < 0.0) throw std::invalid_argument("optimal_lambda: eps must be >= 0");

    DualSolution sol;
    if (eps == 0.0) {
        // No adversary: the infimum is approached as lambda -> infinity and
        // equals -<pi, Q>; return that exactly rather than the clamped search.
        double v = 0.0;
        for (std::size_t a = 0; a < q_row.size(); ++a) v += pi_row[a] * q_row[a];
        sol.lambda_star = cfg.lambda_max;
        sol.robust_value = v;
        sol.dual_value = -v;
        sol.realized_kl = 0.0;
        return sol;
    }

    // Golden-section on log(lambda): g is convex in lambda and the monotone
    // reparametrization preserves unimodality of the restriction.
    const double inv_phi = 0.6180339887498949;
    double a = std::log(cfg.lambda_min);
    double b = std::log(cfg.lambda_max);
    auto g_at = [&](double loglam) { return dual_objective(q_row, pi_row, eps, std::exp(loglam)); };
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = g_at(c);
    double fd = g_at(d);
    for (int it = 0; it < 300 && (b - a) > cfg.dual_tol; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = g_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = g_at(d);
        }
    }
    const double lambda_star = std::exp(0.5 * (a + b));
    sol.lambda_star = lambda_star;
    sol.dual_value = dual_objective(q_row, pi_row, eps, lambda_star);
    sol.robust_value = -sol.dual_value;
    sol.realized_kl = kl_divergence(adversarial_policy(q_row, pi_row, lambda_star), pi_row);
    return sol;
}

AdversarialBackup adversarial_bellman(const TabularMdp& mdp, const Policy& pi,
                                      const ValueFunction& v, const UncertaintyRadii& radii,
                                      const RobustConfig& cfg) {
    if (static_cast<int>(radii.eps.size()) != mdp.n_states) {
        throw std::invalid_argument("adversarial_bellman: radii dimension mismatch");
    }
    const QFunction q = q_from_v(mdp, v);
    AdversarialBackup out;
    out.value.assign(mdp.n_states, 0.0);
    out.duals.resize(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) {
        out.duals[s] = optimal_lambda(q.row(s), pi.row(s), radii.eps[s], cfg);
        out.value[s] = out.duals[s].robust_value;
    }
    return out;
}

double pinsker_gap_bound(const TabularMdp& mdp, const ValueFunction& v, double eps_s) {
    const double radius = std::max(eps_s, 0.0);
    return (mdp.r_max + mdp.gamma * sup_norm(v)) * std::sqrt(2.0 * radius);
}

namespace {

ValueFunction plain_backup_m(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v,
                             int m) {
    if (m == MpiConfig::kMInfinity) return exact_policy_value(mdp, pi);
    ValueFunction out = v;
    for (int k = 0; k < m; ++k) out = apply_bellman(mdp, pi, out);
    return out;
}

} // namespace

std::vector<RunRecord> run_dr_mpi(const TabularMdp& mdp, const RobustConfig& cfg,
                                  const MpiConfig& mpi_cfg, const ValueFunction& v0,
                                  std::uint64_t seed) {
    validate_config(cfg);
    validate_config(mpi_cfg);
    if (static_cast<int>(v0.size()) != mdp.n_states) {
        throw std::invalid_argument("run_dr_mpi: v0 dimension mismatch");
    }
    const int n = mdp.n_states;
    const ValueFunction v_star = optimal_value(mdp, 1e-12);

    VisitCounter counter;
    counter.counts.assign(n, 0);
    Rng counter_rng(mix_seed(seed, 0xC0));
    // Trajectory mode walks from a uniformly drawn start state.
    int traj_state = static_cast<int>(counter_rng.uniform_below(n));

    std::vector<RunRecord> records;
    records.reserve(mpi_cfg.max_iterations);
    ValueFunction v = v0;
    ValueFunction v_cmp = v0;
    double e_acc = 0.0;
    double prev_delta = 0.0;

    for (int t = 1; t <= mpi_cfg.max_iterations; ++t) {
        const Policy pi = greedy_policy(mdp, v, mpi_cfg.tie_break);

        if (cfg.counter_mode == "uniform-synthetic") {
            counter.total_steps = t;
            const long visits = (t + n - 1) / n; // ceil(t/S)
            std::fill(counter.counts.begin(), counter.counts.end(), visits);
        } else {
            for (int k = 0; k < n; ++k) {
                ++counter.counts[traj_state];
                const int a = static_cast<int>(counter_rng.categorical(pi.row(traj_state)));
                traj_state = static_cast<int>(counter_rng.categorical(mdp.p_row(traj_state, a)));
            }
            counter.total_steps += n;
        }
        const UncertaintyRadii radii = uncertainty_radius(counter, cfg, n);

        // Radii stay fixed across the m inner backups of this outer iteration.
        ValueFunction next;
        std::vector<DualSolution> duals;
        if (mpi_cfg.m == MpiConfig::kMInfinity) {
            next = v;
            for (int k = 0; k < 100000; ++k) {
                AdversarialBackup b = adversarial_bellman(mdp, pi, next, radii, cfg);
                const double change = sup_distance(b.value, next);
                next = std::move(b.value);
                duals = std::move(b.duals);
                if (change < 1e-13) break;
            }
        } else {
            next = v;
            for (int k = 0; k < mpi_cfg.m; ++k) {
                AdversarialBackup b = adversarial_bellman(mdp, pi, next, radii, cfg);
                next = std::move(b.value);
                duals = std::move(b.duals);
            }
        }

        const ValueFunction plain_on_robust = plain_backup_m(mdp, pi, v, mpi_cfg.m);
        v_cmp = plain_backup_m(mdp, pi, v_cmp, mpi_cfg.m);
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
        double lam = 0.0;
        for (const DualSolution& d : duals) lam += d.lambda_star;
        rec.lambda_mean = lam / n;
        prev_delta = rec.delta_sup;

        const double change = sup_distance(next, v);
        v = std::move(next);
        records.push_back(std::move(rec));
        if (change < mpi_cfg.convergence_tol) break;
    }
    return records;
}

double compute_error_bound(const std::vector<RunRecord>& records, const TabularMdp& mdp,
                           const std::string& which) {
    if (records.size() < 2) {
        throw std::invalid_argument("compute_error_bound: need at least two records");
    }
    if (which != "delta" && which != "epsilon") {
        throw std::invalid_argument("compute_error_bound: which must be 'delta' or 'epsilon'");
    }
    const bool use_delta = which == "delta";
    const double box = mdp.r_max / (1.0 - mdp.gamma);
    const std::size_t n = records.size();
    // E_N = sum_{k=1}^{N-1} gamma^k * x_{N-k}; records[i] holds x at t = i+1.
    double e = 0.0;
    double gk = 1.0;
    for (std::size_t k = 1; k <= n - 1; ++k) {
        gk *= mdp.gamma;
        const RunRecord& rec = records[n - k - 1];
        e += gk * (use_delta ? rec.delta_sup : box * rec.eps_max);
    }
    return e;
}

} // namespace drmpi
