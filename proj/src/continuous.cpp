#include "drmpi/continuous.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace drmpi {

double klreg_dual_logsumexp(std::span<const double> q_row, std::span<const double> mu_row,
                            double lambda) {
    if (lambda == 0.0 || !std::isfinite(lambda)) {
        throw std::invalid_argument("klreg_dual_logsumexp: lambda must be finite and nonzero");
    }
    if (q_row.size() != mu_row.size() || q_row.empty()) {
        throw std::invalid_argument("klreg_dual_logsumexp: dimension mismatch");
    }
    // Shift so every exponent over the support is <= 0: max-shift for
    // lambda > 0 (smoothed max), min-shift for lambda < 0 (smoothed min).
    double shift = lambda > 0.0 ? -std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < q_row.size(); ++a) {
        if (mu_row[a] <= 0.0) continue;
        if (!std::isfinite(q_row[a])) {
            throw std::invalid_argument("klreg_dual_logsumexp: non-finite Q entries");
        }
        shift = lambda > 0.0 ? std::max(shift, q_row[a]) : std::min(shift, q_row[a]);
    }
    if (!std::isfinite(shift)) {
        throw std::invalid_argument("klreg_dual_logsumexp: mu has empty support");
    }
    double z = 0.0;
    for (std::size_t a = 0; a < q_row.size(); ++a) {
        if (mu_row[a] <= 0.0) continue;
        z += mu_row[a] * std::exp((q_row[a] - shift) / lambda);
    }
    return shift + lambda * std::log(z);
}

double klreg_dual_taylor(std::span<const double> q_row, std::span<const double> mu_row,
                         double lambda) {
    if (lambda == 0.0 || !std::isfinite(lambda)) {
        throw std::invalid_argument("klreg_dual_taylor: lambda must be finite and nonzero");
    }
    if (q_row.size() != mu_row.size() || q_row.empty()) {
        throw std::invalid_argument("klreg_dual_taylor: dimension mismatch");
    }
    double mean = 0.0;
    for (std::size_t a = 0; a < q_row.size(); ++a) mean += mu_row[a] * q_row[a];
    double var = 0.0;
    for (std::size_t a = 0; a < q_row.size(); ++a) {
        const double d = q_row[a] - mean;
        var += mu_row[a] * d * d;
    }
    return mean + var / (2.0 * lambda);
}

std::vector<double> shaped_reward(const TabularMdp& mdp, const ShapingPotential& phi) {
    if (static_cast<int>(phi.phi.size()) != mdp.n_states) {
        throw std::invalid_argument("shaped_reward: potential dimension mismatch");
    }
    std::vector<double> out(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions * mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            const std::size_t base =
                (static_cast<std::size_t>(s) * mdp.n_actions + a) * mdp.n_states;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) {
                out[base + s2] = mdp.r(s, a) + mdp.gamma * phi.phi[s2] - phi.phi[s];
            }
        }
    }
    return out;
}

ShapingPotential variance_potential(const TabularMdp& mdp, const QFunction& q, const Policy& mu,
                                    double lambda_shape) {
    if (lambda_shape == 0.0 || !std::isfinite(lambda_shape)) {
        throw std::invalid_argument("variance_potential: lambda_shape must be finite and nonzero");
    }
    if (q.n_states != mdp.n_states || q.n_actions != mdp.n_actions ||
        mu.n_states != mdp.n_states || mu.n_actions != mdp.n_actions) {
        throw std::invalid_argument("variance_potential: dimension mismatch");
    }
    ShapingPotential out;
    out.lambda_shape = lambda_shape;
    out.phi.assign(mdp.n_states, 0.0);
    for (int s = 0; s < mdp.n_states; ++s) {
        double mean = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) mean += mu.prob(s, a) * q.q(s, a);
        double var = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) {
            const double d = q.q(s, a) - mean;
            var += mu.prob(s, a) * d * d;
        }
        out.phi[s] = var / (2.0 * lambda_shape);
    }
    return out;
}

ValueFunction shaped_backup(const TabularMdp& mdp, const ValueFunction& v, const Policy& mu,
                            const ShapingPotential& phi) {
    if (static_cast<int>(v.size()) != mdp.n_states ||
        static_cast<int>(phi.phi.size()) != mdp.n_states) {
        throw std::invalid_argument("shaped_backup: dimension mismatch");
    }
    ValueFunction out(mdp.n_states, 0.0);
    for (int s = 0; s < mdp.n_states; ++s) {
        double acc = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) {
            const double w = mu.prob(s, a);
            if (w == 0.0) continue;
            double next = 0.0;
            const auto row = mdp.p_row(s, a);
            for (int s2 = 0; s2 < mdp.n_states; ++s2) {
                next += row[s2] * (phi.phi[s2] + v[s2]);
            }
            acc += w * (mdp.r(s, a) + mdp.gamma * next);
        }
        out[s] = acc - phi.phi[s];
    }
    return out;
}

TabularMdp shaped_mdp(const TabularMdp& mdp, const ShapingPotential& phi) {
    if (static_cast<int>(phi.phi.size()) != mdp.n_states) {
        throw std::invalid_argument("shaped_mdp: potential dimension mismatch");
    }
    TabularMdp out = mdp;
    double r_max = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            double exp_phi = 0.0;
            const auto row = mdp.p_row(s, a);
            for (int s2 = 0; s2 < mdp.n_states; ++s2) exp_phi += row[s2] * phi.phi[s2];
            out.r(s, a) = mdp.r(s, a) + mdp.gamma * exp_phi - phi.phi[s];
            r_max = std::max(r_max, std::abs(out.r(s, a)));
        }
    }
    out.r_max = r_max;
    return out;
}

double gaussian_q_variance(const GaussianPolicySpec& policy,
                           const std::vector<double>& q_gradient_at_mean) {
    if (policy.mean.size() != policy.stddev.size() ||
        policy.mean.size() != q_gradient_at_mean.size()) {
        throw std::invalid_argument("gaussian_q_variance: dimension mismatch");
    }
    double var = 0.0;
    for (std::size_t i = 0; i < q_gradient_at_mean.size(); ++i) {
        if (!(policy.stddev[i] > 0.0)) {
            throw std::invalid_argument("gaussian_q_variance: stddev entries must be positive");
        }
        const double g = q_gradient_at_mean[i] * policy.stddev[i];
        var += g * g;
    }
    return var;
}

} // namespace drmpi
