#include "drmpi/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace drmpi {

namespace {

std::string index_pair(int s, int a) {
    return "(s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")";
}

void check_row_stochastic(std::span<const double> row, const std::string& where,
                          std::vector<std::string>& out) {
    double sum = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (!std::isfinite(row[i])) {
            out.push_back(where + ": non-finite probability at index " + std::to_string(i));
            return;
        }
        if (row[i] < 0.0) {
            out.push_back(where + ": negative probability at index " + std::to_string(i));
        }
        sum += row[i];
    }
    if (std::abs(sum - 1.0) > kProbTolerance) {
        out.push_back(where + ": row sums to " + std::to_string(sum) + ", expected 1");
    }
}

} // namespace

ValidationReport validate_mdp(const TabularMdp& mdp) {
    ValidationReport report;
    if (mdp.n_states <= 0) report.violations.push_back("n_states must be positive");
    if (mdp.n_actions <= 0) report.violations.push_back("n_actions must be positive");
    if (!(mdp.gamma >= 0.0 && mdp.gamma < 1.0)) {
        report.violations.push_back("discount out of range: gamma must satisfy 0 <= gamma < 1");
    }
    if (!std::isfinite(mdp.r_max) || mdp.r_max < 0.0) {
        report.violations.push_back("r_max must be finite and nonnegative");
    }
    if (mdp.n_states <= 0 || mdp.n_actions <= 0) return report;

    const std::size_t expected_p = static_cast<std::size_t>(mdp.n_states) * mdp.n_actions * mdp.n_states;
    const std::size_t expected_r = static_cast<std::size_t>(mdp.n_states) * mdp.n_actions;
    if (mdp.transition.size() != expected_p) {
        report.violations.push_back("transition tensor has wrong size");
        return report;
    }
    if (mdp.reward.size() != expected_r) {
        report.violations.push_back("reward table has wrong size");
        return report;
    }

    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            check_row_stochastic(mdp.p_row(s, a), "transition " + index_pair(s, a),
                                 report.violations);
            const double r = mdp.r(s, a);
            if (!std::isfinite(r)) {
                report.violations.push_back("reward " + index_pair(s, a) + " is not finite");
            } else if (std::abs(r) > mdp.r_max) {
                report.violations.push_back("reward " + index_pair(s, a) + " exceeds r_max");
            }
        }
    }
    return report;
}

ValidationReport validate_policy(const TabularMdp& mdp, const Policy& pi) {
    ValidationReport report;
    if (pi.n_states != mdp.n_states || pi.n_actions != mdp.n_actions) {
        report.violations.push_back("policy dimensions do not match the MDP");
        return report;
    }
    for (int s = 0; s < pi.n_states; ++s) {
        check_row_stochastic(pi.row(s), "policy row s=" + std::to_string(s),
                             report.violations);
    }
    return report;
}

QFunction q_from_v(const TabularMdp& mdp, const ValueFunction& v) {
    if (static_cast<int>(v.size()) != mdp.n_states) {
        throw std::invalid_argument("q_from_v: value dimension does not match the MDP");
    }
    QFunction q(mdp.n_states, mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            const auto row = mdp.p_row(s, a);
            double ev = 0.0;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) ev += row[s2] * v[s2];
            q.q(s, a) = mdp.r(s, a) + mdp.gamma * ev;
        }
    }
    return q;
}

ValueFunction exact_policy_value(const TabularMdp& mdp, const Policy& pi) {
    const int n = mdp.n_states;
    if (pi.n_states != n || pi.n_actions != mdp.n_actions) {
        throw std::invalid_argument("exact_policy_value: policy dimensions do not match");
    }

    // Assemble (I - gamma P^pi) X = r^pi as an augmented dense system.
    std::vector<double> aug(static_cast<std::size_t>(n) * (n + 1), 0.0);
    auto at = [&](int i, int j) -> double& { return aug[static_cast<std::size_t>(i) * (n + 1) + j]; };
    for (int s = 0; s < n; ++s) {
        double rpi = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) {
            const double pa = pi.prob(s, a);
            if (pa == 0.0) continue;
            rpi += pa * mdp.r(s, a);
            const auto row = mdp.p_row(s, a);
            for (int s2 = 0; s2 < n; ++s2) at(s, s2) -= mdp.gamma * pa * row[s2];
        }
        at(s, s) += 1.0;
        at(s, n) = rpi;
    }

    // Gaussian elimination with partial pivoting; the matrix is strictly
    // diagonally dominant for gamma < 1, so pivots stay well away from zero.
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int i = col + 1; i < n; ++i) {
            if (std::abs(at(i, col)) > std::abs(at(pivot, col))) pivot = i;
        }
        if (at(pivot, col) == 0.0) {
            throw std::runtime_error("exact_policy_value: singular system");
        }
        if (pivot != col) {
            for (int j = col; j <= n; ++j) std::swap(at(col, j), at(pivot, j));
        }
        const double d = at(col, col);
        for (int i = col + 1; i < n; ++i) {
            const double f = at(i, col) / d;
            if (f == 0.0) continue;
            for (int j = col; j <= n; ++j) at(i, j) -= f * at(col, j);
        }
    }
    ValueFunction v(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double acc = at(i, n);
        for (int j = i + 1; j < n; ++j) acc -= at(i, j) * v[j];
        v[i] = acc / at(i, i);
    }

    // Residual check against the Bellman fixed point.
    double residual = 0.0;
    for (int s = 0; s < n; ++s) {
        double backed = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) {
            const double pa = pi.prob(s, a);
            if (pa == 0.0) continue;
            const auto row = mdp.p_row(s, a);
            double ev = 0.0;
            for (int s2 = 0; s2 < n; ++s2) ev += row[s2] * v[s2];
            backed += pa * (mdp.r(s, a) + mdp.gamma * ev);
        }
        residual = std::max(residual, std::abs(backed - v[s]));
    }
    if (!(residual <= 1e-10)) {
        throw std::runtime_error("exact_policy_value: Bellman residual " +
                                 std::to_string(residual) + " exceeds 1e-10");
    }
    return v;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("kl_divergence: length mismatch");
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        kl += p[i] * std::log(p[i] / q[i]);
    }
    // Tiny negative values are rounding noise around p == q.
    return kl < 0.0 && kl > -1e-15 ? 0.0 : kl;
}

double entropy(std::span<const double> p) {
    double h = 0.0;
    for (const double x : p) {
        if (x > 0.0) h -= x * std::log(x);
    }
    return h < 0.0 ? 0.0 : h;
}

double l1_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("l1_distance: length mismatch");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
    return d;
}

double sup_norm(const ValueFunction& v) {
    double m = 0.0;
    for (const double x : v) m = std::max(m, std::abs(x));
    return m;
}

double sup_distance(const ValueFunction& a, const ValueFunction& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("sup_distance: length mismatch");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace drmpi
