#include "drmpi/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace drmpi {

void validate_spec(const GarnetSpec& spec) {
    if (spec.n_states < 1 || spec.n_actions < 1) {
        throw std::invalid_argument("GarnetSpec: need n_states >= 1 and n_actions >= 1");
    }
    if (spec.branching < 1 || spec.branching > spec.n_states) {
        throw std::invalid_argument("GarnetSpec: need 1 <= branching <= n_states");
    }
    if (!(spec.reward_sparsity >= 0.0) || !(spec.reward_sparsity <= 1.0)) {
        throw std::invalid_argument("GarnetSpec: reward_sparsity must lie in [0, 1]");
    }
    if (!(spec.gamma >= 0.0) || !(spec.gamma < 1.0)) {
        throw std::invalid_argument("GarnetSpec: gamma must lie in [0, 1)");
    }
}

void validate_spec(const CliffGridSpec& spec) {
    if (spec.width < 1 || spec.height < 1 || spec.width * spec.height < 2) {
        throw std::invalid_argument("CliffGridSpec: need width*height >= 2");
    }
    if (!(spec.slip >= 0.0) || !(spec.slip < 1.0)) {
        throw std::invalid_argument("CliffGridSpec: slip must lie in [0, 1)");
    }
    if (!(spec.gamma >= 0.0) || !(spec.gamma < 1.0)) {
        throw std::invalid_argument("CliffGridSpec: gamma must lie in [0, 1)");
    }
}

void validate_spec(const NoiseSpec& spec) {
    if (spec.mode != "minibatch" && spec.mode != "additive-gaussian") {
        throw std::invalid_argument("NoiseSpec: unknown mode '" + spec.mode + "'");
    }
    if (spec.batch_size < 1) {
        throw std::invalid_argument("NoiseSpec: batch_size must be >= 1");
    }
    if (!(spec.batch_growth >= 0.0)) {
        throw std::invalid_argument("NoiseSpec: batch_growth must be >= 0");
    }
    if (!(spec.stddev >= 0.0)) {
        throw std::invalid_argument("NoiseSpec: stddev must be >= 0");
    }
    if (!(spec.stddev_decay >= 0.0)) {
        throw std::invalid_argument("NoiseSpec: stddev_decay must be >= 0");
    }
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.algorithm != "mpi" && cfg.algorithm != "dr-mpi" && cfg.algorithm != "soft-dr-mpi") {
        throw std::invalid_argument("ExperimentConfig: unknown algorithm '" + cfg.algorithm + "'");
    }
    if (cfg.env_kind == "garnet") {
        validate_spec(cfg.garnet);
    } else if (cfg.env_kind == "cliff-grid") {
        validate_spec(cfg.cliff);
    } else {
        throw std::invalid_argument("ExperimentConfig: unknown env_kind '" + cfg.env_kind + "'");
    }
    validate_config(cfg.mpi);
    if (cfg.algorithm == "dr-mpi") validate_config(cfg.robust);
    if (cfg.algorithm == "soft-dr-mpi") validate_config(cfg.soft);
    if (cfg.has_noise) {
        validate_spec(cfg.noise);
        if (cfg.mpi.m == MpiConfig::kMInfinity) {
            throw std::invalid_argument(
                "ExperimentConfig: sampled evaluation needs a finite backup depth m");
        }
        if (cfg.algorithm == "soft-dr-mpi") {
            // The sampled evaluation step estimates expectation backups; the
            // entropy term of the soft scheme is not a sample average, so the
            // pairing is rejected rather than given an ad-hoc meaning.
            throw std::invalid_argument("ExperimentConfig: noise is not supported with soft-dr-mpi");
        }
    }
    if (cfg.eval_rollouts < 0) {
        throw std::invalid_argument("ExperimentConfig: eval_rollouts must be >= 0");
    }
    if (cfg.eval_horizon < 1) {
        throw std::invalid_argument("ExperimentConfig: eval_horizon must be >= 1");
    }
}

TabularMdp generate_garnet(const GarnetSpec& spec) {
    validate_spec(spec);
    TabularMdp mdp(spec.n_states, spec.n_actions, spec.gamma, 0.0);
    Rng rng(spec.seed);
    std::vector<int> idx(spec.n_states);
    std::vector<double> weights(spec.branching);
    double r_max = 0.0;
    for (int s = 0; s < spec.n_states; ++s) {
        for (int a = 0; a < spec.n_actions; ++a) {
            // Partial Fisher-Yates: the first `branching` slots become a
            // uniform sample of distinct next states.
            std::iota(idx.begin(), idx.end(), 0);
            for (int i = 0; i < spec.branching; ++i) {
                const int j =
                    i + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(spec.n_states - i)));
                std::swap(idx[i], idx[j]);
            }
            // Dirichlet(1,...,1) via normalized unit exponentials.
            double total = 0.0;
            for (int i = 0; i < spec.branching; ++i) {
                weights[i] = rng.exponential();
                total += weights[i];
            }
            for (int i = 0; i < spec.branching; ++i) {
                mdp.p(s, a, idx[i]) = weights[i] / total;
            }
            const double gate = rng.uniform01();
            const double value = rng.normal();
            mdp.r(s, a) = gate < spec.reward_sparsity ? 0.0 : value;
            r_max = std::max(r_max, std::abs(mdp.r(s, a)));
        }
    }
    mdp.r_max = r_max;
    return mdp;
}

int cliff_state_index(const CliffGridSpec& spec, int x, int y) {
    if (x < 0 || x >= spec.width || y < 0 || y >= spec.height) {
        throw std::invalid_argument("cliff_state_index: cell out of range");
    }
    return y * spec.width + x;
}

int cliff_start_state(const CliffGridSpec& spec) {
    return cliff_state_index(spec, 0, spec.height - 1);
}

int cliff_goal_state(const CliffGridSpec& spec) {
    return cliff_state_index(spec, spec.width - 1, spec.height - 1);
}

std::vector<int> cliff_trap_states(const CliffGridSpec& spec) {
    std::vector<int> traps;
    for (int x = 1; x <= spec.width - 2; ++x) {
        traps.push_back(cliff_state_index(spec, x, spec.height - 1));
    }
    return traps;
}

TabularMdp generate_cliff_grid(const CliffGridSpec& spec) {
    validate_spec(spec);
    const int n = spec.width * spec.height;
    TabularMdp mdp(n, 4, spec.gamma, 0.0);

    std::vector<bool> absorbing(n, false);
    absorbing[cliff_goal_state(spec)] = true;
    for (const int s : cliff_trap_states(spec)) absorbing[s] = true;
    std::vector<bool> is_trap(n, false);
    for (const int s : cliff_trap_states(spec)) is_trap[s] = true;

    // dx/dy per action: 0=up, 1=right, 2=down, 3=left.
    constexpr int kDx[4] = {0, 1, 0, -1};
    constexpr int kDy[4] = {-1, 0, 1, 0};

    const auto move = [&](int x, int y, int dir) {
        const int nx = x + kDx[dir];
        const int ny = y + kDy[dir];
        if (nx < 0 || nx >= spec.width || ny < 0 || ny >= spec.height) {
            return cliff_state_index(spec, x, y); // off-grid stays put
        }
        return cliff_state_index(spec, nx, ny);
    };

    double r_max = 0.0;
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            const int s = cliff_state_index(spec, x, y);
            for (int a = 0; a < 4; ++a) {
                if (absorbing[s]) {
                    mdp.p(s, a, s) = 1.0;
                    mdp.r(s, a) = 0.0;
                    continue;
                }
                // Perpendicular slips: actions (a+1)%4 and (a+3)%4.
                mdp.p(s, a, move(x, y, a)) += 1.0 - spec.slip;
                mdp.p(s, a, move(x, y, (a + 1) % 4)) += spec.slip / 2.0;
                mdp.p(s, a, move(x, y, (a + 3) % 4)) += spec.slip / 2.0;
                double trap_mass = 0.0;
                for (const int trap : cliff_trap_states(spec)) trap_mass += mdp.p(s, a, trap);
                mdp.r(s, a) = spec.step_reward + spec.trap_penalty * trap_mass;
                r_max = std::max(r_max, std::abs(mdp.r(s, a)));
            }
        }
    }
    mdp.r_max = r_max;
    return mdp;
}

SampledBackup sampled_bellman(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v,
                              const NoiseSpec& noise, int t, Rng& rng) {
    validate_spec(noise);
    if (t < 1) throw std::invalid_argument("sampled_bellman: t must be >= 1");
    if (static_cast<int>(v.size()) != mdp.n_states) {
        throw std::invalid_argument("sampled_bellman: v dimension mismatch");
    }
    const ValueFunction exact = apply_bellman(mdp, pi, v);
    SampledBackup out;
    out.value.assign(mdp.n_states, 0.0);
    out.delta.assign(mdp.n_states, 0.0);
    if (noise.mode == "minibatch") {
        const double scaled = noise.batch_size * std::pow(static_cast<double>(t), noise.batch_growth);
        const long batch = std::max(1L, std::lround(scaled));
        for (int s = 0; s < mdp.n_states; ++s) {
            double acc = 0.0;
            for (long k = 0; k < batch; ++k) {
                const int a = static_cast<int>(rng.categorical(pi.row(s)));
                const int s2 = static_cast<int>(rng.categorical(mdp.p_row(s, a)));
                acc += mdp.r(s, a) + mdp.gamma * v[s2];
            }
            out.value[s] = acc / static_cast<double>(batch);
        }
    } else {
        const double sigma = noise.stddev * std::pow(static_cast<double>(t), -noise.stddev_decay);
        for (int s = 0; s < mdp.n_states; ++s) {
            out.value[s] = exact[s] + sigma * rng.normal();
        }
    }
    for (int s = 0; s < mdp.n_states; ++s) out.delta[s] = out.value[s] - exact[s];
    return out;
}

namespace {

bool is_absorbing(const TabularMdp& mdp, int s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
        if (mdp.p(s, a, s) != 1.0) return false;
    }
    return true;
}

} // namespace

RolloutStats evaluate_rollouts(const TabularMdp& mdp, const Policy& pi, int count, int horizon,
                               const std::vector<int>& start_states,
                               const std::vector<int>& trap_states, double trap_penalty,
                               Rng& rng) {
    if (count < 0 || horizon < 1) {
        throw std::invalid_argument("evaluate_rollouts: need count >= 0 and horizon >= 1");
    }
    if (start_states.empty()) {
        throw std::invalid_argument("evaluate_rollouts: start_states must be non-empty");
    }
    std::vector<bool> is_trap(mdp.n_states, false);
    for (const int s : trap_states) is_trap[s] = true;
    std::vector<bool> absorbing(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) absorbing[s] = is_absorbing(mdp, s);

    RolloutStats stats;
    stats.count = count;
    std::vector<double> returns;
    std::vector<double> lengths;
    returns.reserve(count);
    lengths.reserve(count);
    int trap_episodes = 0;
    for (int episode = 0; episode < count; ++episode) {
        int s = start_states[rng.uniform_below(start_states.size())];
        double ret = 0.0;
        int steps = 0;
        bool entered_trap = false;
        while (steps < horizon && !absorbing[s]) {
            const int a = static_cast<int>(rng.categorical(pi.row(s)));
            const int s2 = static_cast<int>(rng.categorical(mdp.p_row(s, a)));
            double trap_mass = 0.0;
            for (const int trap : trap_states) trap_mass += mdp.p(s, a, trap);
            // r(s,a) is the P-expectation; realize its trap component.
            ret += mdp.r(s, a) + trap_penalty * ((is_trap[s2] ? 1.0 : 0.0) - trap_mass);
            if (is_trap[s2]) entered_trap = true;
            s = s2;
            ++steps;
        }
        returns.push_back(ret);
        lengths.push_back(static_cast<double>(steps));
        if (entered_trap) ++trap_episodes;
    }
    const auto mean_std = [](const std::vector<double>& xs) {
        if (xs.empty()) return std::pair<double, double>{0.0, 0.0};
        double mean = 0.0;
        for (const double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        if (xs.size() < 2) return std::pair<double, double>{mean, 0.0};
        double ss = 0.0;
        for (const double x : xs) ss += (x - mean) * (x - mean);
        return std::pair<double, double>{mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
    };
    const auto [mr, sr] = mean_std(returns);
    const auto [ml, sl] = mean_std(lengths);
    stats.mean_return = mr;
    stats.std_return = sr;
    stats.mean_length = ml;
    stats.std_length = sl;
    stats.trap_entry_fraction = count > 0 ? static_cast<double>(trap_episodes) / count : 0.0;
    return stats;
}

} // namespace drmpi
