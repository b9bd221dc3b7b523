#pragma once

#include "drmpi/bellman.hpp"
#include "drmpi/mdp.hpp"
#include "drmpi/rng.hpp"
#include "drmpi/robust.hpp"
#include "drmpi/soft_robust.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace drmpi {

/**
 * Random MDP family with controlled branching and reward sparsity. Every
 * (s,a) reaches exactly `branching` distinct next states with Dirichlet(1)
 * probabilities; rewards are standard normal, zeroed with probability
 * reward_sparsity. The generated MDP is a pure function of the spec.
 */
struct GarnetSpec {
    int n_states = 20;
    int n_actions = 5;
    int branching = 3;            // 1 <= branching <= n_states
    double reward_sparsity = 0.0; // in [0, 1]
    double gamma = 0.9;
    std::uint64_t seed = 0;
};

/**
 * Cliff-walk gridworld. States are cells (x, y) with index y*width + x and
 * y = 0 the top row. The bottom row holds the start at (0, height-1), traps
 * at x in [1, width-2], and the goal at (width-1, height-1). Actions
 * 0=up, 1=right, 2=down, 3=left move with probability 1-slip and slip/2 for
 * each perpendicular direction; off-grid moves stay in place. Traps and the
 * goal are absorbing with reward 0; every other (s,a) pays
 * step_reward + trap_penalty * P(next state is a trap).
 */
struct CliffGridSpec {
    int width = 12;
    int height = 4;
    double trap_penalty = -25.0; // large negative
    double step_reward = -1.0;
    double slip = 0.15; // in [0, 1)
    double gamma = 0.95;
    std::uint64_t seed = 0;
};

/**
 * Estimation-error mechanism of the sampled evaluation step.
 *
 * "minibatch": per state, averages batch-many draws of r + gamma*v(s') with
 * a ~ pi, s' ~ P; the batch at outer iteration t is
 * max(1, round(batch_size * t^batch_growth)), so batch_growth=0 is a
 * constant batch and batch_growth=1 the linearly growing schedule.
 * "additive-gaussian": exact backup plus zero-mean noise with stddev
 * stddev * t^(-stddev_decay) per state.
 */
struct NoiseSpec {
    std::string mode = "minibatch"; // or "additive-gaussian"
    int batch_size = 8;             // >= 1
    double batch_growth = 0.0;      // >= 0
    double stddev = 0.0;            // >= 0
    double stddev_decay = 0.0;      // >= 0
    std::uint64_t seed = 0;
};

/**
 * One experiment: an environment, an algorithm, its settings, an optional
 * noise layer on the evaluation step, and the rollout evaluation protocol.
 * Every output artifact is a pure function of this struct.
 *
 * seed drives the run's derived streams (noise, visit counters, evaluation
 * rollouts); the environment seed lives in its spec.
 */
struct ExperimentConfig {
    std::string algorithm = "mpi"; // "mpi" | "dr-mpi" | "soft-dr-mpi"
    std::string env_kind = "garnet"; // "garnet" | "cliff-grid"
    GarnetSpec garnet;
    CliffGridSpec cliff;
    MpiConfig mpi;
    RobustConfig robust;
    SoftConfig soft;
    bool has_noise = false;
    NoiseSpec noise;
    int eval_rollouts = 100; // >= 0
    int eval_horizon = 200;  // >= 1
    std::uint64_t seed = 0;
    std::string out_dir;
};

void validate_spec(const GarnetSpec& spec);
void validate_spec(const CliffGridSpec& spec);
void validate_spec(const NoiseSpec& spec);
void validate_config(const ExperimentConfig& cfg);

/// Deterministic Garnet construction; throws on an invalid spec.
TabularMdp generate_garnet(const GarnetSpec& spec);

/// Deterministic cliff-walk construction; throws on an invalid spec.
TabularMdp generate_cliff_grid(const CliffGridSpec& spec);

int cliff_state_index(const CliffGridSpec& spec, int x, int y);
int cliff_start_state(const CliffGridSpec& spec);
int cliff_goal_state(const CliffGridSpec& spec);
std::vector<int> cliff_trap_states(const CliffGridSpec& spec);

/// Noisy evaluation backup plus the realized estimation error
/// delta = value - apply_bellman(pi, v), logged for the error recursion.
struct SampledBackup {
    ValueFunction value;
    ValueFunction delta;
};

/**
 * One sampled application of T^pi. t is the outer iteration index feeding
 * the batch/stddev schedules; rng is the caller-owned noise stream so that
 * consumption stays reproducible across the whole run.
 */
SampledBackup sampled_bellman(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v,
                              const NoiseSpec& noise, int t, Rng& rng);

/**
 * Evaluation rollout statistics: undiscounted return and episode length
 * (mean and sample standard deviation) plus the fraction of episodes that
 * ever entered a trap state.
 */
struct RolloutStats {
    int count = 0;
    double mean_return = 0.0;
    double std_return = 0.0;
    double mean_length = 0.0;
    double std_length = 0.0;
    double trap_entry_fraction = 0.0;
};

/**
 * Simulates `count` episodes under pi, each up to `horizon` steps, stopping
 * early in absorbing states (all actions self-loop with probability 1).
 * Start states are drawn uniformly from start_states. Rewards along the
 * path realize the trap component: r(s,a) is an expectation over next
 * states, so the realized step reward is
 * r(s,a) + trap_penalty*(1[s' is trap] - P(s,a,traps)), which preserves the
 * conditional mean while exposing catastrophic outcomes to the return
 * variance. With no traps the realized reward is exactly r(s,a).
 */
RolloutStats evaluate_rollouts(const TabularMdp& mdp, const Policy& pi, int count, int horizon,
                               const std::vector<int>& start_states,
                               const std::vector<int>& trap_states, double trap_penalty,
                               Rng& rng);

/// Everything run_experiment knows at the end of a run.
struct ExperimentResult {
    TabularMdp mdp;
    std::vector<RunRecord> records;
    Policy final_policy;
    RolloutStats rollouts;
    double wall_seconds = 0.0;
    std::string config_digest; // 16 hex digits
};

/**
 * Runs the configured scheme and, when cfg.out_dir is non-empty, writes
 * run.csv, summary.json, and curves.svg into it (creating the directory).
 * All artifacts are deterministic functions of cfg; wall_seconds appears in
 * summary.json only and never in the CSV.
 */
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// RunRecord rows as CSV. Header t,sup_loss,safety_margin_min,eps_max,
/// delta_sup,E_N with alpha,lambda_mean appended when with_soft_columns;
/// floats at 17 significant digits.
void write_run_csv(const std::vector<RunRecord>& records, const std::string& path,
                   bool with_soft_columns);

/**
 * Standalone SVG line chart of the named CSV columns against the first
 * column. log_y plots log10 of clamped-positive values. Throws when a
 * requested column is missing; zero data rows still produce a valid chart.
 */
void emit_svg_curves(const std::string& csv_path, const std::vector<std::string>& columns,
                     const std::string& out_path, bool log_y = false);

} // namespace drmpi
