#include "drmpi/envs.hpp"
#include "drmpi/serialize.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace drmpi {

namespace {

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

ValueFunction plain_backup_m(const TabularMdp& mdp, const Policy& pi, const ValueFunction& v,
                             int m) {
    ValueFunction out = v;
    for (int k = 0; k < m; ++k) out = apply_bellman(mdp, pi, out);
    return out;
}

RunRecord make_record(int t, const TabularMdp& mdp, const ValueFunction& v,
                      const ValueFunction& v_cmp, const ValueFunction& v_star,
                      const UncertaintyRadii& radii, double delta_sup, double e_acc) {
    RunRecord rec;
    rec.t = t;
    rec.v = v;
    rec.comparison_v = v_cmp;
    rec.eps = radii.eps;
    rec.eps_max = radii.eps.empty() ? 0.0
                                    : *std::max_element(radii.eps.begin(), radii.eps.end());
    rec.delta_sup = delta_sup;
    rec.sup_loss = sup_distance(v, v_star);
    double margin = std::numeric_limits<double>::infinity();
    for (int s = 0; s < mdp.n_states; ++s) margin = std::min(margin, v_star[s] - v[s]);
    rec.safety_margin_min = margin;
    rec.e_n = e_acc;
    return rec;
}

/// Exact plain MPI wrapped into the RunRecord schema (all error fields zero).
std::vector<RunRecord> exact_mpi_records(const TabularMdp& mdp, const MpiConfig& cfg,
                                         const ValueFunction& v0) {
    const ValueFunction v_star = optimal_value(mdp, 1e-12);
    const std::vector<MpiStep> steps = run_mpi(mdp, cfg, v0);
    UncertaintyRadii zero;
    zero.eps.assign(mdp.n_states, 0.0);
    std::vector<RunRecord> records;
    records.reserve(steps.size());
    ValueFunction v_cmp = v0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        v_cmp = steps[i].value; // the exact trajectory is the run itself
        records.push_back(make_record(static_cast<int>(i) + 1, mdp, steps[i].value, v_cmp,
                                      v_star, zero, 0.0, 0.0));
    }
    return records;
}

/**
 * Sampled-evaluation loop shared by plain and robust MPI. Per outer
 * iteration: greedy improvement, radii refresh (robust only), then m
 * sampled backups drawn from the evaluation policy (the adversarial
 * reweighting for dr-mpi, pi itself for mpi). The logged delta is the gap
 * to the exact plain m-fold backup of the same iterate, the Eq.-11 error
 * that the bound recursion accumulates.
 */
std::vector<RunRecord> noisy_records(const TabularMdp& mdp, const ExperimentConfig& cfg,
                                     const ValueFunction& v0) {
    const bool robust = cfg.algorithm == "dr-mpi";
    const int n = mdp.n_states;
    const ValueFunction v_star = optimal_value(mdp, 1e-12);

    Rng noise_rng(mix_seed(mix_seed(cfg.seed, 0xA0), cfg.noise.seed));
    VisitCounter counter;
    counter.counts.assign(n, 0);
    Rng counter_rng(mix_seed(cfg.seed, 0xC0));
    int traj_state = static_cast<int>(counter_rng.uniform_below(n));

    UncertaintyRadii radii;
    radii.eps.assign(n, 0.0);

    std::vector<RunRecord> records;
    records.reserve(cfg.mpi.max_iterations);
    ValueFunction v = v0;
    ValueFunction v_cmp = v0;
    double e_acc = 0.0;
    double prev_delta = 0.0;

    for (int t = 1; t <= cfg.mpi.max_iterations; ++t) {
        const Policy pi = greedy_policy(mdp, v, cfg.mpi.tie_break);

        std::vector<DualSolution> duals;
        if (robust) {
            if (cfg.robust.counter_mode == "uniform-synthetic") {
                counter.total_steps = t;
                const long visits = (t + n - 1) / n;
                std::fill(counter.counts.begin(), counter.counts.end(), visits);
            } else {
                for (int k = 0; k < n; ++k) {
                    ++counter.counts[traj_state];
                    const int a = static_cast<int>(counter_rng.categorical(pi.row(traj_state)));
                    traj_state =
                        static_cast<int>(counter_rng.categorical(mdp.p_row(traj_state, a)));
                }
                counter.total_steps += n;
            }
            radii = uncertainty_radius(counter, cfg.robust, n);
        }

        ValueFunction next = v;
        for (int k = 0; k < cfg.mpi.m; ++k) {
            Policy eval_pi = pi;
            if (robust) {
                const QFunction q = q_from_v(mdp, next);
                duals.assign(n, DualSolution{});
                for (int s = 0; s < n; ++s) {
                    duals[s] = optimal_lambda(q.row(s), pi.row(s), radii.eps[s], cfg.robust);
                    const std::vector<double> row =
                        adversarial_policy(q.row(s), pi.row(s), duals[s].lambda_star);
                    for (int a = 0; a < mdp.n_actions; ++a) eval_pi.prob(s, a) = row[a];
                }
            }
            next = sampled_bellman(mdp, eval_pi, next, cfg.noise, t, noise_rng).value;
        }

        const ValueFunction plain_on_iterate = plain_backup_m(mdp, pi, v, cfg.mpi.m);
        v_cmp = plain_backup_m(mdp, pi, v_cmp, cfg.mpi.m);
        e_acc = mdp.gamma * (e_acc + prev_delta);

        RunRecord rec = make_record(t, mdp, next, v_cmp, v_star, radii,
                                    sup_distance(next, plain_on_iterate), e_acc);
        if (robust) {
            double lam = 0.0;
            for (const DualSolution& d : duals) lam += d.lambda_star;
            rec.lambda_mean = lam / n;
        }
        prev_delta = rec.delta_sup;

        const double change = sup_distance(next, v);
        v = std::move(next);
        records.push_back(std::move(rec));
        if (change < cfg.mpi.convergence_tol) break;
    }
    return records;
}

std::string summary_json_text(const ExperimentResult& result) {
    using ordered_json = nlohmann::ordered_json;
    const RunRecord& last = result.records.back();
    double min_margin = std::numeric_limits<double>::infinity();
    for (const RunRecord& rec : result.records) {
        min_margin = std::min(min_margin, rec.safety_margin_min);
    }
    const auto num = [](double x) { return ordered_json::parse(format_double(x)); };
    ordered_json j;
    j["final_sup_loss"] = num(last.sup_loss);
    j["safety_margin_min"] = num(min_margin);
    j["E_N"] = num(last.e_n);
    j["iterations"] = static_cast<int>(result.records.size());
    j["wall_seconds"] = num(result.wall_seconds);
    j["config_digest"] = result.config_digest;
    ordered_json rollouts;
    rollouts["count"] = result.rollouts.count;
    rollouts["mean_return"] = num(result.rollouts.mean_return);
    rollouts["std_return"] = num(result.rollouts.std_return);
    rollouts["mean_length"] = num(result.rollouts.mean_length);
    rollouts["std_length"] = num(result.rollouts.std_length);
    rollouts["trap_entry_fraction"] = num(result.rollouts.trap_entry_fraction);
    j["rollouts"] = std::move(rollouts);
    return j.dump(2) + "\n";
}

} // namespace

void write_run_csv(const std::vector<RunRecord>& records, const std::string& path,
                   bool with_soft_columns) {
    std::ostringstream out;
    out << "t,sup_loss,safety_margin_min,eps_max,delta_sup,E_N";
    if (with_soft_columns) out << ",alpha,lambda_mean";
    out << "\n";
    for (const RunRecord& rec : records) {
        out << rec.t << ',' << format_double(rec.sup_loss) << ','
            << format_double(rec.safety_margin_min) << ',' << format_double(rec.eps_max) << ','
            << format_double(rec.delta_sup) << ',' << format_double(rec.e_n);
        if (with_soft_columns) {
            out << ',' << format_double(rec.alpha) << ',' << format_double(rec.lambda_mean);
        }
        out << "\n";
    }
    write_text_file(path, out.str());
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    ExperimentResult result;
    result.mdp = cfg.env_kind == "garnet" ? generate_garnet(cfg.garnet)
                                          : generate_cliff_grid(cfg.cliff);
    const TabularMdp& mdp = result.mdp;
    const ValidationReport report = validate_mdp(mdp);
    if (!report.ok()) {
        throw std::runtime_error("run_experiment: generated MDP invalid: " +
                                 report.violations.front());
    }
    result.config_digest = hex_digest(fnv1a64(experiment_config_to_json_string(cfg)));

    // Pessimistic start: a guaranteed lower bound of any attainable value,
    // so the safety ordering holds from the first iterate.
    double floor = -mdp.r_max / (1.0 - mdp.gamma);
    if (cfg.algorithm == "soft-dr-mpi") {
        floor = -(mdp.r_max + cfg.soft.alpha * std::log(static_cast<double>(mdp.n_actions))) /
                (1.0 - mdp.gamma);
    }
    const ValueFunction v0(mdp.n_states, floor);

    const auto t_start = std::chrono::steady_clock::now();
    if (cfg.has_noise) {
        result.records = noisy_records(mdp, cfg, v0);
    } else if (cfg.algorithm == "mpi") {
        result.records = exact_mpi_records(mdp, cfg.mpi, v0);
    } else if (cfg.algorithm == "dr-mpi") {
        result.records = run_dr_mpi(mdp, cfg.robust, cfg.mpi, v0, cfg.seed);
    } else {
        result.records = run_soft_dr_mpi(mdp, cfg.soft, v0, cfg.seed);
    }
    if (result.records.empty()) {
        throw std::runtime_error("run_experiment: no iterations recorded");
    }

    const ValueFunction& v_final = result.records.back().v;
    if (cfg.algorithm == "soft-dr-mpi") {
        result.final_policy = boltzmann_policy(q_from_v(mdp, v_final), cfg.soft.alpha);
    } else {
        result.final_policy = greedy_policy(mdp, v_final, cfg.mpi.tie_break);
    }

    std::vector<int> starts;
    std::vector<int> traps;
    double trap_penalty = 0.0;
    if (cfg.env_kind == "cliff-grid") {
        starts = {cliff_start_state(cfg.cliff)};
        traps = cliff_trap_states(cfg.cliff);
        trap_penalty = cfg.cliff.trap_penalty;
    } else {
        starts.resize(mdp.n_states);
        for (int s = 0; s < mdp.n_states; ++s) starts[s] = s;
    }
    Rng eval_rng(mix_seed(cfg.seed, 0xE0));
    result.rollouts = evaluate_rollouts(mdp, result.final_policy, cfg.eval_rollouts,
                                        cfg.eval_horizon, starts, traps, trap_penalty, eval_rng);

    const auto t_end = std::chrono::steady_clock::now();
    result.wall_seconds = std::chrono::duration<double>(t_end - t_start).count();

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        const std::filesystem::path dir(cfg.out_dir);
        const bool soft_columns = cfg.algorithm == "soft-dr-mpi";
        write_run_csv(result.records, (dir / "run.csv").string(), soft_columns);
        write_text_file((dir / "summary.json").string(), summary_json_text(result));
        emit_svg_curves((dir / "run.csv").string(), {"sup_loss", "eps_max", "E_N"},
                        (dir / "curves.svg").string());
    }
    return result;
}

} // namespace drmpi
