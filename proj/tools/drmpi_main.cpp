#include "CLI11.hpp"

#include "drmpi/continuous.hpp"
#include "drmpi/envs.hpp"
#include "drmpi/oracles.hpp"
#include "drmpi/robust.hpp"
#include "drmpi/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace drmpi;

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> random_simplex_row(Rng& rng, int n) {
    std::vector<double> row(n);
    double total = 0.0;
    for (double& p : row) {
        p = rng.exponential();
        total += p;
    }
    for (double& p : row) p /= total;
    return row;
}

/// Greedy-optimal action set per state at the given tolerance.
std::vector<std::set<int>> optimal_action_sets(const TabularMdp& mdp, double tol) {
    const ValueFunction v_star = oracles::value_iteration_reference(mdp, 1e-10);
    const QFunction q = q_from_v(mdp, v_star);
    std::vector<std::set<int>> sets(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) {
        double best = q.q(s, 0);
        for (int a = 1; a < mdp.n_actions; ++a) best = std::max(best, q.q(s, a));
        for (int a = 0; a < mdp.n_actions; ++a) {
            if (q.q(s, a) >= best - tol) sets[s].insert(a);
        }
    }
    return sets;
}

int verify_dual(std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x5D));
    oracles::GridOracleConfig grid;
    grid.resolution = 1e-3;
    const double eps_grid[] = {0.01, 0.05, 0.1, 0.5};
    double worst = 0.0;
    for (int i = 0; i < 48; ++i) {
        const int n_actions = 2 + i % 2;
        std::vector<double> q_row(n_actions);
        for (double& q : q_row) q = 2.0 * rng.uniform01() - 1.0;
        const std::vector<double> pi_row = random_simplex_row(rng, n_actions);
        const double eps = eps_grid[i % 4];
        RobustConfig cfg;
        const DualSolution dual = optimal_lambda(q_row, pi_row, eps, cfg);
        const auto oracle = oracles::brute_force_worst_case(q_row, pi_row, eps, grid);
        worst = std::max(worst, std::abs(dual.robust_value - oracle.value));
    }
    std::printf("dual vs exhaustive search, 48 instances: max |diff| = %.3g\n", worst);
    const bool ok = worst <= 1e-5;
    std::printf("verify dual: %s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}

int verify_safety(std::uint64_t seed) {
    bool ok = true;
    for (int i = 0; i < 5; ++i) {
        GarnetSpec spec;
        spec.seed = mix_seed(seed, 0x5A + i);
        const TabularMdp mdp = generate_garnet(spec);
        const ValueFunction v_star = oracles::value_iteration_reference(mdp, 1e-10);
        RobustConfig rcfg;
        MpiConfig mcfg;
        mcfg.max_iterations = 200;
        mcfg.convergence_tol = 1e-300;
        const ValueFunction v0(mdp.n_states, -mdp.r_max / (1.0 - mdp.gamma));
        const auto records = run_dr_mpi(mdp, rcfg, mcfg, v0, spec.seed);
        double worst_low = 0.0, worst_high = 0.0;
        for (const RunRecord& rec : records) {
            for (int s = 0; s < mdp.n_states; ++s) {
                worst_low = std::max(worst_low, rec.v[s] - rec.comparison_v[s]);
                worst_high = std::max(worst_high, rec.comparison_v[s] - v_star[s]);
            }
        }
        std::printf("garnet %d: max robust-over-exact = %.3g, max exact-over-opt = %.3g\n", i,
                    worst_low, worst_high);
        ok = ok && worst_low <= 1e-8 && worst_high <= 1e-8;
    }
    std::printf("verify safety: %s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}

int verify_taylor(std::uint64_t) {
    const std::vector<double> q_row = {0.0, 1.0};
    const std::vector<double> mu_row = {0.75, 0.25};
    std::vector<double> log_lambda, log_diff;
    for (const double exponent : {1.0, 1.5, 2.0, 2.5, 3.0}) {
        const double lambda = std::pow(10.0, exponent);
        const double diff = std::abs(klreg_dual_logsumexp(q_row, mu_row, lambda) -
                                     klreg_dual_taylor(q_row, mu_row, lambda));
        log_lambda.push_back(exponent);
        log_diff.push_back(std::log10(diff));
    }
    const double slope = fit_slope(log_lambda, log_diff);
    std::printf("second-order remainder slope over lambda in [10, 1000]: %.4f\n", slope);
    const bool ok = slope <= -1.9;
    std::printf("verify taylor: %s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}

int verify_shaping(std::uint64_t seed) {
    bool ok = true;
    for (int i = 0; i < 5; ++i) {
        GarnetSpec spec;
        spec.seed = mix_seed(seed, 0x54 + i);
        const TabularMdp mdp = generate_garnet(spec);
        Policy uniform(mdp.n_states, mdp.n_actions);
        for (double& p : uniform.probs) p = 1.0 / mdp.n_actions;
        const ValueFunction v_star = oracles::value_iteration_reference(mdp, 1e-10);
        const ShapingPotential phi =
            variance_potential(mdp, q_from_v(mdp, v_star), uniform, -1.0);
        const TabularMdp shaped = shaped_mdp(mdp, phi);
        const auto original_sets = optimal_action_sets(mdp, 1e-7);
        const auto shaped_sets = optimal_action_sets(shaped, 1e-7);
        int mismatches = 0;
        for (int s = 0; s < mdp.n_states; ++s) {
            if (original_sets[s] != shaped_sets[s]) ++mismatches;
        }
        std::printf("garnet %d: states with changed optimal action set = %d\n", i, mismatches);
        ok = ok && mismatches == 0;
    }
    std::printf("verify shaping: %s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust and entropy-regularized modified policy iteration on tabular MDPs"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-env", "Generate an MDP from an environment spec");
    std::string gen_spec, gen_out;
    gen->add_option("--spec", gen_spec, "Environment spec JSON")->required();
    gen->add_option("--out", gen_out, "Output MDP JSON")->required();

    auto* run = app.add_subcommand("run", "Run an experiment config");
    std::string run_config, run_out;
    run->add_option("--config", run_config, "Experiment config JSON")->required();
    run->add_option("--out", run_out, "Output directory")->required();

    auto* plot = app.add_subcommand("plot", "Render CSV columns as an SVG line chart");
    std::string plot_csv, plot_cols, plot_out;
    bool plot_log_y = false;
    plot->add_option("--csv", plot_csv, "Input CSV")->required();
    plot->add_option("--cols", plot_cols, "Comma-separated column names")->required();
    plot->add_option("--out", plot_out, "Output SVG")->required();
    plot->add_flag("--log-y", plot_log_y, "Plot log10 of the values");

    auto* verify = app.add_subcommand("verify", "Cross-check a component against its oracle");
    std::string suite;
    std::uint64_t verify_seed = 0;
    verify->add_option("--suite", suite, "One of dual, safety, taylor, shaping")
        ->required()
        ->check(CLI::IsMember({"dual", "safety", "taylor", "shaping"}));
    verify->add_option("--seed", verify_seed, "Base seed for the suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            save_mdp(generate_from_spec(load_env_spec(gen_spec)), gen_out);
            std::printf("wrote %s\n", gen_out.c_str());
            return 0;
        }
        if (run->parsed()) {
            ExperimentConfig cfg = load_experiment_config(run_config);
            cfg.out_dir = run_out;
            const ExperimentResult result = run_experiment(cfg);
            std::printf("%s on %s: %d iterations, final sup loss %.6g, wrote %s\n",
                        cfg.algorithm.c_str(), cfg.env_kind.c_str(),
                        static_cast<int>(result.records.size()),
                        result.records.back().sup_loss, run_out.c_str());
            return 0;
        }
        if (plot->parsed()) {
            emit_svg_curves(plot_csv, split_commas(plot_cols), plot_out, plot_log_y);
            std::printf("wrote %s\n", plot_out.c_str());
            return 0;
        }
        if (suite == "dual") return verify_dual(verify_seed);
        if (suite == "safety") return verify_safety(verify_seed);
        if (suite == "taylor") return verify_taylor(verify_seed);
        return verify_shaping(verify_seed);
    } catch (const std::exception& error) {
        std::fprintf(stderr, "error: %s\n", error.what());
        return 2;
    }
}
