#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "drmpi/bellman.hpp"
#include "drmpi/continuous.hpp"
#include "drmpi/envs.hpp"
#include "drmpi/mdp.hpp"
#include "drmpi/robust.hpp"
#include "drmpi/serialize.hpp"
#include "drmpi/soft_robust.hpp"

namespace py = pybind11;
using namespace drmpi;

namespace {

std::vector<double> span_arg(const std::vector<double>& v) { return v; }

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Robust and entropy-regularized modified policy iteration on tabular MDPs";

    py::class_<TabularMdp>(m, "TabularMdp")
        .def(py::init<>())
        .def(py::init<int, int, double, double>(), py::arg("n_states"), py::arg("n_actions"),
             py::arg("gamma"), py::arg("r_max"))
        .def_readwrite("n_states", &TabularMdp::n_states)
        .def_readwrite("n_actions", &TabularMdp::n_actions)
        .def_readwrite("gamma", &TabularMdp::gamma)
        .def_readwrite("r_max", &TabularMdp::r_max)
        .def_readwrite("transition", &TabularMdp::transition)
        .def_readwrite("reward", &TabularMdp::reward)
        .def("p", py::overload_cast<int, int, int>(&TabularMdp::p, py::const_))
        .def("r", py::overload_cast<int, int>(&TabularMdp::r, py::const_));

    py::class_<Policy>(m, "Policy")
        .def(py::init<int, int>(), py::arg("n_states"), py::arg("n_actions"))
        .def_readwrite("n_states", &Policy::n_states)
        .def_readwrite("n_actions", &Policy::n_actions)
        .def_readwrite("probs", &Policy::probs);

    py::class_<MpiConfig>(m, "MpiConfig")
        .def(py::init<>())
        .def_readwrite("m", &MpiConfig::m)
        .def_readwrite("max_iterations", &MpiConfig::max_iterations)
        .def_readwrite("convergence_tol", &MpiConfig::convergence_tol)
        .def_readwrite("tie_break", &MpiConfig::tie_break)
        .def_readonly_static("M_INFINITY", &MpiConfig::kMInfinity);

    py::class_<RobustConfig>(m, "RobustConfig")
        .def(py::init<>())
        .def_readwrite("big_c", &RobustConfig::big_c)
        .def_readwrite("eta", &RobustConfig::eta)
        .def_readwrite("lambda_min", &RobustConfig::lambda_min)
        .def_readwrite("lambda_max", &RobustConfig::lambda_max)
        .def_readwrite("dual_tol", &RobustConfig::dual_tol)
        .def_readwrite("counter_mode", &RobustConfig::counter_mode)
        .def_readwrite("pessimistic_unvisited", &RobustConfig::pessimistic_unvisited);

    py::class_<SoftConfig>(m, "SoftConfig")
        .def(py::init<>())
        .def_readwrite("alpha", &SoftConfig::alpha)
        .def_readwrite("robust", &SoftConfig::robust)
        .def_readwrite("mpi", &SoftConfig::mpi);

    py::class_<DualSolution>(m, "DualSolution")
        .def_readonly("lambda_star", &DualSolution::lambda_star)
        .def_readonly("dual_value", &DualSolution::dual_value)
        .def_readonly("robust_value", &DualSolution::robust_value)
        .def_readonly("realized_kl", &DualSolution::realized_kl);

    py::class_<RunRecord>(m, "RunRecord")
        .def_readonly("t", &RunRecord::t)
        .def_readonly("v", &RunRecord::v)
        .def_readonly("comparison_v", &RunRecord::comparison_v)
        .def_readonly("eps", &RunRecord::eps)
        .def_readonly("eps_max", &RunRecord::eps_max)
        .def_readonly("delta_sup", &RunRecord::delta_sup)
        .def_readonly("sup_loss", &RunRecord::sup_loss)
        .def_readonly("safety_margin_min", &RunRecord::safety_margin_min)
        .def_readonly("e_n", &RunRecord::e_n)
        .def_readonly("alpha", &RunRecord::alpha)
        .def_readonly("lambda_mean", &RunRecord::lambda_mean);

    py::class_<GarnetSpec>(m, "GarnetSpec")
        .def(py::init<>())
        .def_readwrite("n_states", &GarnetSpec::n_states)
        .def_readwrite("n_actions", &GarnetSpec::n_actions)
        .def_readwrite("branching", &GarnetSpec::branching)
        .def_readwrite("reward_sparsity", &GarnetSpec::reward_sparsity)
        .def_readwrite("gamma", &GarnetSpec::gamma)
        .def_readwrite("seed", &GarnetSpec::seed);

    py::class_<CliffGridSpec>(m, "CliffGridSpec")
        .def(py::init<>())
        .def_readwrite("width", &CliffGridSpec::width)
        .def_readwrite("height", &CliffGridSpec::height)
        .def_readwrite("trap_penalty", &CliffGridSpec::trap_penalty)
        .def_readwrite("step_reward", &CliffGridSpec::step_reward)
        .def_readwrite("slip", &CliffGridSpec::slip)
        .def_readwrite("gamma", &CliffGridSpec::gamma)
        .def_readwrite("seed", &CliffGridSpec::seed);

    m.def("generate_garnet", &generate_garnet, py::arg("spec"));
    m.def("generate_cliff_grid", &generate_cliff_grid, py::arg("spec"));
    m.def("mdp_to_json", &mdp_to_json_string, py::arg("mdp"));
    m.def("mdp_from_json", &mdp_from_json_string, py::arg("text"));

    m.def("optimal_value", &optimal_value, py::arg("mdp"), py::arg("tol"));
    m.def("soft_optimal_value", &soft_optimal_value, py::arg("mdp"), py::arg("alpha"),
          py::arg("tol"));
    m.def("exact_policy_value", &exact_policy_value, py::arg("mdp"), py::arg("pi"));
    m.def("greedy_policy", &greedy_policy, py::arg("mdp"), py::arg("v"),
          py::arg("tie_break") = "lowest-action-index");

    m.def(
        "optimal_lambda",
        [](const std::vector<double>& q_row, const std::vector<double>& pi_row, double eps,
           const RobustConfig& cfg) { return optimal_lambda(q_row, pi_row, eps, cfg); },
        py::arg("q_row"), py::arg("pi_row"), py::arg("eps"), py::arg("cfg") = RobustConfig());
    m.def(
        "adversarial_policy",
        [](const std::vector<double>& q_row, const std::vector<double>& pi_row, double lambda) {
            return adversarial_policy(q_row, pi_row, lambda);
        },
        py::arg("q_row"), py::arg("pi_row"), py::arg("lambda"));
    m.def(
        "klreg_dual_logsumexp",
        [](const std::vector<double>& q_row, const std::vector<double>& mu_row, double lambda) {
            return klreg_dual_logsumexp(q_row, mu_row, lambda);
        },
        py::arg("q_row"), py::arg("mu_row"), py::arg("lambda"));
    m.def(
        "klreg_dual_taylor",
        [](const std::vector<double>& q_row, const std::vector<double>& mu_row, double lambda) {
            return klreg_dual_taylor(q_row, mu_row, lambda);
        },
        py::arg("q_row"), py::arg("mu_row"), py::arg("lambda"));

    m.def("run_dr_mpi", &run_dr_mpi, py::arg("mdp"), py::arg("robust_cfg"), py::arg("mpi_cfg"),
          py::arg("v0"), py::arg("seed"));
    m.def("run_soft_dr_mpi", &run_soft_dr_mpi, py::arg("mdp"), py::arg("cfg"), py::arg("v0"),
          py::arg("seed"));

    m.def(
        "run_experiment_json",
        [](const std::string& config_text, const std::string& out_dir) {
            ExperimentConfig cfg = experiment_config_from_json_string(config_text);
            cfg.out_dir = out_dir;
            const ExperimentResult result = run_experiment(cfg);
            py::dict out;
            out["iterations"] = static_cast<int>(result.records.size());
            out["final_sup_loss"] = result.records.back().sup_loss;
            out["e_n"] = result.records.back().e_n;
            out["config_digest"] = result.config_digest;
            out["mean_return"] = result.rollouts.mean_return;
            out["std_return"] = result.rollouts.std_return;
            out["trap_entry_fraction"] = result.rollouts.trap_entry_fraction;
            return out;
        },
        py::arg("config_json"), py::arg("out_dir"),
        "Run an experiment config (JSON text); writes run.csv/summary.json/curves.svg "
        "into out_dir and returns the headline numbers.");

    (void)span_arg;
}
