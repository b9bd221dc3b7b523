#include "drmpi/serialize.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace drmpi {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// nlohmann emits shortest-round-trip floats, which is already lossless, but
// the artifact contract pins 17 significant digits; route every double
// through the same formatter as the CSV writer.
ordered_json number_17(double x) {
    return ordered_json::parse(format_double(x));
}

double require_number(const json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw std::invalid_argument("json: missing numeric field '" + key + "'");
    }
    return j.at(key).get<double>();
}

int require_int(const json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_number_integer()) {
        throw std::invalid_argument("json: missing integer field '" + key + "'");
    }
    return j.at(key).get<int>();
}

} // namespace

std::string mdp_to_json_string(const TabularMdp& mdp) {
    ordered_json j;
    j["n_states"] = mdp.n_states;
    j["n_actions"] = mdp.n_actions;
    j["gamma"] = number_17(mdp.gamma);
    j["r_max"] = number_17(mdp.r_max);
    ordered_json reward = ordered_json::array();
    for (int s = 0; s < mdp.n_states; ++s) {
        ordered_json row = ordered_json::array();
        for (int a = 0; a < mdp.n_actions; ++a) row.push_back(number_17(mdp.r(s, a)));
        reward.push_back(std::move(row));
    }
    j["reward"] = std::move(reward);
    ordered_json transition = ordered_json::array();
    for (int s = 0; s < mdp.n_states; ++s) {
        ordered_json per_action = ordered_json::array();
        for (int a = 0; a < mdp.n_actions; ++a) {
            ordered_json row = ordered_json::array();
            for (int s2 = 0; s2 < mdp.n_states; ++s2) row.push_back(number_17(mdp.p(s, a, s2)));
            per_action.push_back(std::move(row));
        }
        transition.push_back(std::move(per_action));
    }
    j["transition"] = std::move(transition);
    return j.dump(2) + "\n";
}

TabularMdp mdp_from_json_string(const std::string& text) {
    const json j = json::parse(text);
    const int n_states = require_int(j, "n_states");
    const int n_actions = require_int(j, "n_actions");
    if (n_states < 1 || n_actions < 1) {
        throw std::invalid_argument("mdp json: dimensions must be positive");
    }
    TabularMdp mdp(n_states, n_actions, require_number(j, "gamma"), require_number(j, "r_max"));
    const json& reward = j.at("reward");
    const json& transition = j.at("transition");
    if (static_cast<int>(reward.size()) != n_states ||
        static_cast<int>(transition.size()) != n_states) {
        throw std::invalid_argument("mdp json: outer dimension mismatch");
    }
    for (int s = 0; s < n_states; ++s) {
        if (static_cast<int>(reward.at(s).size()) != n_actions ||
            static_cast<int>(transition.at(s).size()) != n_actions) {
            throw std::invalid_argument("mdp json: action dimension mismatch");
        }
        for (int a = 0; a < n_actions; ++a) {
            mdp.r(s, a) = reward.at(s).at(a).get<double>();
            const json& row = transition.at(s).at(a);
            if (static_cast<int>(row.size()) != n_states) {
                throw std::invalid_argument("mdp json: transition row length mismatch");
            }
            for (int s2 = 0; s2 < n_states; ++s2) {
                mdp.p(s, a, s2) = row.at(s2).get<double>();
            }
        }
    }
    const ValidationReport report = validate_mdp(mdp);
    if (!report.ok()) {
        throw std::invalid_argument("mdp json: " + report.violations.front());
    }
    return mdp;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

TabularMdp load_mdp(const std::string& path) {
    return mdp_from_json_string(read_text_file(path));
}

void save_mdp(const TabularMdp& mdp, const std::string& path) {
    write_text_file(path, mdp_to_json_string(mdp));
}

namespace {

GarnetSpec garnet_from_json(const json& j) {
    GarnetSpec spec;
    spec.n_states = require_int(j, "n_states");
    spec.n_actions = require_int(j, "n_actions");
    spec.branching = require_int(j, "branching");
    if (j.contains("reward_sparsity")) spec.reward_sparsity = j.at("reward_sparsity").get<double>();
    spec.gamma = require_number(j, "gamma");
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

CliffGridSpec cliff_from_json(const json& j) {
    CliffGridSpec spec;
    spec.width = require_int(j, "width");
    spec.height = require_int(j, "height");
    if (j.contains("trap_penalty")) spec.trap_penalty = j.at("trap_penalty").get<double>();
    if (j.contains("step_reward")) spec.step_reward = j.at("step_reward").get<double>();
    if (j.contains("slip")) spec.slip = j.at("slip").get<double>();
    spec.gamma = require_number(j, "gamma");
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

EnvSpecFile env_spec_from_json(const json& j) {
    EnvSpecFile out;
    if (!j.contains("kind") || !j.at("kind").is_string()) {
        throw std::invalid_argument("env spec: missing string field 'kind'");
    }
    out.kind = j.at("kind").get<std::string>();
    if (out.kind == "garnet") {
        out.garnet = garnet_from_json(j);
        validate_spec(out.garnet);
    } else if (out.kind == "cliff-grid") {
        out.cliff = cliff_from_json(j);
        validate_spec(out.cliff);
    } else {
        throw std::invalid_argument("env spec: unknown kind '" + out.kind + "'");
    }
    return out;
}

ordered_json garnet_to_json(const GarnetSpec& spec) {
    ordered_json j;
    j["kind"] = "garnet";
    j["n_states"] = spec.n_states;
    j["n_actions"] = spec.n_actions;
    j["branching"] = spec.branching;
    j["reward_sparsity"] = number_17(spec.reward_sparsity);
    j["gamma"] = number_17(spec.gamma);
    j["seed"] = spec.seed;
    return j;
}

ordered_json cliff_to_json(const CliffGridSpec& spec) {
    ordered_json j;
    j["kind"] = "cliff-grid";
    j["width"] = spec.width;
    j["height"] = spec.height;
    j["trap_penalty"] = number_17(spec.trap_penalty);
    j["step_reward"] = number_17(spec.step_reward);
    j["slip"] = number_17(spec.slip);
    j["gamma"] = number_17(spec.gamma);
    j["seed"] = spec.seed;
    return j;
}

MpiConfig mpi_from_json(const json& j) {
    MpiConfig cfg;
    if (j.contains("m")) {
        const json& m = j.at("m");
        if (m.is_string()) {
            if (m.get<std::string>() != "infinity") {
                throw std::invalid_argument("mpi config: m must be an integer or \"infinity\"");
            }
            cfg.m = MpiConfig::kMInfinity;
        } else {
            cfg.m = m.get<int>();
        }
    }
    if (j.contains("max_iterations")) cfg.max_iterations = j.at("max_iterations").get<int>();
    if (j.contains("convergence_tol")) cfg.convergence_tol = j.at("convergence_tol").get<double>();
    if (j.contains("tie_break")) cfg.tie_break = j.at("tie_break").get<std::string>();
    return cfg;
}

ordered_json mpi_to_json(const MpiConfig& cfg) {
    ordered_json j;
    if (cfg.m == MpiConfig::kMInfinity) {
        j["m"] = "infinity";
    } else {
        j["m"] = cfg.m;
    }
    j["max_iterations"] = cfg.max_iterations;
    j["convergence_tol"] = number_17(cfg.convergence_tol);
    j["tie_break"] = cfg.tie_break;
    return j;
}

RobustConfig robust_from_json(const json& j) {
    RobustConfig cfg;
    if (j.contains("big_c")) cfg.big_c = j.at("big_c").get<double>();
    if (j.contains("eta")) cfg.eta = j.at("eta").get<double>();
    if (j.contains("lambda_min")) cfg.lambda_min = j.at("lambda_min").get<double>();
    if (j.contains("lambda_max")) cfg.lambda_max = j.at("lambda_max").get<double>();
    if (j.contains("dual_tol")) cfg.dual_tol = j.at("dual_tol").get<double>();
    if (j.contains("counter_mode")) cfg.counter_mode = j.at("counter_mode").get<std::string>();
    if (j.contains("pessimistic_unvisited")) {
        cfg.pessimistic_unvisited = j.at("pessimistic_unvisited").get<bool>();
    }
    return cfg;
}

ordered_json robust_to_json(const RobustConfig& cfg) {
    ordered_json j;
    j["big_c"] = number_17(cfg.big_c);
    j["eta"] = number_17(cfg.eta);
    j["lambda_min"] = number_17(cfg.lambda_min);
    j["lambda_max"] = number_17(cfg.lambda_max);
    j["dual_tol"] = number_17(cfg.dual_tol);
    j["counter_mode"] = cfg.counter_mode;
    j["pessimistic_unvisited"] = cfg.pessimistic_unvisited;
    return j;
}

NoiseSpec noise_from_json(const json& j) {
    NoiseSpec spec;
    if (j.contains("mode")) spec.mode = j.at("mode").get<std::string>();
    if (j.contains("batch_size")) spec.batch_size = j.at("batch_size").get<int>();
    if (j.contains("batch_growth")) spec.batch_growth = j.at("batch_growth").get<double>();
    if (j.contains("stddev")) spec.stddev = j.at("stddev").get<double>();
    if (j.contains("stddev_decay")) spec.stddev_decay = j.at("stddev_decay").get<double>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

ordered_json noise_to_json(const NoiseSpec& spec) {
    ordered_json j;
    j["mode"] = spec.mode;
    j["batch_size"] = spec.batch_size;
    j["batch_growth"] = number_17(spec.batch_growth);
    j["stddev"] = number_17(spec.stddev);
    j["stddev_decay"] = number_17(spec.stddev_decay);
    j["seed"] = spec.seed;
    return j;
}

} // namespace

EnvSpecFile env_spec_from_json_string(const std::string& text) {
    return env_spec_from_json(json::parse(text));
}

EnvSpecFile load_env_spec(const std::string& path) {
    return env_spec_from_json_string(read_text_file(path));
}

TabularMdp generate_from_spec(const EnvSpecFile& spec) {
    if (spec.kind == "garnet") return generate_garnet(spec.garnet);
    return generate_cliff_grid(spec.cliff);
}

ExperimentConfig experiment_config_from_json_string(const std::string& text) {
    const json j = json::parse(text);
    ExperimentConfig cfg;
    if (j.contains("algorithm")) cfg.algorithm = j.at("algorithm").get<std::string>();
    if (!j.contains("environment")) {
        throw std::invalid_argument("experiment config: missing 'environment'");
    }
    const EnvSpecFile env = env_spec_from_json(j.at("environment"));
    cfg.env_kind = env.kind;
    cfg.garnet = env.garnet;
    cfg.cliff = env.cliff;
    if (j.contains("mpi")) cfg.mpi = mpi_from_json(j.at("mpi"));
    if (j.contains("robust")) cfg.robust = robust_from_json(j.at("robust"));
    if (j.contains("soft") && j.at("soft").contains("alpha")) {
        cfg.soft.alpha = j.at("soft").at("alpha").get<double>();
    }
    // The soft scheme shares the top-level mpi/robust blocks.
    cfg.soft.mpi = cfg.mpi;
    cfg.soft.robust = cfg.robust;
    if (j.contains("noise") && !j.at("noise").is_null()) {
        cfg.has_noise = true;
        cfg.noise = noise_from_json(j.at("noise"));
    }
    if (j.contains("eval_rollouts")) cfg.eval_rollouts = j.at("eval_rollouts").get<int>();
    if (j.contains("eval_horizon")) cfg.eval_horizon = j.at("eval_horizon").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    validate_config(cfg);
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return experiment_config_from_json_string(read_text_file(path));
}

std::string experiment_config_to_json_string(const ExperimentConfig& cfg) {
    ordered_json j;
    j["algorithm"] = cfg.algorithm;
    j["environment"] = cfg.env_kind == "garnet" ? garnet_to_json(cfg.garnet)
                                                : cliff_to_json(cfg.cliff);
    j["mpi"] = mpi_to_json(cfg.mpi);
    j["robust"] = robust_to_json(cfg.robust);
    j["soft"] = ordered_json{{"alpha", number_17(cfg.soft.alpha)}};
    if (cfg.has_noise) {
        j["noise"] = noise_to_json(cfg.noise);
    } else {
        j["noise"] = nullptr;
    }
    j["eval_rollouts"] = cfg.eval_rollouts;
    j["eval_horizon"] = cfg.eval_horizon;
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const char ch : text) {
        hash ^= static_cast<unsigned char>(ch);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string hex_digest(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

} // namespace drmpi
