#pragma once

#include "drmpi/envs.hpp"
#include "drmpi/mdp.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace drmpi {

/**
 * JSON text for a TabularMdp:
 * {"n_states":..,"n_actions":..,"gamma":..,"r_max":..,
 *  "reward":[[..] per state], "transition":[[[..] per action] per state]}.
 * Floats carry 17 significant digits so a save/load round-trip is exact.
 */
std::string mdp_to_json_string(const TabularMdp& mdp);

/// Parses the schema above and validates the result; throws on violations.
TabularMdp mdp_from_json_string(const std::string& text);

TabularMdp load_mdp(const std::string& path);
void save_mdp(const TabularMdp& mdp, const std::string& path);

/**
 * Environment spec document: {"kind":"garnet"|"cliff-grid", ...fields of the
 * matching spec struct}. Unknown kinds and malformed fields throw.
 */
struct EnvSpecFile {
    std::string kind;
    GarnetSpec garnet;
    CliffGridSpec cliff;
};

EnvSpecFile env_spec_from_json_string(const std::string& text);
EnvSpecFile load_env_spec(const std::string& path);

/// Builds the MDP the spec document describes.
TabularMdp generate_from_spec(const EnvSpecFile& spec);

/**
 * Experiment config document. Top-level keys: algorithm, environment
 * (an EnvSpecFile document), mpi, robust, soft {alpha}, noise (optional),
 * eval_rollouts, eval_horizon, seed. mpi.m accepts an integer >= 1 or the
 * string "infinity". The soft scheme reuses the top-level mpi/robust blocks.
 * Missing blocks keep struct defaults.
 */
ExperimentConfig experiment_config_from_json_string(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Canonical (sorted-key, 17-digit) JSON text of the config; digest input.
std::string experiment_config_to_json_string(const ExperimentConfig& cfg);

/// FNV-1a over the bytes of text.
std::uint64_t fnv1a64(std::string_view text);

/// 16 lowercase hex digits.
std::string hex_digest(std::uint64_t value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace drmpi
