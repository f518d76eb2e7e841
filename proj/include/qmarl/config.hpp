#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmarl/baselines.hpp"
#include "qmarl/env.hpp"
#include "qmarl/textio.hpp"
#include "qmarl/trainer.hpp"

namespace qmarl {

/// Configuration problems are reported separately from runtime failures so
/// the CLI can map them to their own exit code.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Experiment-matrix settings that sit outside env/trainer/model.
struct RunConfig {
    Framework framework = Framework::Proposed;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::string out_dir = "runs";
    int eval_episodes = 100;
    int random_walk_episodes = 200;
    std::uint64_t random_walk_seed = 99;

    void validate() const {
        if (seeds.empty()) throw ConfigError("run.seeds must list at least one seed");
        if (eval_episodes < 1) throw ConfigError("run.eval_episodes must be positive");
        if (random_walk_episodes < 1) throw ConfigError("run.random_walk_episodes must be positive");
    }
};

struct ExperimentConfig {
    env::EnvConfig env;
    TrainerConfig trainer;
    ModelConfig model;
    RunConfig run;

    void validate() const {
        try {
            env.validate();
            trainer.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        if (model.logit_scale <= 0.0) throw ConfigError("model.logit_scale must be positive");
        run.validate();
    }
};

namespace detail {

inline std::string strip(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

inline double config_double(const std::string& key, const std::string& value) {
    try {
        return textio::parse_double(value);
    } catch (const std::exception&) {
        throw ConfigError("key " + key + ": not a number: " + value);
    }
}

inline int config_int(const std::string& key, const std::string& value) {
    try {
        return textio::parse_int(value);
    } catch (const std::exception&) {
        throw ConfigError("key " + key + ": not an integer: " + value);
    }
}

inline std::uint64_t config_seed(const std::string& key, const std::string& value) {
    const int v = config_int(key, value);
    if (v < 0) throw ConfigError("key " + key + ": seed must be nonnegative");
    return static_cast<std::uint64_t>(v);
}

inline std::vector<double> config_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const std::string& cell : textio::split(value, ',')) out.push_back(config_double(key, strip(cell)));
    if (out.empty()) throw ConfigError("key " + key + ": empty list");
    return out;
}

inline std::vector<std::uint64_t> config_seed_list(const std::string& key,
                                                   const std::string& value) {
    std::vector<std::uint64_t> out;
    for (const std::string& cell : textio::split(value, ',')) out.push_back(config_seed(key, strip(cell)));
    return out;
}

inline void apply_env_key(env::EnvConfig& env, const std::string& key, const std::string& value,
                          const std::string& full_key) {
    if (key == "n_clouds") env.n_clouds = config_int(full_key, value);
    else if (key == "n_edges") env.n_edges = config_int(full_key, value);
    else if (key == "q_max") env.q_max = config_double(full_key, value);
    else if (key == "packet_amounts") env.packet_amounts = config_double_list(full_key, value);
    else if (key == "arrival_width") env.arrival_width = config_double(full_key, value);
    else if (key == "overflow_weight") env.overflow_weight = config_double(full_key, value);
    else if (key == "cloud_departure") env.cloud_departure = config_double(full_key, value);
    else if (key == "episode_length") env.episode_length = config_int(full_key, value);
    else if (key == "initial_fill") env.initial_fill = config_double(full_key, value);
    else throw ConfigError("unknown config key: " + full_key);
}

inline void apply_trainer_key(TrainerConfig& trainer, const std::string& key,
                              const std::string& value, const std::string& full_key) {
    if (key == "gamma") trainer.gamma = config_double(full_key, value);
    else if (key == "episodes_per_update") trainer.episodes_per_update = config_int(full_key, value);
    else if (key == "target_update_period") trainer.target_update_period = config_int(full_key, value);
    else if (key == "lr_actor") trainer.lr_actor = config_double(full_key, value);
    else if (key == "lr_critic") trainer.lr_critic = config_double(full_key, value);
    else if (key == "epochs") trainer.epochs = config_int(full_key, value);
    else if (key == "adam_beta1") trainer.adam_beta1 = config_double(full_key, value);
    else if (key == "adam_beta2") trainer.adam_beta2 = config_double(full_key, value);
    else if (key == "adam_epsilon") trainer.adam_epsilon = config_double(full_key, value);
    else if (key == "checkpoint_period") trainer.checkpoint_period = config_int(full_key, value);
    else throw ConfigError("unknown config key: " + full_key);
}

inline void apply_model_key(ModelConfig& model, const std::string& key, const std::string& value,
                            const std::string& full_key) {
    if (key == "logit_scale") model.logit_scale = config_double(full_key, value);
    else if (key == "value_scale") model.value_scale = config_double(full_key, value);
    else throw ConfigError("unknown config key: " + full_key);
}

inline void apply_run_key(RunConfig& run, const std::string& key, const std::string& value,
                          const std::string& full_key) {
    if (key == "framework") {
        try {
            run.framework = parse_framework(value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "seeds") run.seeds = config_seed_list(full_key, value);
    else if (key == "out_dir") run.out_dir = value;
    else if (key == "eval_episodes") run.eval_episodes = config_int(full_key, value);
    else if (key == "random_walk_episodes") run.random_walk_episodes = config_int(full_key, value);
    else if (key == "random_walk_seed") run.random_walk_seed = config_seed(full_key, value);
    else throw ConfigError("unknown config key: " + full_key);
}

}  // namespace detail

/// Parses the sectioned key-value format:
///   [env] / [trainer] / [model] / [run] headers, `key = value` lines,
///   blank lines and #/; comments ignored. Unknown sections or keys are
///   errors that name the offender.
inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig config;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string trimmed = detail::strip(line);
        if (trimmed.empty() || trimmed[0] == '#' || trimmed[0] == ';') continue;
        if (trimmed.front() == '[') {
            if (trimmed.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header: " + trimmed);
            section = trimmed.substr(1, trimmed.size() - 2);
            if (section != "env" && section != "trainer" && section != "model" && section != "run")
                throw ConfigError("unknown config section: [" + section + "]");
            continue;
        }
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value: " + trimmed);
        const std::string key = detail::strip(trimmed.substr(0, eq));
        const std::string value = detail::strip(trimmed.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (section.empty())
            throw ConfigError("key " + key + " appears before any [section] header");
        const std::string full_key = section + "." + key;
        if (section == "env") detail::apply_env_key(config.env, key, value, full_key);
        else if (section == "trainer") detail::apply_trainer_key(config.trainer, key, value, full_key);
        else if (section == "model") detail::apply_model_key(config.model, key, value, full_key);
        else detail::apply_run_key(config.run, key, value, full_key);
    }
    config.validate();
    return config;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

}  // namespace qmarl
