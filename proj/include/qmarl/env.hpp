#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qmarl/rng.hpp"

namespace qmarl::env {

/// Single-hop offloading scenario: n_edges edge agents push packets into
/// n_clouds cloud queues. Quantities are packet units normalized so that
/// q_max is the capacity of every queue.
struct EnvConfig {
    int n_clouds = 2;
    int n_edges = 4;
    double q_max = 1.0;
    std::vector<double> packet_amounts = {0.1, 0.2};
    double arrival_width = 0.3;    // w_P: edge arrivals ~ U(0, w_P * q_max)
    double overflow_weight = 4.0;  // w_R: weight on the overflow penalty
    double cloud_departure = 0.3;  // packets leaving each cloud per step
    int episode_length = 100;
    double initial_fill = 0.5;  // fraction of q_max at reset
    std::uint64_t seed = 1;

    int n_actions() const { return n_clouds * static_cast<int>(packet_amounts.size()); }
    int observation_size() const { return 2 + n_clouds; }
    int state_size() const { return n_edges * observation_size(); }

    void validate() const {
        if (n_clouds < 1 || n_edges < 1) throw std::invalid_argument("need at least one cloud and edge");
        if (q_max <= 0.0) throw std::invalid_argument("q_max must be positive");
        if (packet_amounts.empty()) throw std::invalid_argument("packet amount space is empty");
        for (double p : packet_amounts)
            if (p <= 0.0 || p > q_max) throw std::invalid_argument("packet amounts must lie in (0, q_max]");
        if (arrival_width < 0.0 || overflow_weight < 0.0 || cloud_departure < 0.0)
            throw std::invalid_argument("environment weights must be nonnegative");
        if (episode_length < 1) throw std::invalid_argument("episode length must be positive");
        if (initial_fill < 0.0 || initial_fill > 1.0)
            throw std::invalid_argument("initial fill must lie in [0, 1]");
    }
};

/// One agent's action: a destination cloud and a packet amount index.
struct AgentAction {
    int destination = 0;   // cloud index, 0-based
    int amount_index = 0;  // into EnvConfig::packet_amounts
};

/// Flat action index <-> (destination, amount): index = destination *
/// n_amounts + amount_index.
inline int encode_action(const AgentAction& action, int n_amounts) {
    return action.destination * n_amounts + action.amount_index;
}

inline AgentAction decode_action(int index, int n_amounts) {
    return AgentAction{index / n_amounts, index % n_amounts};
}

struct EnvState {
    std::vector<double> edge_queues;
    std::vector<double> edge_queues_prev;
    std::vector<double> cloud_queues;
    int step_index = 0;
};

struct StepResult {
    std::vector<std::vector<double>> observations;
    double reward = 0.0;
    int cloud_empty_events = 0;
    int cloud_overflow_events = 0;
};

inline double clip(double x, double lo, double hi) { return std::min(hi, std::max(x, lo)); }

class OffloadEnv {
  public:
    explicit OffloadEnv(EnvConfig config) : config_(std::move(config)), arrivals_(config_.seed) {
        config_.validate();
        reset();
    }

    const EnvConfig& config() const { return config_; }
    const EnvState& state() const { return state_; }
    int n_actions() const { return config_.n_actions(); }

    /// Restarts the episode and reseeds the arrival stream.
    std::vector<std::vector<double>> reset() { return reset(config_.seed); }

    std::vector<std::vector<double>> reset(std::uint64_t seed) {
        arrivals_ = RandomStream(seed);
        const double fill = config_.initial_fill * config_.q_max;
        state_.edge_queues.assign(static_cast<std::size_t>(config_.n_edges), fill);
        state_.edge_queues_prev = state_.edge_queues;
        state_.cloud_queues.assign(static_cast<std::size_t>(config_.n_clouds), fill);
        state_.step_index = 0;
        return observations();
    }

    /// Per-agent observation: own queue now, own queue at the previous
    /// step, then every cloud queue.
    std::vector<std::vector<double>> observations() const {
        std::vector<std::vector<double>> obs(static_cast<std::size_t>(config_.n_edges));
        for (int n = 0; n < config_.n_edges; ++n) {
            std::vector<double>& o = obs[static_cast<std::size_t>(n)];
            o.reserve(static_cast<std::size_t>(config_.observation_size()));
            o.push_back(state_.edge_queues[static_cast<std::size_t>(n)]);
            o.push_back(state_.edge_queues_prev[static_cast<std::size_t>(n)]);
            for (double q : state_.cloud_queues) o.push_back(q);
        }
        return obs;
    }

    /// Concatenation of all agents' observations.
    std::vector<double> global_state() const {
        std::vector<double> s;
        s.reserve(static_cast<std::size_t>(config_.state_size()));
        for (const std::vector<double>& o : observations()) s.insert(s.end(), o.begin(), o.end());
        return s;
    }

    StepResult step(const std::vector<AgentAction>& actions) {
        if (static_cast<int>(actions.size()) != config_.n_edges)
            throw std::invalid_argument("need one action per edge agent");

        const int n_amounts = static_cast<int>(config_.packet_amounts.size());
        std::vector<double> cloud_in(static_cast<std::size_t>(config_.n_clouds), 0.0);
        std::vector<double> sent(static_cast<std::size_t>(config_.n_edges), 0.0);
        for (int n = 0; n < config_.n_edges; ++n) {
            const AgentAction& a = actions[static_cast<std::size_t>(n)];
            if (a.destination < 0 || a.destination >= config_.n_clouds ||
                a.amount_index < 0 || a.amount_index >= n_amounts)
                throw std::invalid_argument("malformed action");
            // An agent cannot send packets it does not hold.
            const double amount = std::min(config_.packet_amounts[static_cast<std::size_t>(a.amount_index)],
                                           state_.edge_queues[static_cast<std::size_t>(n)]);
            sent[static_cast<std::size_t>(n)] = amount;
            cloud_in[static_cast<std::size_t>(a.destination)] += amount;
        }

        // Edge arrivals, one draw per agent in agent order.
        std::vector<double> edge_in(static_cast<std::size_t>(config_.n_edges));
        for (int n = 0; n < config_.n_edges; ++n)
            edge_in[static_cast<std::size_t>(n)] =
                arrivals_.uniform(0.0, config_.arrival_width * config_.q_max);

        state_.edge_queues_prev = state_.edge_queues;
        for (int n = 0; n < config_.n_edges; ++n) {
            const std::size_t i = static_cast<std::size_t>(n);
            state_.edge_queues[i] =
                clip(state_.edge_queues[i] - sent[i] + edge_in[i], 0.0, config_.q_max);
        }

        StepResult result;
        double penalty = 0.0;
        for (int k = 0; k < config_.n_clouds; ++k) {
            const std::size_t i = static_cast<std::size_t>(k);
            const double pre = state_.cloud_queues[i] - config_.cloud_departure + cloud_in[i];
            const double pre_magnitude = std::abs(pre);  // q~ in the reward
            const double post = clip(pre, 0.0, config_.q_max);
            if (post == 0.0) {
                penalty += pre_magnitude;
                ++result.cloud_empty_events;
            }
            if (post == config_.q_max) {
                penalty += std::abs(config_.q_max - pre_magnitude) * config_.overflow_weight;
                ++result.cloud_overflow_events;
            }
            state_.cloud_queues[i] = post;
        }

        ++state_.step_index;
        result.reward = -penalty;
        result.observations = observations();
        return result;
    }

  private:
    EnvConfig config_;
    EnvState state_;
    RandomStream arrivals_;
};

/// Uniform-random joint actions for one episode; returns the undiscounted
/// reward sum.
inline double random_episode_return(const EnvConfig& config, std::uint64_t env_seed,
                                    std::uint64_t action_seed) {
    OffloadEnv env(config);
    env.reset(env_seed);
    RandomStream actions(action_seed);
    const int n_amounts = static_cast<int>(config.packet_amounts.size());
    double total = 0.0;
    std::vector<AgentAction> joint(static_cast<std::size_t>(config.n_edges));
    for (int t = 0; t < config.episode_length; ++t) {
        for (AgentAction& a : joint)
            a = decode_action(actions.uniform_int(config.n_actions()), n_amounts);
        total += env.step(joint).reward;
    }
    return total;
}

/// Mean undiscounted episode return of the uniform-random policy.
inline double random_walk_rollout(const EnvConfig& config, int episodes, std::uint64_t seed) {
    if (episodes < 1) throw std::invalid_argument("need at least one episode");
    double sum = 0.0;
    for (int e = 0; e < episodes; ++e)
        sum += random_episode_return(config, mix_seed(seed, 2 * static_cast<std::uint64_t>(e)),
                                     mix_seed(seed, 2 * static_cast<std::uint64_t>(e) + 1));
    return sum / episodes;
}

}  // namespace qmarl::env
