#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmarl/mlp.hpp"
#include "qmarl/model.hpp"
#include "qmarl/rng.hpp"
#include "qmarl/vqc.hpp"

namespace qmarl {

/// The four trainable frameworks plus the untrained uniform-random policy.
enum class Framework { Proposed, Comp1, Comp2, Comp3, Random };

inline const char* framework_name(Framework f) {
    switch (f) {
        case Framework::Proposed: return "proposed";
        case Framework::Comp1: return "comp1";
        case Framework::Comp2: return "comp2";
        case Framework::Comp3: return "comp3";
        case Framework::Random: return "random";
    }
    throw std::logic_error("unreachable");
}

inline Framework parse_framework(const std::string& name) {
    for (Framework f : {Framework::Proposed, Framework::Comp1, Framework::Comp2,
                        Framework::Comp3, Framework::Random})
        if (name == framework_name(f)) return f;
    throw std::invalid_argument("unknown framework: " + name +
                                " (expected proposed, comp1, comp2, comp3, or random)");
}

inline constexpr Framework kTrainableFrameworks[] = {Framework::Proposed, Framework::Comp1,
                                                     Framework::Comp2, Framework::Comp3};

struct ModelConfig {
    double logit_scale = 1.0;  // actor: softmax(logit_scale * features)
    double value_scale = 10.0; // critic: value_scale * sum of features
};

/// Decentralized actors plus the centralized critic for one framework.
struct ModelSet {
    std::vector<std::unique_ptr<Actor>> actors;
    std::unique_ptr<Critic> critic;

    std::size_t actor_params() const { return actors.empty() ? 0 : actors.front()->n_params(); }
    std::size_t critic_params() const { return critic ? critic->n_params() : 0; }
};

namespace detail {

/// Every compact model must land on exactly the quantum circuit's budget so
/// the comparison is parameter-fair; catch drift at construction time.
inline constexpr std::size_t kCompactParams = 50;

inline void check_params(const char* what, std::size_t got, std::size_t want) {
    if (got != want)
        throw std::logic_error(std::string(what) + " has " + std::to_string(got) +
                               " parameters, expected " + std::to_string(want));
}

/// Dense policy head matched to the 50-parameter budget:
/// 4 -> 5 (tanh) -> 4 logits plus one shared output scale = 50.
inline mlp::MlpSpec compact_actor_spec(int observation_size, int n_actions) {
    mlp::MlpSpec spec;
    spec.layer_sizes = {observation_size, 5, n_actions};
    spec.head = mlp::Head::Softmax;
    spec.output_scale = true;
    return spec;
}

/// Dense value head matched to the 50-parameter budget:
/// 16 -> 2 (tanh) -> 1 plus direct skip weights on the first 13 inputs = 50.
inline mlp::MlpSpec compact_critic_spec(int state_size) {
    mlp::MlpSpec spec;
    spec.layer_sizes = {state_size, 2, 1};
    spec.head = mlp::Head::Linear;
    spec.skip_inputs = 13;
    return spec;
}

/// Unconstrained dense policy head (two 128-wide hidden layers).
inline mlp::MlpSpec wide_actor_spec(int observation_size, int n_actions) {
    mlp::MlpSpec spec;
    spec.layer_sizes = {observation_size, 128, 128, n_actions};
    spec.head = mlp::Head::Softmax;
    return spec;
}

inline mlp::MlpSpec wide_critic_spec(int state_size) {
    mlp::MlpSpec spec;
    spec.layer_sizes = {state_size, 128, 128, 1};
    spec.head = mlp::Head::Linear;
    return spec;
}

inline std::vector<double> vqc_init(std::size_t n, RandomStream& rng) {
    std::vector<double> params(n);
    for (double& p : params) p = rng.uniform(-vqc::kPi, vqc::kPi);
    return params;
}

}  // namespace detail

/// Builds the actor/critic set for one framework. Parameters are drawn from
/// `rng` actor by actor (agent 0 first) and then for the critic, so a fixed
/// seed pins the full initialization.
inline ModelSet make_models(Framework framework, int n_agents, int observation_size,
                            int state_size, int n_actions, const ModelConfig& model_config,
                            RandomStream& rng) {
    if (framework == Framework::Random)
        throw std::invalid_argument("the random policy has no models to build");
    if (n_agents < 1) throw std::invalid_argument("need at least one agent");

    ModelSet set;
    set.actors.reserve(static_cast<std::size_t>(n_agents));

    const bool vqc_actors = framework == Framework::Proposed || framework == Framework::Comp1;
    for (int agent = 0; agent < n_agents; ++agent) {
        std::unique_ptr<Actor> actor;
        if (vqc_actors) {
            auto vqc = std::make_unique<vqc::VqcActor>(n_actions, vqc::AnsatzLayout{}.n_param_gates,
                                                  model_config.logit_scale);
            if (vqc->observation_size() != observation_size)
                throw std::invalid_argument("quantum actor expects " +
                                            std::to_string(vqc->observation_size()) +
                                            " observation features, environment provides " +
                                            std::to_string(observation_size));
            vqc->set_params(detail::vqc_init(vqc->n_params(), rng));
            actor = std::move(vqc);
        } else {
            const mlp::MlpSpec spec = framework == Framework::Comp2
                                     ? detail::compact_actor_spec(observation_size, n_actions)
                                     : detail::wide_actor_spec(observation_size, n_actions);
            actor = std::make_unique<mlp::MlpActor>(spec, mlp::init_params(spec, rng));
        }
        if (framework != Framework::Comp3)
            detail::check_params("actor", actor->n_params(), detail::kCompactParams);
        set.actors.push_back(std::move(actor));
    }

    if (framework == Framework::Proposed) {
        // The state encoder packs a fixed number of features into each qubit,
        // so the qubit count follows from the state dimension.
        const int per_qubit = vqc::state_encoder(1).features_per_qubit();
        if (state_size % per_qubit != 0)
            throw std::invalid_argument("state size " + std::to_string(state_size) +
                                        " is not a multiple of " + std::to_string(per_qubit) +
                                        " features per qubit");
        auto vqc = std::make_unique<vqc::VqcCritic>(state_size / per_qubit,
                                               vqc::AnsatzLayout{}.n_param_gates,
                                               model_config.value_scale);
        vqc->set_params(detail::vqc_init(vqc->n_params(), rng));
        set.critic = std::move(vqc);
    } else {
        const mlp::MlpSpec spec = framework == Framework::Comp3
                                 ? detail::wide_critic_spec(state_size)
                                 : detail::compact_critic_spec(state_size);
        set.critic = std::make_unique<mlp::MlpCritic>(spec, mlp::init_params(spec, rng));
    }
    if (framework != Framework::Comp3)
        detail::check_params("critic", set.critic->n_params(), detail::kCompactParams);
    return set;
}

}  // namespace qmarl
