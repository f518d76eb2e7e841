#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "qmarl/adam.hpp"
#include "qmarl/baselines.hpp"
#include "qmarl/env.hpp"
#include "qmarl/metrics.hpp"
#include "qmarl/model.hpp"
#include "qmarl/rng.hpp"

namespace qmarl {

/// One environment step as stored for the update: per-agent observations,
/// the centralized state, the joint action, and the successor.
struct Transition {
    std::vector<std::vector<double>> observations;
    std::vector<double> state;
    std::vector<int> actions;  // flat action indices, one per agent
    double reward = 0.0;
    std::vector<std::vector<double>> next_observations;
    std::vector<double> next_state;
};

struct Episode {
    std::vector<Transition> steps;
    double total_reward = 0.0;
    double mean_edge_queue = 0.0;   // time average of the per-edge mean
    double mean_cloud_queue = 0.0;  // time average of the per-cloud mean
    int empty_events = 0;
    int overflow_events = 0;
};

struct TrainerConfig {
    double gamma = 0.99;
    int episodes_per_update = 8;
    int target_update_period = 10;  // updates between target-critic syncs
    double lr_actor = 1e-4;
    double lr_critic = 1e-5;
    int epochs = 1000;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    int checkpoint_period = 0;  // epochs between checkpoints; 0 disables
    std::uint64_t seed = 1;

    void validate() const {
        if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma must lie in [0, 1)");
        if (episodes_per_update < 1) throw std::invalid_argument("need at least one episode per update");
        if (target_update_period < 1) throw std::invalid_argument("target update period must be positive");
        if (lr_actor <= 0.0 || lr_critic <= 0.0) throw std::invalid_argument("learning rates must be positive");
        if (epochs < 1) throw std::invalid_argument("need at least one epoch");
        if (checkpoint_period < 0) throw std::invalid_argument("checkpoint period must be nonnegative");
    }
};

/// TD target with a frozen bootstrap critic:
/// y = r + gamma * V_target(s') - V(s). The horizon is a truncation, so the
/// bootstrap term is kept at the final step too.
inline double td_target(const Transition& t, const Critic& critic, const Critic& target_critic,
                        double gamma) {
    return t.reward + gamma * target_critic.value(t.next_state) - critic.value(t.state);
}

/// y_t for every step of every episode, episode-major.
inline std::vector<double> td_targets(std::span<const Episode> episodes, const Critic& critic,
                                      const Critic& target_critic, double gamma) {
    std::vector<double> targets;
    for (const Episode& episode : episodes)
        for (const Transition& t : episode.steps)
            targets.push_back(td_target(t, critic, target_critic, gamma));
    return targets;
}

/// Rolls one episode. Actions are drawn from the softmax policies (or taken
/// greedily) with one shared stream, agent 0 first at every step.
inline Episode collect_episode(env::OffloadEnv& env,
                               const std::vector<std::unique_ptr<Actor>>& actors,
                               std::uint64_t env_seed, std::uint64_t action_seed, bool greedy) {
    const env::EnvConfig& config = env.config();
    if (static_cast<int>(actors.size()) != config.n_edges)
        throw std::invalid_argument("need one actor per edge agent");
    const int n_amounts = static_cast<int>(config.packet_amounts.size());

    RandomStream action_stream(action_seed);
    Episode episode;
    episode.steps.reserve(static_cast<std::size_t>(config.episode_length));

    std::vector<std::vector<double>> obs = env.reset(env_seed);
    std::vector<double> state = env.global_state();
    for (int t = 0; t < config.episode_length; ++t) {
        Transition tr;
        tr.observations = obs;
        tr.state = state;
        tr.actions.reserve(actors.size());
        std::vector<env::AgentAction> joint;
        joint.reserve(actors.size());
        for (std::size_t n = 0; n < actors.size(); ++n) {
            const std::vector<double> probs = actors[n]->policy(obs[n]);
            const int action = greedy ? argmax(probs)
                                      : action_stream.sample_categorical(probs);
            tr.actions.push_back(action);
            joint.push_back(env::decode_action(action, n_amounts));
        }

        env::StepResult result = env.step(joint);
        tr.reward = result.reward;
        tr.next_observations = result.observations;
        tr.next_state = env.global_state();

        episode.total_reward += result.reward;
        episode.empty_events += result.cloud_empty_events;
        episode.overflow_events += result.cloud_overflow_events;
        double edge_sum = 0.0;
        for (double q : env.state().edge_queues) edge_sum += q;
        double cloud_sum = 0.0;
        for (double q : env.state().cloud_queues) cloud_sum += q;
        episode.mean_edge_queue += edge_sum / config.n_edges;
        episode.mean_cloud_queue += cloud_sum / config.n_clouds;

        obs = std::move(result.observations);
        state = tr.next_state;
        episode.steps.push_back(std::move(tr));
    }
    episode.mean_edge_queue /= config.episode_length;
    episode.mean_cloud_queue /= config.episode_length;
    return episode;
}

/// A batch gradient plus the scalar loss it descends.
struct BatchGradient {
    std::vector<double> grad;
    double loss = 0.0;
};

/// Policy-gradient estimate for one agent with the advantage weights `y`
/// frozen: loss = -(1/B) sum_t y_t log pi(u_t|o_t), gradient to match. B is
/// the number of episodes.
inline BatchGradient actor_batch_gradient(const Actor& actor, std::span<const Episode> episodes,
                                          std::span<const double> y, int agent) {
    if (episodes.empty()) throw std::invalid_argument("empty batch");
    BatchGradient out;
    out.grad.assign(static_cast<std::size_t>(actor.n_params()), 0.0);
    std::size_t step = 0;
    for (const Episode& episode : episodes) {
        for (const Transition& t : episode.steps) {
            if (step >= y.size()) throw std::invalid_argument("advantage vector is too short");
            const double weight = y[step++];
            const ScoreGrad score =
                actor.grad_log_prob(t.observations[static_cast<std::size_t>(agent)],
                                    t.actions[static_cast<std::size_t>(agent)]);
            for (std::size_t i = 0; i < out.grad.size(); ++i)
                out.grad[i] -= weight * score.grad[i];
            out.loss -= weight * score.log_prob;
        }
    }
    if (step != y.size()) throw std::invalid_argument("advantage vector is too long");
    const double scale = 1.0 / static_cast<double>(episodes.size());
    for (double& g : out.grad) g *= scale;
    out.loss *= scale;
    return out;
}

/// Squared-TD critic estimate: loss = (1/B) sum_t y_t^2 with the bootstrap
/// critic frozen; the gradient flows only through -V(s_t), giving
/// (1/B) sum_t 2 y_t * (-grad V(s_t)).
inline BatchGradient critic_batch_gradient(const Critic& critic, const Critic& target_critic,
                                           std::span<const Episode> episodes, double gamma) {
    if (episodes.empty()) throw std::invalid_argument("empty batch");
    BatchGradient out;
    out.grad.assign(static_cast<std::size_t>(critic.n_params()), 0.0);
    for (const Episode& episode : episodes) {
        for (const Transition& t : episode.steps) {
            const double y = td_target(t, critic, target_critic, gamma);
            const std::vector<double> value_grad = critic.value_grad(t.state);
            for (std::size_t i = 0; i < out.grad.size(); ++i)
                out.grad[i] -= 2.0 * y * value_grad[i];
            out.loss += y * y;
        }
    }
    const double scale = 1.0 / static_cast<double>(episodes.size());
    for (double& g : out.grad) g *= scale;
    out.loss *= scale;
    return out;
}

/// Same scalar the critic gradient descends, for finite-difference checks.
inline double critic_batch_loss(const Critic& critic, const Critic& target_critic,
                                std::span<const Episode> episodes, double gamma) {
    if (episodes.empty()) throw std::invalid_argument("empty batch");
    double loss = 0.0;
    for (const Episode& episode : episodes)
        for (const Transition& t : episode.steps) {
            const double y = td_target(t, critic, target_critic, gamma);
            loss += y * y;
        }
    return loss / static_cast<double>(episodes.size());
}

/// Same scalar the actor gradient descends (frozen y), for FD checks.
inline double actor_batch_loss(const Actor& actor, std::span<const Episode> episodes,
                               std::span<const double> y, int agent) {
    if (episodes.empty()) throw std::invalid_argument("empty batch");
    double loss = 0.0;
    std::size_t step = 0;
    for (const Episode& episode : episodes)
        for (const Transition& t : episode.steps) {
            const std::vector<double> probs =
                actor.policy(t.observations[static_cast<std::size_t>(agent)]);
            loss -= y[step++] *
                    std::log(probs[static_cast<std::size_t>(
                        t.actions[static_cast<std::size_t>(agent)])]);
        }
    return loss / static_cast<double>(episodes.size());
}

/// Greedy (or sampled) policy rollout statistics over fresh episodes.
struct EvalStats {
    double mean_return = 0.0;
    double mean_edge_queue = 0.0;
    double mean_cloud_queue = 0.0;
    double empty_event_ratio = 0.0;
    double overflow_event_ratio = 0.0;
};

inline EvalStats summarize_episodes(std::span<const Episode> episodes,
                                    const env::EnvConfig& config) {
    if (episodes.empty()) throw std::invalid_argument("no episodes to summarize");
    EvalStats stats;
    const double cloud_steps = static_cast<double>(config.episode_length) * config.n_clouds;
    for (const Episode& e : episodes) {
        stats.mean_return += e.total_reward;
        stats.mean_edge_queue += e.mean_edge_queue;
        stats.mean_cloud_queue += e.mean_cloud_queue;
        stats.empty_event_ratio += e.empty_events / cloud_steps;
        stats.overflow_event_ratio += e.overflow_events / cloud_steps;
    }
    const double n = static_cast<double>(episodes.size());
    stats.mean_return /= n;
    stats.mean_edge_queue /= n;
    stats.mean_cloud_queue /= n;
    stats.empty_event_ratio /= n;
    stats.overflow_event_ratio /= n;
    return stats;
}

inline EvalStats evaluate_policy(const env::EnvConfig& config,
                                 const std::vector<std::unique_ptr<Actor>>& actors, int episodes,
                                 std::uint64_t seed, bool greedy) {
    if (episodes < 1) throw std::invalid_argument("need at least one evaluation episode");
    env::OffloadEnv env(config);
    std::vector<Episode> rolled;
    rolled.reserve(static_cast<std::size_t>(episodes));
    for (int e = 0; e < episodes; ++e)
        rolled.push_back(collect_episode(env, actors,
                                         mix_seed(seed, 2 * static_cast<std::uint64_t>(e)),
                                         mix_seed(seed, 2 * static_cast<std::uint64_t>(e) + 1),
                                         greedy));
    return summarize_episodes(rolled, config);
}

/// Centralized-training loop: collect a batch under the current policies,
/// compute TD targets against the target critic, take one Adam step per
/// actor and one for the critic, periodically sync the target.
class Trainer {
  public:
    Trainer(env::EnvConfig env_config, ModelSet models, TrainerConfig config)
        : env_(env_config),
          models_(std::move(models)),
          config_(config),
          critic_adam_(models_.critic->params().size()) {
        config_.validate();
        if (models_.actors.empty() || !models_.critic)
            throw std::invalid_argument("trainer needs actors and a critic");
        if (static_cast<int>(models_.actors.size()) != env_config.n_edges)
            throw std::invalid_argument("need one actor per edge agent");
        target_critic_ = models_.critic->clone();
        actor_adam_.reserve(models_.actors.size());
        for (const std::unique_ptr<Actor>& actor : models_.actors)
            actor_adam_.emplace_back(actor->params().size());
    }

    const ModelSet& models() const { return models_; }
    ModelSet& models() { return models_; }
    const Critic& target_critic() const { return *target_critic_; }
    Critic& target_critic() { return *target_critic_; }
    const TrainerConfig& config() const { return config_; }
    const env::EnvConfig& env_config() const { return env_.config(); }

    int epoch() const { return epoch_; }
    long update_count() const { return update_count_; }
    std::uint64_t episode_count() const { return episode_count_; }
    std::vector<AdamState>& actor_adam() { return actor_adam_; }
    const std::vector<AdamState>& actor_adam() const { return actor_adam_; }
    AdamState& critic_adam() { return critic_adam_; }
    const AdamState& critic_adam() const { return critic_adam_; }

    /// Restores loop position after loading a checkpoint.
    void set_progress(int epoch, long update_count, std::uint64_t episode_count) {
        epoch_ = epoch;
        update_count_ = update_count;
        episode_count_ = episode_count;
    }

    /// Collects one on-policy batch; episode seeds continue the master
    /// stream so restarts reproduce the original trajectory of draws.
    std::vector<Episode> collect_batch() {
        std::vector<Episode> batch;
        batch.reserve(static_cast<std::size_t>(config_.episodes_per_update));
        for (int b = 0; b < config_.episodes_per_update; ++b) {
            const std::uint64_t index = episode_count_++;
            batch.push_back(collect_episode(env_, models_.actors,
                                            mix_seed(config_.seed, 2 * index),
                                            mix_seed(config_.seed, 2 * index + 1),
                                            /*greedy=*/false));
        }
        return batch;
    }

    /// One gradient update from a batch. All gradients are computed against
    /// the pre-update parameters, then applied.
    void update(std::span<const Episode> batch, double& actor_loss, double& critic_loss) {
        if (batch.empty()) throw std::invalid_argument("empty batch");
        const std::vector<double> y =
            td_targets(batch, *models_.critic, *target_critic_, config_.gamma);

        const AdamConfig actor_opt{config_.lr_actor, config_.adam_beta1, config_.adam_beta2,
                                   config_.adam_epsilon};
        const AdamConfig critic_opt{config_.lr_critic, config_.adam_beta1, config_.adam_beta2,
                                    config_.adam_epsilon};

        std::vector<BatchGradient> actor_grads;
        actor_grads.reserve(models_.actors.size());
        actor_loss = 0.0;
        for (std::size_t n = 0; n < models_.actors.size(); ++n) {
            actor_grads.push_back(
                actor_batch_gradient(*models_.actors[n], batch, y, static_cast<int>(n)));
            actor_loss += actor_grads.back().loss;
        }
        const BatchGradient critic_grad =
            critic_batch_gradient(*models_.critic, *target_critic_, batch, config_.gamma);
        critic_loss = critic_grad.loss;

        for (std::size_t n = 0; n < models_.actors.size(); ++n) {
            std::vector<double> params(models_.actors[n]->params().begin(),
                                       models_.actors[n]->params().end());
            adam_step(params, actor_grads[n].grad, actor_adam_[n], actor_opt);
            models_.actors[n]->set_params(params);
        }
        std::vector<double> critic_params(models_.critic->params().begin(),
                                          models_.critic->params().end());
        adam_step(critic_params, critic_grad.grad, critic_adam_, critic_opt);
        models_.critic->set_params(critic_params);

        ++update_count_;
        if (update_count_ % config_.target_update_period == 0) sync_target();
    }

    void sync_target() { target_critic_->set_params(models_.critic->params()); }

    /// Collect + update + summarize; one row of the training log.
    MetricsRecord run_epoch() {
        const std::vector<Episode> batch = collect_batch();
        MetricsRecord record;
        record.epoch = epoch_;
        const EvalStats stats = summarize_episodes(batch, env_.config());
        record.mean_return = stats.mean_return;
        record.mean_edge_queue = stats.mean_edge_queue;
        record.mean_cloud_queue = stats.mean_cloud_queue;
        record.empty_event_ratio = stats.empty_event_ratio;
        record.overflow_event_ratio = stats.overflow_event_ratio;
        update(batch, record.actor_loss, record.critic_loss);
        ++epoch_;
        return record;
    }

  private:
    env::OffloadEnv env_;
    ModelSet models_;
    TrainerConfig config_;
    std::unique_ptr<Critic> target_critic_;
    std::vector<AdamState> actor_adam_;
    AdamState critic_adam_;
    int epoch_ = 0;
    long update_count_ = 0;
    std::uint64_t episode_count_ = 0;
};

}  // namespace qmarl
