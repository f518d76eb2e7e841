#pragma once

#include <istream>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>

#include "qmarl/baselines.hpp"
#include "qmarl/mlp.hpp"
#include "qmarl/textio.hpp"
#include "qmarl/trainer.hpp"
#include "qmarl/vqc.hpp"

namespace qmarl {

inline constexpr const char* kCheckpointMagic = "qmarl-checkpoint";
inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kModelsMagic = "qmarl-models";

/// Reads one serialized actor, dispatching on its layout tag.
inline std::unique_ptr<Actor> read_actor(std::istream& in) {
    textio::expect_token(in, "layout");
    const std::string tag = textio::read_token(in, "actor layout");
    if (tag == vqc::VqcActor::kLayoutName) return vqc::VqcActor::read(in);
    if (tag == mlp::MlpActor::kLayoutName) return mlp::MlpActor::read(in);
    throw std::runtime_error("unknown actor layout: " + tag);
}

inline std::unique_ptr<Critic> read_critic(std::istream& in) {
    textio::expect_token(in, "layout");
    const std::string tag = textio::read_token(in, "critic layout");
    if (tag == vqc::VqcCritic::kLayoutName) return vqc::VqcCritic::read(in);
    if (tag == mlp::MlpCritic::kLayoutName) return mlp::MlpCritic::read(in);
    throw std::runtime_error("unknown critic layout: " + tag);
}

/// Standalone model file: everything needed to run the trained policies.
inline void write_models(std::ostream& out, const ModelSet& models) {
    out << kModelsMagic << ' ' << kCheckpointVersion << '\n'
        << "n_actors " << models.actors.size() << '\n';
    for (const std::unique_ptr<Actor>& actor : models.actors) actor->write(out);
    models.critic->write(out);
}

inline ModelSet read_models(std::istream& in) {
    textio::expect_token(in, kModelsMagic);
    const long version = textio::parse_int(textio::read_token(in, "models version"));
    if (version != kCheckpointVersion)
        throw std::runtime_error("unsupported models version: " + std::to_string(version));
    const long n_actors = textio::read_int_field(in, "n_actors");
    if (n_actors < 1) throw std::runtime_error("model file lists no actors");
    ModelSet models;
    for (long i = 0; i < n_actors; ++i) models.actors.push_back(read_actor(in));
    models.critic = read_critic(in);
    return models;
}

namespace detail {

inline void write_adam(std::ostream& out, const AdamState& state) {
    out << "adam_step " << state.step << '\n' << "adam_m ";
    textio::write_doubles(out, state.m);
    out << '\n' << "adam_v ";
    textio::write_doubles(out, state.v);
    out << '\n';
}

inline AdamState read_adam(std::istream& in, std::size_t n) {
    AdamState state(n);
    state.step = textio::read_int_field(in, "adam_step");
    textio::expect_token(in, "adam_m");
    state.m = textio::read_doubles(in, n, "adam m");
    textio::expect_token(in, "adam_v");
    state.v = textio::read_doubles(in, n, "adam v");
    return state;
}

inline void check_layout_match(const char* what, const std::string& loaded,
                               const std::string& expected, std::size_t loaded_params,
                               std::size_t expected_params) {
    if (loaded != expected)
        throw std::runtime_error(std::string("checkpoint ") + what + " layout " + loaded +
                                 " does not match configured " + expected);
    if (loaded_params != expected_params)
        throw std::runtime_error(std::string("checkpoint ") + what + " has " +
                                 std::to_string(loaded_params) + " parameters, configured model has " +
                                 std::to_string(expected_params));
}

}  // namespace detail

/// Full trainer snapshot: models, optimizer moments, target critic, and the
/// episode/update counters that drive the derived RNG streams.
inline void save_checkpoint(std::ostream& out, const Trainer& trainer, Framework framework) {
    out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n'
        << "framework " << framework_name(framework) << '\n'
        << "epoch " << trainer.epoch() << '\n'
        << "update_count " << trainer.update_count() << '\n'
        << "episode_count " << trainer.episode_count() << '\n';
    const ModelSet& models = trainer.models();
    out << "n_actors " << models.actors.size() << '\n';
    for (std::size_t n = 0; n < models.actors.size(); ++n) {
        models.actors[n]->write(out);
        detail::write_adam(out, trainer.actor_adam()[n]);
    }
    models.critic->write(out);
    detail::write_adam(out, trainer.critic_adam());
    out << "target_critic\n";
    trainer.target_critic().write(out);
}

/// Restores a snapshot into a trainer built from the same configuration.
/// Layout tags and parameter counts must match the configured models.
inline void load_checkpoint(std::istream& in, Trainer& trainer, Framework framework) {
    textio::expect_token(in, kCheckpointMagic);
    const long version = textio::parse_int(textio::read_token(in, "checkpoint version"));
    if (version != kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version: " + std::to_string(version));
    textio::expect_token(in, "framework");
    const std::string fw = textio::read_token(in, "framework name");
    if (fw != framework_name(framework))
        throw std::runtime_error("checkpoint is for framework " + fw + ", expected " +
                                 framework_name(framework));
    const int epoch = static_cast<int>(textio::read_int_field(in, "epoch"));
    const long update_count = textio::read_int_field(in, "update_count");
    const long episode_count = textio::read_int_field(in, "episode_count");
    if (epoch < 0 || update_count < 0 || episode_count < 0)
        throw std::runtime_error("checkpoint counters must be nonnegative");

    ModelSet& models = trainer.models();
    const long n_actors = textio::read_int_field(in, "n_actors");
    if (n_actors != static_cast<long>(models.actors.size()))
        throw std::runtime_error("checkpoint has " + std::to_string(n_actors) +
                                 " actors, trainer has " + std::to_string(models.actors.size()));
    for (std::size_t n = 0; n < models.actors.size(); ++n) {
        const std::unique_ptr<Actor> loaded = read_actor(in);
        detail::check_layout_match("actor", loaded->layout_name(),
                                   models.actors[n]->layout_name(),
                                   loaded->params().size(), models.actors[n]->params().size());
        models.actors[n]->set_params(loaded->params());
        trainer.actor_adam()[n] = detail::read_adam(in, loaded->params().size());
    }
    const std::unique_ptr<Critic> loaded_critic = read_critic(in);
    detail::check_layout_match("critic", loaded_critic->layout_name(),
                               models.critic->layout_name(), loaded_critic->params().size(),
                               models.critic->params().size());
    models.critic->set_params(loaded_critic->params());
    trainer.critic_adam() = detail::read_adam(in, loaded_critic->params().size());

    textio::expect_token(in, "target_critic");
    const std::unique_ptr<Critic> loaded_target = read_critic(in);
    detail::check_layout_match("target critic", loaded_target->layout_name(),
                               models.critic->layout_name(), loaded_target->params().size(),
                               models.critic->params().size());
    trainer.target_critic().set_params(loaded_target->params());

    trainer.set_progress(epoch, update_count, static_cast<std::uint64_t>(episode_count));
}

}  // namespace qmarl
