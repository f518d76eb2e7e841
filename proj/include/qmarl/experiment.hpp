#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qmarl/baselines.hpp"
#include "qmarl/checkpoint.hpp"
#include "qmarl/config.hpp"
#include "qmarl/env.hpp"
#include "qmarl/metrics.hpp"
#include "qmarl/rng.hpp"
#include "qmarl/trainer.hpp"

namespace qmarl {

/// Derived-stream indices far above any training episode index, so the
/// model-init and evaluation draws never collide with rollout draws.
inline constexpr std::uint64_t kInitStreamIndex = 1000000007;
inline constexpr std::uint64_t kEvalStreamIndex = 1000000009;

/// Trailing epochs that define the "trained" statistics of a run.
inline constexpr int kFinalWindowEpochs = 100;

inline std::string run_dir_name(Framework framework, std::uint64_t seed) {
    return std::string(framework_name(framework)) + "_seed" + std::to_string(seed);
}

inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kModelsFile = "models.txt";
inline constexpr const char* kSummaryFile = "summary.txt";
inline constexpr const char* kCheckpointFile = "checkpoint.txt";
inline constexpr const char* kEvalFile = "eval.txt";
inline constexpr const char* kRandomWalkFile = "random_walk.txt";
inline constexpr const char* kReportFile = "report.txt";

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read file: " + path.string());
    return in;
}

inline double final_window_mean(std::span<const MetricsRecord> records,
                                double MetricsRecord::*field, int window) {
    if (records.empty()) throw std::runtime_error("no metrics to summarize");
    const std::size_t n = std::min<std::size_t>(records.size(), static_cast<std::size_t>(window));
    double sum = 0.0;
    for (std::size_t i = records.size() - n; i < records.size(); ++i) sum += records[i].*field;
    return sum / static_cast<double>(n);
}

}  // namespace detail

/// Uniform-random reference return used by every achievability figure.
struct RandomReference {
    int episodes = 0;
    std::uint64_t seed = 0;
    double mean_return = 0.0;
};

inline RandomReference compute_random_reference(const ExperimentConfig& config) {
    RandomReference ref;
    ref.episodes = config.run.random_walk_episodes;
    ref.seed = config.run.random_walk_seed;
    ref.mean_return = env::random_walk_rollout(config.env, ref.episodes, ref.seed);
    return ref;
}

inline void write_random_reference(const std::filesystem::path& out_root,
                                   const RandomReference& ref) {
    Summary summary;
    summary.add("episodes", ref.episodes);
    summary.add("seed", static_cast<int>(ref.seed));
    summary.add("mean_return", ref.mean_return);
    std::ofstream out = detail::open_out(out_root / kRandomWalkFile);
    write_summary(out, summary);
    if (!out.good()) throw std::runtime_error("failed writing random-walk reference");
}

/// Greedy rollout of a model set under the evaluation stream of `seed`.
inline EvalStats evaluate_models(const ExperimentConfig& config, const ModelSet& models,
                                 std::uint64_t seed) {
    return evaluate_policy(config.env, models.actors, config.run.eval_episodes,
                           mix_seed(seed, kEvalStreamIndex), /*greedy=*/true);
}

/// Rollout statistics of the uniform-random policy (the `random` framework),
/// seeded the same way as model evaluation.
inline EvalStats evaluate_random(const ExperimentConfig& config, std::uint64_t seed) {
    const env::EnvConfig& env_config = config.env;
    const std::uint64_t master = mix_seed(seed, kEvalStreamIndex);
    env::OffloadEnv env(env_config);
    const int n_amounts = static_cast<int>(env_config.packet_amounts.size());
    std::vector<Episode> episodes;
    episodes.reserve(static_cast<std::size_t>(config.run.eval_episodes));
    for (int e = 0; e < config.run.eval_episodes; ++e) {
        env.reset(mix_seed(master, 2 * static_cast<std::uint64_t>(e)));
        RandomStream actions(mix_seed(master, 2 * static_cast<std::uint64_t>(e) + 1));
        Episode episode;
        for (int t = 0; t < env_config.episode_length; ++t) {
            std::vector<env::AgentAction> joint(static_cast<std::size_t>(env_config.n_edges));
            for (env::AgentAction& a : joint)
                a = env::decode_action(actions.uniform_int(env_config.n_actions()), n_amounts);
            const env::StepResult result = env.step(joint);
            episode.total_reward += result.reward;
            episode.empty_events += result.cloud_empty_events;
            episode.overflow_events += result.cloud_overflow_events;
            double edge_sum = 0.0;
            for (double q : env.state().edge_queues) edge_sum += q;
            double cloud_sum = 0.0;
            for (double q : env.state().cloud_queues) cloud_sum += q;
            episode.mean_edge_queue += edge_sum / env_config.n_edges;
            episode.mean_cloud_queue += cloud_sum / env_config.n_clouds;
        }
        episode.mean_edge_queue /= env_config.episode_length;
        episode.mean_cloud_queue /= env_config.episode_length;
        episodes.push_back(std::move(episode));
    }
    return summarize_episodes(episodes, env_config);
}

inline void add_eval_stats(Summary& summary, const char* prefix, const EvalStats& stats) {
    const std::string p(prefix);
    summary.add(p + "_return", stats.mean_return);
    summary.add(p + "_edge_queue", stats.mean_edge_queue);
    summary.add(p + "_cloud_queue", stats.mean_cloud_queue);
    summary.add(p + "_empty_ratio", stats.empty_event_ratio);
    summary.add(p + "_overflow_ratio", stats.overflow_event_ratio);
}

/// Trains one (framework, seed) run and writes metrics.csv, models.txt and
/// summary.txt into `<out_root>/<framework>_seed<seed>/`. For the `random`
/// framework no training happens; the summary holds rollout statistics
/// only. Partial output is removed if the run fails.
inline Summary run_training(const ExperimentConfig& config, std::uint64_t seed,
                            std::ostream* log = nullptr) {
    const Framework framework = config.run.framework;
    const std::filesystem::path out_root(config.run.out_dir);
    const std::filesystem::path run_dir = out_root / run_dir_name(framework, seed);
    std::filesystem::create_directories(run_dir);

    try {
        const RandomReference reference = compute_random_reference(config);
        write_random_reference(out_root, reference);

        Summary summary;
        summary.add("framework", framework_name(framework));
        summary.add("seed", static_cast<int>(seed));
        summary.add("random_walk_return", reference.mean_return);
        summary.add("random_walk_episodes", reference.episodes);
        summary.add("random_walk_seed", static_cast<int>(reference.seed));

        if (framework == Framework::Random) {
            const EvalStats stats = evaluate_random(config, seed);
            summary.add("eval_episodes", config.run.eval_episodes);
            add_eval_stats(summary, "eval", stats);
            summary.add("eval_achievability",
                        achievability(stats.mean_return, reference.mean_return));
            std::ofstream out = detail::open_out(run_dir / kSummaryFile);
            write_summary(out, summary);
            if (!out.good()) throw std::runtime_error("failed writing summary");
            return summary;
        }

        RandomStream init_stream(mix_seed(seed, kInitStreamIndex));
        ModelSet models =
            make_models(framework, config.env.n_edges, config.env.observation_size(),
                        config.env.state_size(), config.env.n_actions(), config.model,
                        init_stream);
        TrainerConfig trainer_config = config.trainer;
        trainer_config.seed = seed;
        Trainer trainer(config.env, std::move(models), trainer_config);

        std::vector<MetricsRecord> records;
        records.reserve(static_cast<std::size_t>(trainer_config.epochs));
        {
            std::ofstream metrics_out = detail::open_out(run_dir / kMetricsFile);
            write_metrics_header(metrics_out);
            for (int epoch = 0; epoch < trainer_config.epochs; ++epoch) {
                records.push_back(trainer.run_epoch());
                write_metrics_row(metrics_out, records.back());
                metrics_out.flush();
                if (trainer_config.checkpoint_period > 0 &&
                    (epoch + 1) % trainer_config.checkpoint_period == 0) {
                    std::ofstream ck = detail::open_out(run_dir / kCheckpointFile);
                    save_checkpoint(ck, trainer, framework);
                    if (!ck.good()) throw std::runtime_error("failed writing checkpoint");
                }
                if (log && ((epoch + 1) % 50 == 0 || epoch == 0))
                    *log << run_dir_name(framework, seed) << " epoch " << (epoch + 1) << '/'
                         << trainer_config.epochs << " mean_return "
                         << textio::fmt(records.back().mean_return) << std::endl;
            }
            if (!metrics_out.good()) throw std::runtime_error("failed writing metrics");
        }

        {
            std::ofstream models_out = detail::open_out(run_dir / kModelsFile);
            write_models(models_out, trainer.models());
            if (!models_out.good()) throw std::runtime_error("failed writing models");
        }

        const double final_return =
            detail::final_window_mean(records, &MetricsRecord::mean_return, kFinalWindowEpochs);
        summary.add("epochs", trainer_config.epochs);
        summary.add("final_window_epochs",
                    std::min<int>(trainer_config.epochs, kFinalWindowEpochs));
        summary.add("final_return", final_return);
        summary.add("final_edge_queue",
                    detail::final_window_mean(records, &MetricsRecord::mean_edge_queue,
                                              kFinalWindowEpochs));
        summary.add("final_cloud_queue",
                    detail::final_window_mean(records, &MetricsRecord::mean_cloud_queue,
                                              kFinalWindowEpochs));
        summary.add("final_empty_ratio",
                    detail::final_window_mean(records, &MetricsRecord::empty_event_ratio,
                                              kFinalWindowEpochs));
        summary.add("final_overflow_ratio",
                    detail::final_window_mean(records, &MetricsRecord::overflow_event_ratio,
                                              kFinalWindowEpochs));
        summary.add("achievability", achievability(final_return, reference.mean_return));

        const EvalStats eval = evaluate_models(config, trainer.models(), seed);
        summary.add("eval_episodes", config.run.eval_episodes);
        add_eval_stats(summary, "eval", eval);
        summary.add("eval_achievability",
                    achievability(eval.mean_return, reference.mean_return));

        std::ofstream summary_out = detail::open_out(run_dir / kSummaryFile);
        write_summary(summary_out, summary);
        if (!summary_out.good()) throw std::runtime_error("failed writing summary");
        return summary;
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove_all(run_dir, ec);
        throw;
    }
}

/// Re-evaluates a finished run from its serialized models; writes eval.txt
/// next to them and returns the stats.
inline Summary evaluate_run(const ExperimentConfig& config, std::uint64_t seed) {
    const Framework framework = config.run.framework;
    const std::filesystem::path run_dir =
        std::filesystem::path(config.run.out_dir) / run_dir_name(framework, seed);
    if (framework == Framework::Random)
        throw std::runtime_error("the random framework keeps no models; see its summary.txt");
    std::ifstream models_in = detail::open_in(run_dir / kModelsFile);
    const ModelSet models = read_models(models_in);
    const EvalStats stats = evaluate_models(config, models, seed);

    Summary summary;
    summary.add("framework", framework_name(framework));
    summary.add("seed", static_cast<int>(seed));
    summary.add("eval_episodes", config.run.eval_episodes);
    add_eval_stats(summary, "eval", stats);
    std::ofstream out = detail::open_out(run_dir / kEvalFile);
    write_summary(out, summary);
    if (!out.good()) throw std::runtime_error("failed writing evaluation");
    return summary;
}

/// Runs the random-walk reference rollout and stores it at the output root.
inline RandomReference run_random_baseline(const ExperimentConfig& config) {
    const std::filesystem::path out_root(config.run.out_dir);
    std::filesystem::create_directories(out_root);
    const RandomReference ref = compute_random_reference(config);
    write_random_reference(out_root, ref);
    return ref;
}

/// Aggregates per-run summaries across seeds and frameworks into
/// report.txt: per-framework means plus every pairwise achievability gap.
inline Summary write_report(const ExperimentConfig& config) {
    const std::filesystem::path out_root(config.run.out_dir);
    Summary report;
    {
        std::string seeds;
        for (std::uint64_t s : config.run.seeds) {
            if (!seeds.empty()) seeds += ',';
            seeds += std::to_string(s);
        }
        report.add("seeds", seeds);
    }

    std::vector<Framework> present;
    std::vector<double> mean_ach(4, 0.0);
    bool have_reference = false;
    for (std::size_t f = 0; f < 4; ++f) {
        const Framework framework = kTrainableFrameworks[f];
        double ach_sum = 0.0, ret_sum = 0.0, cloud_sum = 0.0, edge_sum = 0.0;
        int found = 0;
        for (std::uint64_t seed : config.run.seeds) {
            const std::filesystem::path summary_path =
                out_root / run_dir_name(framework, seed) / kSummaryFile;
            if (!std::filesystem::exists(summary_path)) continue;
            std::ifstream in = detail::open_in(summary_path);
            const Summary s = read_summary(in);
            ach_sum += s.get_double("achievability");
            ret_sum += s.get_double("final_return");
            cloud_sum += s.get_double("final_cloud_queue");
            edge_sum += s.get_double("final_edge_queue");
            report.add(std::string(framework_name(framework)) + "_seed" + std::to_string(seed) +
                           "_achievability",
                       s.get_double("achievability"));
            if (!have_reference) {
                report.add("random_walk_return", s.get_double("random_walk_return"));
                have_reference = true;
            }
            ++found;
        }
        if (found == 0) continue;
        present.push_back(framework);
        const std::string name = framework_name(framework);
        mean_ach[f] = ach_sum / found;
        report.add(name + "_runs", found);
        report.add(name + "_mean_achievability", mean_ach[f]);
        report.add(name + "_mean_final_return", ret_sum / found);
        report.add(name + "_mean_cloud_queue", cloud_sum / found);
        report.add(name + "_mean_edge_queue", edge_sum / found);
    }
    if (present.empty())
        throw std::runtime_error("no run summaries found under " + out_root.string());

    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = a + 1; b < 4; ++b) {
            const Framework fa = kTrainableFrameworks[a];
            const Framework fb = kTrainableFrameworks[b];
            const bool have_a = std::find(present.begin(), present.end(), fa) != present.end();
            const bool have_b = std::find(present.begin(), present.end(), fb) != present.end();
            if (!have_a || !have_b) continue;
            report.add(std::string("gap_") + framework_name(fa) + "_minus_" + framework_name(fb),
                       mean_ach[a] - mean_ach[b]);
        }

    std::ofstream out = detail::open_out(out_root / kReportFile);
    write_summary(out, report);
    if (!out.good()) throw std::runtime_error("failed writing report");
    return report;
}

}  // namespace qmarl
