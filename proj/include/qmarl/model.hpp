#pragma once

#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace qmarl {

/// Numerically stable softmax.
inline std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("softmax of empty vector");
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> probs(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - top);
        sum += probs[i];
    }
    for (double& p : probs) p /= sum;
    return probs;
}

/// Index of the maximal entry; ties break toward the lowest index.
inline int argmax(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("argmax of empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return static_cast<int>(best);
}

/// Score-function gradient of one action's log-probability, together with
/// the log-probability itself (both come out of the same evaluation).
struct ScoreGrad {
    std::vector<double> grad;  // d log pi(action|obs) / d params
    double log_prob = 0.0;
};

/// Decentralized policy: observation in, action distribution out. The
/// trainer sees VQC and MLP actors through this one surface. Models are
/// immutable during evaluation; parameter writes happen only between
/// evaluations.
class Actor {
  public:
    virtual ~Actor() = default;

    virtual int n_actions() const = 0;
    virtual int observation_size() const = 0;
    virtual int n_params() const = 0;

    virtual std::vector<double> policy(std::span<const double> observation) const = 0;
    virtual ScoreGrad grad_log_prob(std::span<const double> observation, int action) const = 0;

    virtual std::span<const double> params() const = 0;
    virtual void set_params(std::span<const double> values) = 0;

    virtual const char* layout_name() const = 0;
    virtual void write(std::ostream& out) const = 0;
    virtual std::unique_ptr<Actor> clone() const = 0;
};

/// Centralized value function over the global state.
class Critic {
  public:
    virtual ~Critic() = default;

    virtual int state_size() const = 0;
    virtual int n_params() const = 0;

    virtual double value(std::span<const double> state) const = 0;
    /// dV/dparams at the given state.
    virtual std::vector<double> value_grad(std::span<const double> state) const = 0;

    virtual std::span<const double> params() const = 0;
    virtual void set_params(std::span<const double> values) = 0;

    virtual const char* layout_name() const = 0;
    virtual void write(std::ostream& out) const = 0;
    virtual std::unique_ptr<Critic> clone() const = 0;
};

inline std::vector<double> actor_policy(const Actor& model, std::span<const double> observation) {
    return model.policy(observation);
}

/// Execution-time action: argmax of the policy, ties to the lowest index.
inline int greedy_action(const Actor& model, std::span<const double> observation) {
    const std::vector<double> probs = model.policy(observation);
    return argmax(probs);
}

inline double critic_value(const Critic& model, std::span<const double> state) {
    return model.value(state);
}

/// Gradient of weight * log pi(action|observation) with respect to the
/// actor parameters; the weight is treated as a constant.
inline std::vector<double> policy_gradient_terms(const Actor& model,
                                                 std::span<const double> observation,
                                                 int action, double weight) {
    ScoreGrad sg = model.grad_log_prob(observation, action);
    for (double& g : sg.grad) g *= weight;
    return sg.grad;
}

}  // namespace qmarl
