#pragma once

#include <cmath>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "qmarl/model.hpp"
#include "qmarl/rng.hpp"
#include "qmarl/textio.hpp"

namespace qmarl::mlp {

enum class Head { Softmax, Linear };

/// Fully connected net with tanh hidden layers. The flat parameter vector
/// stores, in order: W1 (row-major, out x in), b1, W2, b2, ..., then the
/// skip weights (direct linear taps from the first skip_inputs inputs to a
/// scalar output), then the output scale if present.
struct MlpSpec {
    std::vector<int> layer_sizes;  // input, hidden..., output
    Head head = Head::Linear;
    bool output_scale = false;  // trainable scalar multiplying the logits
    int skip_inputs = 0;        // scalar linear head only

    int output_size() const { return layer_sizes.back(); }
    int input_size() const { return layer_sizes.front(); }

    int n_params() const {
        int count = 0;
        for (std::size_t l = 1; l < layer_sizes.size(); ++l)
            count += layer_sizes[l] * layer_sizes[l - 1] + layer_sizes[l];
        count += skip_inputs;
        count += output_scale ? 1 : 0;
        return count;
    }

    void validate() const {
        if (layer_sizes.size() < 2) throw std::invalid_argument("mlp needs at least two layers");
        for (int s : layer_sizes)
            if (s < 1) throw std::invalid_argument("mlp layer sizes must be positive");
        if (skip_inputs < 0 || skip_inputs > input_size())
            throw std::invalid_argument("skip input count out of range");
        if (skip_inputs > 0 && output_size() != 1)
            throw std::invalid_argument("input skip requires a scalar output");
    }

    std::string describe_layers() const {
        std::ostringstream ss;
        for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
            if (i) ss << ' ';
            ss << layer_sizes[i];
        }
        return ss.str();
    }
};

namespace detail {

struct ForwardTrace {
    std::vector<std::vector<double>> activations;  // input, hidden (post-tanh)...
    std::vector<double> raw;                       // pre-head output incl. skip
    std::vector<double> logits;                    // raw after output scale
    std::vector<double> output;                    // probs or raw value
};

inline ForwardTrace forward_trace(const MlpSpec& spec, std::span<const double> params,
                                  std::span<const double> input) {
    if (static_cast<int>(input.size()) != spec.input_size())
        throw std::invalid_argument("mlp input length mismatch");
    if (static_cast<int>(params.size()) != spec.n_params())
        throw std::invalid_argument("mlp parameter length mismatch");

    ForwardTrace trace;
    trace.activations.emplace_back(input.begin(), input.end());
    std::size_t offset = 0;
    const std::size_t n_layers = spec.layer_sizes.size() - 1;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const int in_size = spec.layer_sizes[l];
        const int out_size = spec.layer_sizes[l + 1];
        const std::span<const double> weights = params.subspan(offset, std::size_t(out_size) * in_size);
        const std::span<const double> biases =
            params.subspan(offset + std::size_t(out_size) * in_size, out_size);
        offset += std::size_t(out_size) * in_size + out_size;

        const std::vector<double>& prev = trace.activations.back();
        std::vector<double> next(static_cast<std::size_t>(out_size));
        for (int o = 0; o < out_size; ++o) {
            double z = biases[o];
            const std::span<const double> row = weights.subspan(std::size_t(o) * in_size, in_size);
            for (int i = 0; i < in_size; ++i) z += row[i] * prev[static_cast<std::size_t>(i)];
            next[static_cast<std::size_t>(o)] = (l + 1 < n_layers) ? std::tanh(z) : z;
        }
        trace.activations.push_back(std::move(next));
    }

    trace.raw = trace.activations.back();
    if (spec.skip_inputs > 0) {
        const std::span<const double> skip = params.subspan(offset, spec.skip_inputs);
        for (int i = 0; i < spec.skip_inputs; ++i) trace.raw[0] += skip[i] * input[i];
    }
    offset += spec.skip_inputs;

    const double scale = spec.output_scale ? params[offset] : 1.0;
    trace.logits = trace.raw;
    for (double& x : trace.logits) x *= scale;

    trace.output = (spec.head == Head::Softmax) ? softmax(trace.logits) : trace.logits;
    return trace;
}

}  // namespace detail

/// Affine + tanh composition; actor heads emit a probability vector,
/// critic heads a single real.
inline std::vector<double> mlp_forward(const MlpSpec& spec, std::span<const double> params,
                                       std::span<const double> input) {
    return detail::forward_trace(spec, params, input).output;
}

/// Exact reverse-mode gradient of a scalar loss with respect to the flat
/// parameter vector, given dL/d(output) for the network's output (the
/// probability vector for softmax heads, the raw value otherwise).
inline std::vector<double> mlp_backward(const MlpSpec& spec, std::span<const double> params,
                                        std::span<const double> input,
                                        std::span<const double> output_grad) {
    const detail::ForwardTrace trace = detail::forward_trace(spec, params, input);
    if (output_grad.size() != trace.output.size())
        throw std::invalid_argument("output gradient length mismatch");

    std::vector<double> grad(params.size(), 0.0);

    // Head: softmax Jacobian or pass-through.
    std::vector<double> dlogits(trace.logits.size());
    if (spec.head == Head::Softmax) {
        const std::vector<double>& probs = trace.output;
        double inner = 0.0;
        for (std::size_t j = 0; j < probs.size(); ++j) inner += output_grad[j] * probs[j];
        for (std::size_t j = 0; j < probs.size(); ++j)
            dlogits[j] = probs[j] * (output_grad[j] - inner);
    } else {
        dlogits.assign(output_grad.begin(), output_grad.end());
    }

    const std::size_t scale_offset = params.size() - (spec.output_scale ? 1 : 0);
    std::vector<double> draw(dlogits.size());
    if (spec.output_scale) {
        const double scale = params[scale_offset];
        double dscale = 0.0;
        for (std::size_t j = 0; j < dlogits.size(); ++j) {
            dscale += trace.raw[j] * dlogits[j];
            draw[j] = scale * dlogits[j];
        }
        grad[scale_offset] = dscale;
    } else {
        draw = dlogits;
    }

    const std::size_t skip_offset = scale_offset - static_cast<std::size_t>(spec.skip_inputs);
    if (spec.skip_inputs > 0) {
        for (int i = 0; i < spec.skip_inputs; ++i)
            grad[skip_offset + static_cast<std::size_t>(i)] = input[i] * draw[0];
    }

    // Walk the layers backwards; dz holds dL/d(pre-activation).
    std::vector<double> dz = draw;
    const std::size_t n_layers = spec.layer_sizes.size() - 1;
    std::vector<std::size_t> layer_offsets(n_layers);
    std::size_t offset = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
        layer_offsets[l] = offset;
        offset += std::size_t(spec.layer_sizes[l + 1]) * spec.layer_sizes[l] + spec.layer_sizes[l + 1];
    }

    for (std::size_t l = n_layers; l-- > 0;) {
        const int in_size = spec.layer_sizes[l];
        const int out_size = spec.layer_sizes[l + 1];
        const std::size_t w_off = layer_offsets[l];
        const std::size_t b_off = w_off + std::size_t(out_size) * in_size;
        const std::vector<double>& prev = trace.activations[l];

        for (int o = 0; o < out_size; ++o) {
            const double d = dz[static_cast<std::size_t>(o)];
            grad[b_off + static_cast<std::size_t>(o)] = d;
            for (int i = 0; i < in_size; ++i)
                grad[w_off + std::size_t(o) * in_size + i] = d * prev[static_cast<std::size_t>(i)];
        }

        if (l == 0) break;
        std::vector<double> dprev(static_cast<std::size_t>(in_size), 0.0);
        for (int o = 0; o < out_size; ++o) {
            const double d = dz[static_cast<std::size_t>(o)];
            for (int i = 0; i < in_size; ++i)
                dprev[static_cast<std::size_t>(i)] += params[w_off + std::size_t(o) * in_size + i] * d;
        }
        // Through the tanh of the previous hidden layer.
        for (int i = 0; i < in_size; ++i) {
            const double a = prev[static_cast<std::size_t>(i)];
            dprev[static_cast<std::size_t>(i)] *= 1.0 - a * a;
        }
        dz = std::move(dprev);
    }
    return grad;
}

/// Glorot-uniform weights, zero biases, skip weights drawn like a 1-output
/// layer, output scale starting at 1. Draws are consumed in parameter
/// storage order.
inline std::vector<double> init_params(const MlpSpec& spec, RandomStream& rng) {
    spec.validate();
    std::vector<double> params(static_cast<std::size_t>(spec.n_params()), 0.0);
    std::size_t offset = 0;
    for (std::size_t l = 1; l < spec.layer_sizes.size(); ++l) {
        const int in_size = spec.layer_sizes[l - 1];
        const int out_size = spec.layer_sizes[l];
        const double bound = std::sqrt(6.0 / (in_size + out_size));
        for (int i = 0; i < out_size * in_size; ++i)
            params[offset + static_cast<std::size_t>(i)] = rng.uniform(-bound, bound);
        offset += std::size_t(out_size) * in_size + out_size;  // biases stay zero
    }
    if (spec.skip_inputs > 0) {
        const double bound = std::sqrt(6.0 / (spec.skip_inputs + 1));
        for (int i = 0; i < spec.skip_inputs; ++i)
            params[offset + static_cast<std::size_t>(i)] = rng.uniform(-bound, bound);
        offset += static_cast<std::size_t>(spec.skip_inputs);
    }
    if (spec.output_scale) params[offset] = 1.0;
    return params;
}

namespace detail {

inline void write_spec(std::ostream& out, const MlpSpec& spec,
                       const std::vector<double>& params, const char* layout) {
    out << "layout " << layout << '\n'
        << "n_layers " << spec.layer_sizes.size() << '\n'
        << "layers " << spec.describe_layers() << '\n'
        << "output_scale " << (spec.output_scale ? 1 : 0) << '\n'
        << "skip_inputs " << spec.skip_inputs << '\n'
        << "params ";
    textio::write_doubles(out, params);
    out << '\n';
}

inline MlpSpec read_spec(std::istream& in, Head head) {
    const int n_layers = static_cast<int>(textio::read_int_field(in, "n_layers"));
    textio::expect_token(in, "layers");
    MlpSpec spec;
    spec.head = head;
    for (int i = 0; i < n_layers; ++i)
        spec.layer_sizes.push_back(static_cast<int>(textio::parse_int(textio::read_token(in, "layer size"))));
    spec.output_scale = textio::read_int_field(in, "output_scale") != 0;
    spec.skip_inputs = static_cast<int>(textio::read_int_field(in, "skip_inputs"));
    spec.validate();
    return spec;
}

}  // namespace detail

class MlpActor final : public Actor {
  public:
    MlpActor(MlpSpec spec, std::vector<double> params)
        : spec_(std::move(spec)), params_(std::move(params)) {
        spec_.validate();
        if (spec_.head != Head::Softmax)
            throw std::invalid_argument("actor spec must use a softmax head");
        if (static_cast<int>(params_.size()) != spec_.n_params())
            throw std::invalid_argument("parameter vector length mismatch");
    }

    static constexpr const char* kLayoutName = "mlp-actor";

    int n_actions() const override { return spec_.output_size(); }
    int observation_size() const override { return spec_.input_size(); }
    int n_params() const override { return static_cast<int>(params_.size()); }
    const MlpSpec& spec() const { return spec_; }

    std::vector<double> policy(std::span<const double> observation) const override {
        return mlp_forward(spec_, params_, observation);
    }

    ScoreGrad grad_log_prob(std::span<const double> observation, int action) const override {
        const std::vector<double> probs = policy(observation);
        if (action < 0 || action >= static_cast<int>(probs.size()))
            throw std::invalid_argument("action index out of range");
        std::vector<double> output_grad(probs.size(), 0.0);
        output_grad[static_cast<std::size_t>(action)] =
            1.0 / probs[static_cast<std::size_t>(action)];
        ScoreGrad sg;
        sg.grad = mlp_backward(spec_, params_, observation, output_grad);
        sg.log_prob = std::log(probs[static_cast<std::size_t>(action)]);
        return sg;
    }

    std::span<const double> params() const override { return params_; }
    void set_params(std::span<const double> values) override {
        if (values.size() != params_.size())
            throw std::invalid_argument("parameter vector length mismatch");
        params_.assign(values.begin(), values.end());
    }

    const char* layout_name() const override { return kLayoutName; }

    void write(std::ostream& out) const override {
        detail::write_spec(out, spec_, params_, kLayoutName);
    }

    static std::unique_ptr<MlpActor> read(std::istream& in) {
        MlpSpec spec = detail::read_spec(in, Head::Softmax);
        textio::expect_token(in, "params");
        std::vector<double> params =
            textio::read_doubles(in, static_cast<std::size_t>(spec.n_params()), "actor param");
        return std::make_unique<MlpActor>(std::move(spec), std::move(params));
    }

    std::unique_ptr<Actor> clone() const override { return std::make_unique<MlpActor>(*this); }

  private:
    MlpSpec spec_;
    std::vector<double> params_;
};

class MlpCritic final : public Critic {
  public:
    MlpCritic(MlpSpec spec, std::vector<double> params)
        : spec_(std::move(spec)), params_(std::move(params)) {
        spec_.validate();
        if (spec_.head != Head::Linear || spec_.output_size() != 1)
            throw std::invalid_argument("critic spec must have a scalar linear head");
        if (static_cast<int>(params_.size()) != spec_.n_params())
            throw std::invalid_argument("parameter vector length mismatch");
    }

    static constexpr const char* kLayoutName = "mlp-critic";

    int state_size() const override { return spec_.input_size(); }
    int n_params() const override { return static_cast<int>(params_.size()); }
    const MlpSpec& spec() const { return spec_; }

    double value(std::span<const double> state) const override {
        return mlp_forward(spec_, params_, state)[0];
    }

    std::vector<double> value_grad(std::span<const double> state) const override {
        const double one[1] = {1.0};
        return mlp_backward(spec_, params_, state, one);
    }

    std::span<const double> params() const override { return params_; }
    void set_params(std::span<const double> values) override {
        if (values.size() != params_.size())
            throw std::invalid_argument("parameter vector length mismatch");
        params_.assign(values.begin(), values.end());
    }

    const char* layout_name() const override { return kLayoutName; }

    void write(std::ostream& out) const override {
        detail::write_spec(out, spec_, params_, kLayoutName);
    }

    static std::unique_ptr<MlpCritic> read(std::istream& in) {
        MlpSpec spec = detail::read_spec(in, Head::Linear);
        textio::expect_token(in, "params");
        std::vector<double> params =
            textio::read_doubles(in, static_cast<std::size_t>(spec.n_params()), "critic param");
        return std::make_unique<MlpCritic>(std::move(spec), std::move(params));
    }

    std::unique_ptr<Critic> clone() const override { return std::make_unique<MlpCritic>(*this); }

  private:
    MlpSpec spec_;
    std::vector<double> params_;
};

}  // namespace qmarl::mlp
