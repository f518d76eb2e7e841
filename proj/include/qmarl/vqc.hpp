#pragma once

#include <cmath>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "qmarl/model.hpp"
#include "qmarl/qsim.hpp"
#include "qmarl/textio.hpp"

namespace qmarl::vqc {

inline constexpr double kPi = 3.141592653589793;

/// Angle-encoding stage: feature i*n_qubits + q lands on qubit q at cycle
/// position i, rotated by angle_scale * feature + angle_offset.
struct EncoderLayout {
    int n_qubits = 4;
    std::vector<qsim::GateKind> rotation_cycle;  // one rotation kind per cycle position
    double angle_scale = kPi;
    double angle_offset = 0.0;

    int features_per_qubit() const { return static_cast<int>(rotation_cycle.size()); }
    int feature_count() const { return n_qubits * features_per_qubit(); }

    std::vector<double> angles(std::span<const double> features) const {
        if (static_cast<int>(features.size()) != feature_count())
            throw std::invalid_argument("feature count does not match encoder layout");
        std::vector<double> out(features.size());
        for (std::size_t i = 0; i < features.size(); ++i)
            out[i] = angle_scale * features[i] + angle_offset;
        return out;
    }
};

/// Single-rotation observation encoder (4 features on 4 qubits).
inline EncoderLayout observation_encoder(int n_qubits) {
    EncoderLayout layout;
    layout.n_qubits = n_qubits;
    layout.rotation_cycle = {qsim::GateKind::RotY};
    return layout;
}

/// Four-rotation chain per qubit for the larger global state (16 features
/// on 4 qubits).
inline EncoderLayout state_encoder(int n_qubits) {
    EncoderLayout layout;
    layout.n_qubits = n_qubits;
    layout.rotation_cycle = {qsim::GateKind::RotX, qsim::GateKind::RotY,
                             qsim::GateKind::RotZ, qsim::GateKind::RotX};
    return layout;
}

inline void append_encoder(qsim::CircuitSpec& spec, const EncoderLayout& layout) {
    for (int cycle = 0; cycle < layout.features_per_qubit(); ++cycle) {
        for (int q = 0; q < layout.n_qubits; ++q) {
            const int slot = cycle * layout.n_qubits + q;
            spec.gates.push_back(qsim::encoder_rot(layout.rotation_cycle[cycle], q, slot));
        }
    }
    spec.n_encoder_slots += layout.feature_count();
}

/// Variational stage: repeated blocks of per-qubit [RotX, RotY, RotZ]
/// followed by a CNOT ring (control q -> target (q+1) mod n), then RotY
/// gates on qubits 0, 1, ... for any remaining parameter budget. With
/// n_qubits = 4 and 50 gates this is four full blocks plus RotY on
/// qubits 0 and 1.
struct AnsatzLayout {
    int n_qubits = 4;
    int n_param_gates = 50;
};

inline void append_ansatz(qsim::CircuitSpec& spec, const AnsatzLayout& layout) {
    static constexpr qsim::GateKind kCycle[3] = {qsim::GateKind::RotX, qsim::GateKind::RotY,
                                                 qsim::GateKind::RotZ};
    int slot = spec.n_param_slots;
    int remaining = layout.n_param_gates;
    while (remaining >= 3 * layout.n_qubits) {
        for (int q = 0; q < layout.n_qubits; ++q)
            for (qsim::GateKind kind : kCycle)
                spec.gates.push_back(qsim::param_rot(kind, q, slot++));
        for (int q = 0; q < layout.n_qubits; ++q)
            spec.gates.push_back(qsim::cnot(q, (q + 1) % layout.n_qubits));
        remaining -= 3 * layout.n_qubits;
    }
    for (int q = 0; q < remaining; ++q)
        spec.gates.push_back(qsim::param_rot(qsim::GateKind::RotY, q, slot++));
    spec.n_param_slots = slot;
}

inline qsim::CircuitSpec build_circuit(const EncoderLayout& encoder, const AnsatzLayout& ansatz) {
    if (encoder.n_qubits != ansatz.n_qubits)
        throw std::invalid_argument("encoder and ansatz qubit counts differ");
    qsim::CircuitSpec spec;
    spec.n_qubits = ansatz.n_qubits;
    spec.observable = qsim::Observable::z_on_all(spec.n_qubits);
    append_encoder(spec, encoder);
    append_ansatz(spec, ansatz);
    spec.validate();
    return spec;
}

/// Quantum actor: observation encoder, 50-gate ansatz, softmax over
/// logit_scale-scaled Z expectations. One measured qubit per action.
class VqcActor final : public Actor {
  public:
    VqcActor(int n_qubits, int n_param_gates, double logit_scale)
        : encoder_(observation_encoder(n_qubits)),
          circuit_(build_circuit(encoder_, AnsatzLayout{n_qubits, n_param_gates})),
          params_(static_cast<std::size_t>(n_param_gates), 0.0),
          logit_scale_(logit_scale) {
        if (logit_scale <= 0.0) throw std::invalid_argument("logit_scale must be positive");
    }

    static constexpr const char* kLayoutName = "vqc-actor";

    int n_actions() const override { return circuit_.observable.n_measured(); }
    int observation_size() const override { return encoder_.feature_count(); }
    int n_params() const override { return static_cast<int>(params_.size()); }
    double logit_scale() const { return logit_scale_; }

    std::vector<double> expectations(std::span<const double> observation) const {
        return qsim::run_circuit(circuit_, encoder_.angles(observation), params_);
    }

    std::vector<double> policy(std::span<const double> observation) const override {
        std::vector<double> logits = expectations(observation);
        for (double& x : logits) x *= logit_scale_;
        return softmax(logits);
    }

    ScoreGrad grad_log_prob(std::span<const double> observation, int action) const override {
        const std::vector<double> angles = encoder_.angles(observation);
        std::vector<double> logits = qsim::run_circuit(circuit_, angles, params_);
        for (double& x : logits) x *= logit_scale_;
        const std::vector<double> probs = softmax(logits);
        if (action < 0 || action >= static_cast<int>(probs.size()))
            throw std::invalid_argument("action index out of range");
        // d log pi_a / d f_j = logit_scale * (delta_aj - pi_j); one
        // parameter-shift pass with these output weights gives the full
        // gradient through the softmax.
        std::vector<double> weights(probs.size());
        for (std::size_t j = 0; j < probs.size(); ++j)
            weights[j] = logit_scale_ * ((static_cast<int>(j) == action ? 1.0 : 0.0) - probs[j]);
        ScoreGrad sg;
        sg.grad = qsim::gradient(circuit_, angles, params_, weights);
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
        out << "layout " << kLayoutName << '\n'
            << "n_qubits " << circuit_.n_qubits << '\n'
            << "n_params " << n_params() << '\n'
            << "logit_scale " << textio::fmt(logit_scale_) << '\n'
            << "params ";
        textio::write_doubles(out, params_);
        out << '\n';
    }

    /// Reads the fields following the `layout vqc-actor` line.
    static std::unique_ptr<VqcActor> read(std::istream& in) {
        const int n_qubits = static_cast<int>(textio::read_int_field(in, "n_qubits"));
        const int n_params = static_cast<int>(textio::read_int_field(in, "n_params"));
        const double logit_scale = textio::read_double_field(in, "logit_scale");
        auto model = std::make_unique<VqcActor>(n_qubits, n_params, logit_scale);
        textio::expect_token(in, "params");
        model->params_ = textio::read_doubles(in, static_cast<std::size_t>(n_params), "actor param");
        return model;
    }

    std::unique_ptr<Actor> clone() const override { return std::make_unique<VqcActor>(*this); }

  private:
    EncoderLayout encoder_;
    qsim::CircuitSpec circuit_;
    std::vector<double> params_;
    double logit_scale_;
};

/// Quantum centralized critic: state encoder, 50-gate ansatz, value =
/// value_scale * sum of Z expectations.
class VqcCritic final : public Critic {
  public:
    VqcCritic(int n_qubits, int n_param_gates, double value_scale)
        : encoder_(state_encoder(n_qubits)),
          circuit_(build_circuit(encoder_, AnsatzLayout{n_qubits, n_param_gates})),
          params_(static_cast<std::size_t>(n_param_gates), 0.0),
          value_scale_(value_scale) {}

    static constexpr const char* kLayoutName = "vqc-critic";

    int state_size() const override { return encoder_.feature_count(); }
    int n_params() const override { return static_cast<int>(params_.size()); }
    double value_scale() const { return value_scale_; }

    double value(std::span<const double> state) const override {
        const std::vector<double> values =
            qsim::run_circuit(circuit_, encoder_.angles(state), params_);
        double sum = 0.0;
        for (double v : values) sum += v;
        return value_scale_ * sum;
    }

    std::vector<double> value_grad(std::span<const double> state) const override {
        const std::vector<double> weights(
            static_cast<std::size_t>(circuit_.observable.n_measured()), value_scale_);
        return qsim::gradient(circuit_, encoder_.angles(state), params_, weights);
    }

    std::span<const double> params() const override { return params_; }
    void set_params(std::span<const double> values) override {
        if (values.size() != params_.size())
            throw std::invalid_argument("parameter vector length mismatch");
        params_.assign(values.begin(), values.end());
    }

    const char* layout_name() const override { return kLayoutName; }

    void write(std::ostream& out) const override {
        out << "layout " << kLayoutName << '\n'
            << "n_qubits " << circuit_.n_qubits << '\n'
            << "n_params " << n_params() << '\n'
            << "value_scale " << textio::fmt(value_scale_) << '\n'
            << "params ";
        textio::write_doubles(out, params_);
        out << '\n';
    }

    static std::unique_ptr<VqcCritic> read(std::istream& in) {
        const int n_qubits = static_cast<int>(textio::read_int_field(in, "n_qubits"));
        const int n_params = static_cast<int>(textio::read_int_field(in, "n_params"));
        const double value_scale = textio::read_double_field(in, "value_scale");
        auto model = std::make_unique<VqcCritic>(n_qubits, n_params, value_scale);
        textio::expect_token(in, "params");
        model->params_ = textio::read_doubles(in, static_cast<std::size_t>(n_params), "critic param");
        return model;
    }

    std::unique_ptr<Critic> clone() const override { return std::make_unique<VqcCritic>(*this); }

  private:
    EncoderLayout encoder_;
    qsim::CircuitSpec circuit_;
    std::vector<double> params_;
    double value_scale_;
};

}  // namespace qmarl::vqc
