#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmarl::qsim {

using cdouble = std::complex<double>;

enum class GateKind { RotX, RotY, RotZ, Cnot };

inline bool is_rotation(GateKind k) { return k != GateKind::Cnot; }

inline const char* gate_name(GateKind k) {
    switch (k) {
        case GateKind::RotX: return "RotX";
        case GateKind::RotY: return "RotY";
        case GateKind::RotZ: return "RotZ";
        case GateKind::Cnot: return "CNOT";
    }
    return "?";
}

/// One gate in a circuit. Rotations carry their angle in exactly one of
/// three ways: a fixed angle baked in at build time, a slot into the
/// variational parameter vector, or a slot into the encoder angle vector
/// (bound at evaluation time).
struct Gate {
    GateKind kind = GateKind::RotX;
    int target = 0;
    int control = -1;  // CNOT only
    std::optional<int> param_slot;
    std::optional<int> encoder_slot;
    std::optional<double> fixed_angle;
};

inline Gate fixed_rot(GateKind kind, int target, double angle) {
    Gate g;
    g.kind = kind;
    g.target = target;
    g.fixed_angle = angle;
    return g;
}

inline Gate param_rot(GateKind kind, int target, int slot) {
    Gate g;
    g.kind = kind;
    g.target = target;
    g.param_slot = slot;
    return g;
}

inline Gate encoder_rot(GateKind kind, int target, int slot) {
    Gate g;
    g.kind = kind;
    g.target = target;
    g.encoder_slot = slot;
    return g;
}

inline Gate cnot(int control, int target) {
    Gate g;
    g.kind = GateKind::Cnot;
    g.target = target;
    g.control = control;
    return g;
}

/// Pauli-Z measurement on a subset of qubits. Entries not flagged are
/// treated as identity.
struct Observable {
    std::vector<bool> z;  // z[q] true: measure <Z_q>

    static Observable z_on_all(int n_qubits) {
        Observable obs;
        obs.z.assign(static_cast<std::size_t>(n_qubits), true);
        return obs;
    }

    static Observable z_on(std::initializer_list<int> qubits, int n_qubits) {
        Observable obs;
        obs.z.assign(static_cast<std::size_t>(n_qubits), false);
        for (int q : qubits) obs.z.at(static_cast<std::size_t>(q)) = true;
        return obs;
    }

    int n_measured() const {
        int count = 0;
        for (bool b : z) count += b ? 1 : 0;
        return count;
    }

    void validate(int n_qubits) const {
        if (static_cast<int>(z.size()) != n_qubits)
            throw std::invalid_argument("observable size does not match qubit count");
        const int m = n_measured();
        if (m < 1 || m > n_qubits)
            throw std::invalid_argument("observable must measure between 1 and n_qubits qubits");
    }
};

/// Dense n-qubit statevector. Amplitudes are indexed by bitstring with
/// qubit 0 as the least-significant bit.
class Statevector {
  public:
    explicit Statevector(int n_qubits) : n_qubits_(n_qubits) {
        if (n_qubits < 1 || n_qubits > 24)
            throw std::invalid_argument("qubit count out of supported range");
        amps_.assign(std::size_t{1} << n_qubits, cdouble{0.0, 0.0});
        amps_[0] = cdouble{1.0, 0.0};
    }

    static Statevector from_amplitudes(int n_qubits, std::vector<cdouble> amps) {
        Statevector sv(n_qubits);
        if (amps.size() != sv.amps_.size())
            throw std::invalid_argument("amplitude vector length must be 2^n_qubits");
        sv.amps_ = std::move(amps);
        return sv;
    }

    int n_qubits() const { return n_qubits_; }
    std::size_t size() const { return amps_.size(); }

    std::span<const cdouble> amplitudes() const { return amps_; }
    std::span<cdouble> amplitudes() { return amps_; }

    double norm() const {
        double s = 0.0;
        for (const cdouble& a : amps_) s += std::norm(a);
        return std::sqrt(s);
    }

  private:
    int n_qubits_;
    std::vector<cdouble> amps_;
};

namespace detail {

inline void apply_single_qubit(std::span<cdouble> amps, int target, cdouble m00,
                               cdouble m01, cdouble m10, cdouble m11) {
    const std::size_t step = std::size_t{1} << target;
    const std::size_t dim = amps.size();
    for (std::size_t base = 0; base < dim; base += 2 * step) {
        for (std::size_t i = base; i < base + step; ++i) {
            const cdouble a0 = amps[i];
            const cdouble a1 = amps[i + step];
            amps[i] = m00 * a0 + m01 * a1;
            amps[i + step] = m10 * a0 + m11 * a1;
        }
    }
}

inline void apply_rotation(std::span<cdouble> amps, GateKind kind, int target,
                           double angle) {
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);
    switch (kind) {
        case GateKind::RotX:
            apply_single_qubit(amps, target, {c, 0.0}, {0.0, -s}, {0.0, -s}, {c, 0.0});
            break;
        case GateKind::RotY:
            apply_single_qubit(amps, target, {c, 0.0}, {-s, 0.0}, {s, 0.0}, {c, 0.0});
            break;
        case GateKind::RotZ: {
            // Diagonal, no amplitude mixing.
            const cdouble p0{c, -s};
            const cdouble p1{c, s};
            const std::size_t step = std::size_t{1} << target;
            const std::size_t dim = amps.size();
            for (std::size_t base = 0; base < dim; base += 2 * step) {
                for (std::size_t i = base; i < base + step; ++i) {
                    amps[i] *= p0;
                    amps[i + step] *= p1;
                }
            }
            break;
        }
        case GateKind::Cnot:
            throw std::invalid_argument("CNOT is not a rotation");
    }
}

inline void apply_cnot(std::span<cdouble> amps, int control, int target) {
    const std::size_t cstep = std::size_t{1} << control;
    const std::size_t tstep = std::size_t{1} << target;
    const std::size_t dim = amps.size();
    for (std::size_t i = 0; i < dim; ++i) {
        if ((i & cstep) != 0 && (i & tstep) == 0) {
            std::swap(amps[i], amps[i | tstep]);
        }
    }
}

inline void check_qubit(int q, int n_qubits, const char* what) {
    if (q < 0 || q >= n_qubits)
        throw std::out_of_range(std::string(what) + " qubit index out of range");
}

/// Resolves the angle for a gate application. `angle` must be supplied
/// exactly when the gate is a rotation without a fixed angle.
inline double resolve_angle(const Gate& gate, std::optional<double> angle) {
    if (gate.kind == GateKind::Cnot) {
        if (angle) throw std::invalid_argument("CNOT takes no angle");
        return 0.0;
    }
    if (gate.fixed_angle) {
        if (angle) throw std::invalid_argument("fixed-angle rotation given a second angle");
        return *gate.fixed_angle;
    }
    if (!angle) throw std::invalid_argument("rotation gate needs an angle");
    return *angle;
}

inline void apply_gate_in_place(std::span<cdouble> amps, int n_qubits,
                                const Gate& gate, std::optional<double> angle) {
    check_qubit(gate.target, n_qubits, "target");
    if (gate.kind == GateKind::Cnot) {
        check_qubit(gate.control, n_qubits, "control");
        if (gate.control == gate.target)
            throw std::invalid_argument("CNOT control equals target");
        resolve_angle(gate, angle);
        apply_cnot(amps, gate.control, gate.target);
        return;
    }
    apply_rotation(amps, gate.kind, gate.target, resolve_angle(gate, angle));
}

}  // namespace detail

/// Applies one gate to a state and returns the transformed state.
/// Rotations use the half-angle convention exp(-i*angle*P/2).
inline Statevector apply_gate(const Statevector& state, const Gate& gate,
                              std::optional<double> angle = std::nullopt) {
    Statevector out = state;
    detail::apply_gate_in_place(out.amplitudes(), out.n_qubits(), gate, angle);
    return out;
}

/// <Z_q> for each measured qubit, in qubit order. Values lie in [-1, 1].
inline std::vector<double> expectation(const Statevector& state, const Observable& obs) {
    obs.validate(state.n_qubits());
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(obs.n_measured()));
    const auto amps = state.amplitudes();
    for (int q = 0; q < state.n_qubits(); ++q) {
        if (!obs.z[static_cast<std::size_t>(q)]) continue;
        const std::size_t mask = std::size_t{1} << q;
        double value = 0.0;
        for (std::size_t i = 0; i < amps.size(); ++i) {
            const double p = std::norm(amps[i]);
            value += (i & mask) ? -p : p;
        }
        values.push_back(value);
    }
    return values;
}

/// Ordered gate list plus the measurement bases. Encoder slots receive
/// angles at evaluation time; param slots index the variational vector.
/// Every slot of either kind is used by exactly one gate.
struct CircuitSpec {
    int n_qubits = 0;
    std::vector<Gate> gates;
    Observable observable;
    int n_encoder_slots = 0;
    int n_param_slots = 0;

    void validate() const {
        if (n_qubits < 1) throw std::invalid_argument("circuit needs at least one qubit");
        observable.validate(n_qubits);
        std::vector<int> param_uses(static_cast<std::size_t>(n_param_slots), 0);
        std::vector<int> encoder_uses(static_cast<std::size_t>(n_encoder_slots), 0);
        for (const Gate& g : gates) {
            detail::check_qubit(g.target, n_qubits, "target");
            if (g.kind == GateKind::Cnot) {
                detail::check_qubit(g.control, n_qubits, "control");
                if (g.control == g.target)
                    throw std::invalid_argument("CNOT control equals target");
                if (g.param_slot || g.encoder_slot || g.fixed_angle)
                    throw std::invalid_argument("CNOT carries no angle source");
                continue;
            }
            const int sources = (g.param_slot ? 1 : 0) + (g.encoder_slot ? 1 : 0) +
                                (g.fixed_angle ? 1 : 0);
            if (sources != 1)
                throw std::invalid_argument(std::string(gate_name(g.kind)) +
                                            " must have exactly one angle source");
            if (g.param_slot) {
                if (*g.param_slot < 0 || *g.param_slot >= n_param_slots)
                    throw std::invalid_argument("param slot out of range");
                ++param_uses[static_cast<std::size_t>(*g.param_slot)];
            }
            if (g.encoder_slot) {
                if (*g.encoder_slot < 0 || *g.encoder_slot >= n_encoder_slots)
                    throw std::invalid_argument("encoder slot out of range");
                ++encoder_uses[static_cast<std::size_t>(*g.encoder_slot)];
            }
        }
        for (int uses : param_uses)
            if (uses != 1) throw std::invalid_argument("every param slot must be used exactly once");
        for (int uses : encoder_uses)
            if (uses != 1) throw std::invalid_argument("every encoder slot must be used exactly once");
    }
};

namespace detail {

inline double gate_angle(const Gate& gate, std::span<const double> encoder_angles,
                         std::span<const double> params) {
    if (gate.fixed_angle) return *gate.fixed_angle;
    if (gate.encoder_slot) return encoder_angles[static_cast<std::size_t>(*gate.encoder_slot)];
    return params[static_cast<std::size_t>(*gate.param_slot)];
}

inline void run_in_place(std::span<cdouble> amps, const CircuitSpec& spec,
                         std::span<const double> encoder_angles,
                         std::span<const double> params, std::size_t first_gate = 0) {
    for (std::size_t g = first_gate; g < spec.gates.size(); ++g) {
        const Gate& gate = spec.gates[g];
        if (gate.kind == GateKind::Cnot) {
            apply_cnot(amps, gate.control, gate.target);
        } else {
            apply_rotation(amps, gate.kind, gate.target,
                           gate_angle(gate, encoder_angles, params));
        }
    }
}

inline void check_lengths(const CircuitSpec& spec, std::span<const double> encoder_angles,
                          std::span<const double> params) {
    if (static_cast<int>(encoder_angles.size()) != spec.n_encoder_slots)
        throw std::invalid_argument("encoder angle count does not match circuit");
    if (static_cast<int>(params.size()) != spec.n_param_slots)
        throw std::invalid_argument("parameter count does not match circuit");
}

}  // namespace detail

/// Runs the circuit on |0...0> with the given bindings and returns the
/// final state.
inline Statevector simulate(const CircuitSpec& spec, std::span<const double> encoder_angles,
                            std::span<const double> params) {
    detail::check_lengths(spec, encoder_angles, params);
    Statevector state(spec.n_qubits);
    detail::run_in_place(state.amplitudes(), spec, encoder_angles, params);
    return state;
}

/// Expectation vector of the circuit's observable after running on |0...0>.
inline std::vector<double> run_circuit(const CircuitSpec& spec,
                                       std::span<const double> encoder_angles,
                                       std::span<const double> params) {
    return expectation(simulate(spec, encoder_angles, params), spec.observable);
}

/// Exact gradient of sum_j output_weights[j] * f_j(params) with respect to
/// every variational parameter, by the parameter-shift rule:
/// df/dtheta_k = [f(theta_k + pi/2) - f(theta_k - pi/2)] / 2.
///
/// The state prefix up to each parameterized gate is computed once and
/// shared between the two shifted evaluations of that slot; the shifted
/// values themselves are exact circuit evaluations.
inline std::vector<double> gradient(const CircuitSpec& spec,
                                    std::span<const double> encoder_angles,
                                    std::span<const double> params,
                                    std::span<const double> output_weights) {
    detail::check_lengths(spec, encoder_angles, params);
    if (static_cast<int>(output_weights.size()) != spec.observable.n_measured())
        throw std::invalid_argument("output weight count does not match observable");

    const auto weighted = [&](const Statevector& sv) {
        const std::vector<double> values = expectation(sv, spec.observable);
        double acc = 0.0;
        for (std::size_t j = 0; j < values.size(); ++j) acc += output_weights[j] * values[j];
        return acc;
    };

    std::vector<double> grad(params.size(), 0.0);
    constexpr double kShift = 1.5707963267948966;  // pi/2

    Statevector prefix(spec.n_qubits);
    for (std::size_t g = 0; g < spec.gates.size(); ++g) {
        const Gate& gate = spec.gates[g];
        if (gate.param_slot) {
            const std::size_t slot = static_cast<std::size_t>(*gate.param_slot);
            const double base = params[slot];
            double values[2];
            for (int sign = 0; sign < 2; ++sign) {
                Statevector shifted = prefix;
                detail::apply_rotation(shifted.amplitudes(), gate.kind, gate.target,
                                       base + (sign == 0 ? kShift : -kShift));
                detail::run_in_place(shifted.amplitudes(), spec, encoder_angles, params,
                                     g + 1);
                values[sign] = weighted(shifted);
            }
            grad[slot] = 0.5 * (values[0] - values[1]);
        }
        if (gate.kind == GateKind::Cnot) {
            detail::apply_cnot(prefix.amplitudes(), gate.control, gate.target);
        } else {
            detail::apply_rotation(prefix.amplitudes(), gate.kind, gate.target,
                                   detail::gate_angle(gate, encoder_angles, params));
        }
    }
    return grad;
}

}  // namespace qmarl::qsim
