#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qmarl/qsim.hpp"
#include "qmarl/rng.hpp"

namespace qs = qmarl::qsim;

namespace {

constexpr double kPi = 3.141592653589793;

TEST(ApplyGate, RotXZeroIsIdentity) {
    qmarl::RandomStream rng(7);
    qs::Statevector state(2);
    for (const qs::Gate& g : {qs::fixed_rot(qs::GateKind::RotY, 0, rng.uniform(-kPi, kPi)),
                              qs::fixed_rot(qs::GateKind::RotX, 1, rng.uniform(-kPi, kPi)),
                              qs::cnot(0, 1)})
        state = qs::apply_gate(state, g);

    const qs::Statevector after = qs::apply_gate(state, qs::fixed_rot(qs::GateKind::RotX, 0, 0.0));
    for (std::size_t i = 0; i < state.size(); ++i) {
        EXPECT_NEAR(state.amplitudes()[i].real(), after.amplitudes()[i].real(), 1e-15);
        EXPECT_NEAR(state.amplitudes()[i].imag(), after.amplitudes()[i].imag(), 1e-15);
    }
}

TEST(ApplyGate, RotXPiOnZeroGivesMinusIOne) {
    const qs::Statevector state =
        qs::apply_gate(qs::Statevector(1), qs::fixed_rot(qs::GateKind::RotX, 0, kPi));
    EXPECT_NEAR(std::abs(state.amplitudes()[0]), 0.0, 1e-12);
    EXPECT_NEAR(state.amplitudes()[1].real(), 0.0, 1e-12);
    EXPECT_NEAR(state.amplitudes()[1].imag(), -1.0, 1e-12);
    const std::vector<double> z = qs::expectation(state, qs::Observable::z_on_all(1));
    EXPECT_NEAR(z[0], -1.0, 1e-12);
}

TEST(ApplyGate, CnotTwiceRestoresState) {
    qmarl::RandomStream rng(11);
    qs::Statevector state(2);
    for (int q = 0; q < 2; ++q)
        state = qs::apply_gate(state, qs::fixed_rot(qs::GateKind::RotY, q, rng.uniform(-kPi, kPi)));
    qs::Statevector twice = qs::apply_gate(qs::apply_gate(state, qs::cnot(0, 1)), qs::cnot(0, 1));
    for (std::size_t i = 0; i < state.size(); ++i)
        EXPECT_NEAR(std::abs(state.amplitudes()[i] - twice.amplitudes()[i]), 0.0, 1e-15);
}

TEST(ApplyGate, AngleRequiredExactlyWhenUnbound) {
    const qs::Statevector state(1);
    EXPECT_THROW(qs::apply_gate(state, qs::param_rot(qs::GateKind::RotY, 0, 0)),
                 std::invalid_argument);
    EXPECT_THROW(qs::apply_gate(state, qs::fixed_rot(qs::GateKind::RotY, 0, 1.0), 2.0),
                 std::invalid_argument);
    EXPECT_THROW(qs::apply_gate(state, qs::cnot(0, 0)), std::invalid_argument);
    EXPECT_THROW(qs::apply_gate(state, qs::fixed_rot(qs::GateKind::RotY, 1, 1.0)),
                 std::out_of_range);
}

TEST(Expectation, ComputationalBasisStates) {
    const qs::Statevector zero(1);
    EXPECT_DOUBLE_EQ(qs::expectation(zero, qs::Observable::z_on_all(1))[0], 1.0);
    const qs::Statevector one =
        qs::apply_gate(zero, qs::fixed_rot(qs::GateKind::RotX, 0, kPi));
    EXPECT_NEAR(qs::expectation(one, qs::Observable::z_on_all(1))[0], -1.0, 1e-12);
}

TEST(Expectation, RotYHalfPiGivesZeroZ) {
    const qs::Statevector state =
        qs::apply_gate(qs::Statevector(1), qs::fixed_rot(qs::GateKind::RotY, 0, kPi / 2.0));
    EXPECT_NEAR(qs::expectation(state, qs::Observable::z_on_all(1))[0], 0.0, 1e-10);
}

TEST(Expectation, SubsetObservableSelectsQubits) {
    qs::Statevector state(3);
    state = qs::apply_gate(state, qs::fixed_rot(qs::GateKind::RotX, 1, kPi));
    const std::vector<double> z = qs::expectation(state, qs::Observable::z_on({1, 2}, 3));
    ASSERT_EQ(z.size(), 2u);
    EXPECT_NEAR(z[0], -1.0, 1e-12);
    EXPECT_NEAR(z[1], 1.0, 1e-12);
}

TEST(RunCircuit, EmptyCircuitOnFourQubits) {
    qs::CircuitSpec spec;
    spec.n_qubits = 4;
    spec.observable = qs::Observable::z_on_all(4);
    spec.validate();
    const std::vector<double> out = qs::run_circuit(spec, {}, {});
    ASSERT_EQ(out.size(), 4u);
    for (double v : out) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(RunCircuit, LengthMismatchesThrow) {
    qs::CircuitSpec spec;
    spec.n_qubits = 1;
    spec.observable = qs::Observable::z_on_all(1);
    spec.gates.push_back(qs::param_rot(qs::GateKind::RotY, 0, 0));
    spec.n_param_slots = 1;
    spec.validate();
    const std::vector<double> params = {0.3};
    const std::vector<double> stray_encoder = {0.1};
    EXPECT_THROW(qs::run_circuit(spec, {}, {}), std::invalid_argument);
    EXPECT_THROW(qs::run_circuit(spec, stray_encoder, params), std::invalid_argument);
    EXPECT_NO_THROW(qs::run_circuit(spec, {}, params));
}

TEST(CircuitSpec, ValidateRejectsMalformedCircuits) {
    qs::CircuitSpec spec;
    spec.n_qubits = 2;
    spec.observable = qs::Observable::z_on_all(2);
    spec.gates.push_back(qs::param_rot(qs::GateKind::RotY, 0, 0));
    spec.n_param_slots = 2;  // slot 1 never used
    EXPECT_THROW(spec.validate(), std::invalid_argument);
    spec.n_param_slots = 1;
    spec.gates.push_back(qs::param_rot(qs::GateKind::RotZ, 1, 0));  // slot 0 reused
    EXPECT_THROW(spec.validate(), std::invalid_argument);
    spec.gates.pop_back();
    spec.validate();
}

TEST(RunCircuit, MatchesDenseOracleOnRandomCircuits) {
    qmarl::RandomStream rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const oracle::RandomCircuit rc = oracle::random_circuit(4, 10 + rng.uniform_int(51), rng);
        const qs::Statevector fast = qs::simulate(rc.spec, rc.encoder_angles, rc.params);
        const std::vector<oracle::cd> slow = oracle::run(rc.spec, rc.encoder_angles, rc.params);
        for (std::size_t i = 0; i < slow.size(); ++i)
            EXPECT_NEAR(std::abs(fast.amplitudes()[i] - slow[i]), 0.0, 1e-9);
        const std::vector<double> fast_z = qs::expectation(fast, rc.spec.observable);
        const std::vector<double> slow_z = oracle::expectations(slow, rc.spec.observable);
        EXPECT_LT(fd::max_abs_diff(fast_z, slow_z), 1e-9);
    }
}

TEST(RunCircuit, NormPreservedAndExpectationsBounded) {
    qmarl::RandomStream rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const oracle::RandomCircuit rc = oracle::random_circuit(4, 60, rng);
        const qs::Statevector state = qs::simulate(rc.spec, rc.encoder_angles, rc.params);
        EXPECT_NEAR(state.norm(), 1.0, 1e-10);
        for (double v : qs::expectation(state, rc.spec.observable)) {
            EXPECT_GE(v, -1.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(RunCircuit, InverseSequenceRecoversInitialState) {
    qmarl::RandomStream rng(47);
    std::vector<qs::Gate> gates;
    for (int g = 0; g < 30; ++g) {
        if (rng.uniform() < 0.3) {
            const int control = rng.uniform_int(4);
            int target = rng.uniform_int(3);
            if (target >= control) ++target;
            gates.push_back(qs::cnot(control, target));
        } else {
            const qs::GateKind kinds[] = {qs::GateKind::RotX, qs::GateKind::RotY,
                                          qs::GateKind::RotZ};
            gates.push_back(qs::fixed_rot(kinds[rng.uniform_int(3)], rng.uniform_int(4),
                                          rng.uniform(-kPi, kPi)));
        }
    }
    qs::Statevector state(4);
    for (const qs::Gate& g : gates) state = qs::apply_gate(state, g);
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
        qs::Gate inverse = *it;
        if (qs::is_rotation(inverse.kind)) inverse.fixed_angle = -*inverse.fixed_angle;
        state = qs::apply_gate(state, inverse);
    }
    EXPECT_NEAR(std::abs(state.amplitudes()[0] - oracle::cd(1.0)), 0.0, 1e-9);
    for (std::size_t i = 1; i < state.size(); ++i)
        EXPECT_NEAR(std::abs(state.amplitudes()[i]), 0.0, 1e-9);
}

TEST(Gradient, SingleRotYAgainstAnalyticDerivative) {
    // One RotY on |0> gives <Z> = cos(theta); the gradient is -sin(theta).
    qs::CircuitSpec spec;
    spec.n_qubits = 1;
    spec.observable = qs::Observable::z_on_all(1);
    spec.gates.push_back(qs::param_rot(qs::GateKind::RotY, 0, 0));
    spec.n_param_slots = 1;
    spec.validate();
    const std::vector<double> weights = {1.0};

    std::vector<double> params = {kPi / 2.0};
    EXPECT_NEAR(qs::gradient(spec, {}, params, weights)[0], -1.0, 1e-12);
    params[0] = 0.0;
    EXPECT_NEAR(qs::gradient(spec, {}, params, weights)[0], 0.0, 1e-12);
    params[0] = 0.7;
    EXPECT_NEAR(qs::gradient(spec, {}, params, weights)[0], -std::sin(0.7), 1e-12);
}

TEST(Gradient, MatchesFiniteDifferencesOnRandomCircuits) {
    qmarl::RandomStream rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const oracle::RandomCircuit rc = oracle::random_circuit(4, 40, rng);
        if (rc.params.empty()) continue;
        std::vector<double> weights(
            static_cast<std::size_t>(rc.spec.observable.n_measured()));
        for (double& w : weights) w = rng.uniform(-1.0, 1.0);

        const std::vector<double> analytic =
            qs::gradient(rc.spec, rc.encoder_angles, rc.params, weights);
        const std::vector<double> numeric = fd::gradient(
            [&](std::span<const double> p) {
                const std::vector<double> values =
                    qs::run_circuit(rc.spec, rc.encoder_angles, p);
                double acc = 0.0;
                for (std::size_t j = 0; j < values.size(); ++j) acc += weights[j] * values[j];
                return acc;
            },
            rc.params, 1e-4);
        EXPECT_LT(fd::max_abs_diff(analytic, numeric), 1e-5);
    }
}

TEST(Gradient, WeightCountMustMatchObservable) {
    qs::CircuitSpec spec;
    spec.n_qubits = 2;
    spec.observable = qs::Observable::z_on_all(2);
    spec.gates.push_back(qs::param_rot(qs::GateKind::RotX, 0, 0));
    spec.n_param_slots = 1;
    spec.validate();
    const std::vector<double> params = {0.2};
    const std::vector<double> short_weights = {1.0};
    EXPECT_THROW(qs::gradient(spec, {}, params, short_weights), std::invalid_argument);
}

TEST(Rng, MixSeedSeparatesStreamsAndReplaysExactly) {
    qmarl::RandomStream a(qmarl::mix_seed(5, 0));
    qmarl::RandomStream b(qmarl::mix_seed(5, 1));
    qmarl::RandomStream a2(qmarl::mix_seed(5, 0));
    bool any_different = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        EXPECT_EQ(x, a2.uniform());
        if (x != b.uniform()) any_different = true;
    }
    EXPECT_TRUE(any_different);
}

TEST(Rng, UniformIntIsInRangeAndCategoricalMatchesCdf) {
    qmarl::RandomStream rng(123);
    for (int i = 0; i < 1000; ++i) {
        const int v = rng.uniform_int(4);
        EXPECT_GE(v, 0);
        EXPECT_LT(v, 4);
    }
    const std::vector<double> probs = {0.0, 0.0, 1.0, 0.0};
    for (int i = 0; i < 50; ++i) EXPECT_EQ(rng.sample_categorical(probs), 2);
}

}  // namespace
