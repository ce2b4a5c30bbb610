// Copyright 2026 The qram-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "qram/noise.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace qram;

namespace {

struct Sites {
    uint64_t sq = 0, tq = 0;
};

// Counts constituent sites directly from the gate list: SWAP 3+4, star router 10+16, H/X 1.
Sites count_sites(const CircuitIR &c) {
    Sites s;
    for (const auto &g : c.gates) {
        switch (g.kind) {
            case GateKind::SWAP: s.tq += 3; s.sq += 4; break;
            case GateKind::RoutingDown:
            case GateKind::RoutingUp: s.tq += 10; s.sq += 16; break;
            case GateKind::H:
            case GateKind::X: s.sq += 1; break;
            default: break;
        }
    }
    return s;
}

CircuitIR l2_circuit() {
    QramGeometry g(2);
    return build_query_circuit(g, ClassicalData::filled(4, 1));
}

}  // namespace

TEST(Noise, InjectionRate) {
    EXPECT_DOUBLE_EQ(injection_rate(0.0), 0.0);
    EXPECT_DOUBLE_EQ(injection_rate(0.75), 1.0);
    EXPECT_DOUBLE_EQ(injection_rate(0.15), 0.2);
    EXPECT_THROW(injection_rate(0.8), std::invalid_argument);
    EXPECT_THROW(injection_rate(-0.1), std::invalid_argument);
}

TEST(Noise, StandardModelAndRecipes) {
    auto m = NoiseModel::standard(1e-3);
    EXPECT_DOUBLE_EQ(m.e_s, 1e-4);
    EXPECT_EQ(m.recipe(GateKind::SWAP, Connectivity::None), (Recipe{3, 4}));
    EXPECT_EQ(m.recipe(GateKind::RoutingDown, Connectivity::StarFourQubit), (Recipe{10, 16}));
    EXPECT_EQ(m.recipe(GateKind::RoutingUp, Connectivity::ControlAdjacentOneTarget), (Recipe{10, 16}));
    EXPECT_EQ(m.recipe(GateKind::RoutingDown, Connectivity::ControlAdjacentTwoTargets), (Recipe{16, 16}));
    EXPECT_THROW(m.recipe(GateKind::CZ, Connectivity::None), ConfigError);
    m.e_t = 1.5;
    EXPECT_THROW(m.validate(), ConfigError);
}

TEST(Noise, ScheduleSiteCountsMatchGateList) {
    auto c = l2_circuit();
    auto want = count_sites(c);
    NoiseSchedule s(c, NoiseModel::standard(1e-3));
    EXPECT_EQ(s.single_qubit_sites().size(), want.sq);
    EXPECT_EQ(s.two_qubit_sites().size(), want.tq);
    EXPECT_NEAR(s.expected_gate_faults(), 1e-4 * want.sq + 1e-3 * want.tq, 1e-15);
    for (const auto &site : s.two_qubit_sites()) {
        const auto &app = c.gates[site.gate];
        std::vector<Qubit> ops(app.qubits.begin(), app.qubits.begin() + app.arity());
        EXPECT_NE(std::find(ops.begin(), ops.end(), site.a), ops.end());
        EXPECT_NE(std::find(ops.begin(), ops.end(), site.b), ops.end());
        EXPECT_NE(site.a, site.b);
    }
}

TEST(Noise, SamplingIsDeterministicPerSample) {
    auto c = l2_circuit();
    NoiseSchedule s(c, NoiseModel::standard(0.05));
    auto a = s.sample(42, 7), b = s.sample(42, 7), other = s.sample(42, 8);
    EXPECT_EQ(a.events, b.events);
    EXPECT_EQ(a.gate_faults, b.gate_faults);
    EXPECT_NE(a.events, other.events);
    EXPECT_EQ(sample_configuration(c, NoiseModel::standard(0.05), 42, 7).events, a.events);
}

TEST(Noise, CertainAndAbsentFaults) {
    auto c = l2_circuit();
    auto sites = count_sites(c);
    NoiseModel all;
    all.e_t = 1;
    all.e_s = 1;
    NoiseSchedule s(c, all);
    for (uint64_t k = 0; k < 5; k++) {
        auto cfg = s.sample(1, k);
        EXPECT_EQ(cfg.gate_faults, sites.sq + sites.tq);
        cfg.validate(c);
        for (const auto &e : cfg.events) EXPECT_GE(e.position, 1u);
    }
    NoiseSchedule none(c, NoiseModel::standard(0));
    for (uint64_t k = 0; k < 100; k++) EXPECT_TRUE(none.sample(1, k).empty());
}

TEST(Noise, MeanFaultCountMatchesExpectation) {
    auto c = l2_circuit();
    auto model = NoiseModel::standard(2e-3);
    NoiseSchedule s(c, model);
    auto sites = count_sites(c);
    const uint64_t n = 200000;
    double total = 0;
    for (uint64_t k = 0; k < n; k++) total += static_cast<double>(s.sample(9, k).gate_faults);
    double mean = sites.sq * model.e_s + sites.tq * model.e_t;
    double var = sites.sq * model.e_s * (1 - model.e_s) + sites.tq * model.e_t * (1 - model.e_t);
    double z = (total / n - mean) / std::sqrt(var / n);
    EXPECT_LT(std::abs(z), 4.0) << "mean " << total / n << " vs " << mean;
}

TEST(Noise, InjectionsFireAtPhaseBoundary) {
    auto c = l2_circuit();
    NoiseModel m;
    m.injections.push_back({c.geometry.control(2), Phase::AddressLoading, 0.6});
    NoiseSchedule s(c, m);
    const uint64_t n = 20000;
    uint64_t fired = 0;
    for (uint64_t k = 0; k < n; k++) {
        auto cfg = s.sample(3, k);
        if (cfg.empty()) continue;
        fired++;
        ASSERT_EQ(cfg.events.size(), 1u);
        EXPECT_TRUE(cfg.events[0].injected);
        EXPECT_EQ(cfg.events[0].position, c.phase_end(Phase::AddressLoading));
        EXPECT_EQ(cfg.events[0].node, 2u);
        EXPECT_EQ(cfg.injected_faults, 1u);
    }
    double p = static_cast<double>(fired) / n;
    EXPECT_LT(std::abs(p - 0.6) / std::sqrt(0.24 / n), 4.0);
}

TEST(Noise, ConfigRoundTrip) {
    QramGeometry g(2);
    auto m = NoiseModel::standard(1e-3);
    m.recipes[{GateKind::SWAP, Connectivity::None}] = {2, 5};
    m.injections.push_back({g.control(3), Phase::DataLoading, 0.1});
    m.injections.push_back({g.leaf(2), Phase::DataWriting, 0.25});
    auto kv = m.to_config(g);
    auto text = kv.dump();
    auto back = NoiseModel::from_config(KeyValueConfig::parse(text), g);
    EXPECT_EQ(back.e_t, m.e_t);
    EXPECT_EQ(back.e_s, m.e_s);
    EXPECT_EQ(back.recipes, m.recipes);
    EXPECT_EQ(back.injections, m.injections);
    EXPECT_EQ(back.to_config(g).dump(), text);
}

TEST(Noise, ConfigErrors) {
    QramGeometry g(2);
    auto parse = [&](const char *text) { return NoiseModel::from_config(KeyValueConfig::parse(text), g); };
    EXPECT_DOUBLE_EQ(parse("e_t = 0.01\n").e_s, 0.001);
    EXPECT_THROW(parse("recipe.SWAP.None.xx = 3\n"), ConfigError);
    EXPECT_THROW(parse("recipe.FOO.None.cz = 3\n"), ConfigError);
    EXPECT_THROW(parse("recipe.SWAP.None.cz = -1\n"), ConfigError);
    EXPECT_THROW(parse("inject.0.color = red\n"), ConfigError);
    EXPECT_THROW(parse("inject.0.qubit = Z9\n"), ConfigError);
    EXPECT_THROW(parse("inject.0.phase = Nowhere\n"), ConfigError);
    EXPECT_THROW(parse("inject.0.p = 0.9\n"), ConfigError);
    EXPECT_THROW(parse("e_t = 2\n"), ConfigError);
    EXPECT_THROW(parse("e_t = abc\n"), ConfigError);
}

TEST(Noise, ReadoutCorrectionInvertsResponse) {
    std::vector<Eigen::Matrix2d> resp(3);
    resp[0] << 0.97, 0.05, 0.03, 0.95;
    resp[1] << 0.9, 0.1, 0.1, 0.9;
    resp[2] << 0.99, 0.2, 0.01, 0.8;
    std::vector<double> truth = {0.5, 0, 0, 0.1, 0, 0.15, 0.05, 0.2};
    auto measured = apply_readout(truth, resp);
    EXPECT_NEAR(std::accumulate(measured.begin(), measured.end(), 0.0), 1.0, 1e-15);
    // Qubit 0 is the most significant bit: P(m=100 | t=000) = 0.03 * 0.9 * 0.99.
    std::vector<double> basis(8, 0.0);
    basis[0] = 1;
    EXPECT_NEAR(apply_readout(basis, resp)[4], 0.03 * 0.9 * 0.99, 1e-15);
    auto back = correct_readout(measured, resp);
    for (size_t i = 0; i < truth.size(); i++) EXPECT_NEAR(back[i], truth[i], 1e-14);

    std::vector<Eigen::Matrix2d> bad(1);
    bad[0] << 0.9, 0.1, 0.2, 0.9;
    EXPECT_THROW(correct_readout({0.5, 0.5}, bad), std::invalid_argument);
    bad[0] << 0.5, 0.5, 0.5, 0.5;
    EXPECT_THROW(correct_readout({0.5, 0.5}, bad), std::invalid_argument);
    EXPECT_THROW(apply_readout({1, 0, 0}, resp), std::invalid_argument);
}

TEST(Noise, ClippedCorrectionLandsOnSimplex) {
    std::vector<Eigen::Matrix2d> resp(1);
    resp[0] << 0.8, 0.3, 0.2, 0.7;
    auto raw = correct_readout({0.9, 0.1}, resp);
    EXPECT_LT(raw[1], 0.0);
    auto clipped = correct_readout({0.9, 0.1}, resp, true);
    EXPECT_NEAR(clipped[0], 1.0, 1e-15);
    EXPECT_NEAR(clipped[1], 0.0, 1e-15);
    auto p = project_to_simplex({0.6, 0.6});
    EXPECT_NEAR(p[0], 0.5, 1e-15);
    EXPECT_NEAR(p[1], 0.5, 1e-15);
    auto q = project_to_simplex({0.2, 0.3, 0.5});
    EXPECT_NEAR(q[0], 0.2, 1e-15);
    EXPECT_NEAR(q[2], 0.5, 1e-15);
    auto r = project_to_simplex({0.7, 0.6, -0.1});
    EXPECT_NEAR(r[0], 0.55, 1e-15);
    EXPECT_NEAR(r[1], 0.45, 1e-15);
    EXPECT_EQ(r[2], 0.0);
}

TEST(Noise, PauliChannelPreservesTraceAndCalibrationVanishesWithoutNoise) {
    Eigen::VectorXcd psi(4);
    psi << 0.5, Complex(0, 0.5), -0.5, 0.5;
    Matrix rho = psi * psi.adjoint();
    Matrix out = detail::pauli_channel(rho, {0, 1}, detail::depolarizing_weights(2, 0.3), 2);
    EXPECT_NEAR(out.trace().real(), 1.0, 1e-14);
    // Full two-qubit depolarizing at e: rho -> (1 - 16e/15) rho + (16e/15) I/4.
    double lambda = 16 * 0.3 / 15;
    Matrix want = (1 - lambda) * rho + lambda * Matrix::Identity(4, 4) / 4;
    EXPECT_LT((out - want).cwiseAbs().maxCoeff(), 1e-14);
    for (const auto &probe : composite_calibration(0, 0)) {
        EXPECT_NEAR(probe.sequential_distance, 0.0, 1e-12) << probe.input;
        EXPECT_NEAR(probe.lumped_distance, 0.0, 1e-12) << probe.input;
    }
    auto probes = composite_calibration(1e-3, 1e-4);
    ASSERT_EQ(probes.size(), 4u);
    for (const auto &probe : probes) {
        EXPECT_GT(probe.lumped_distance, 0.0);
        EXPECT_LT(probe.sequential_distance, 0.01);
    }
}
