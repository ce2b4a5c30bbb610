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


#include "qram/ecs.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>

using namespace qram;

namespace {

Eigen::Vector2cd tag_vector(Tag t) {
    const double s = kInvSqrt2;
    switch (t) {
        case Tag::Zero: return {1, 0};
        case Tag::One: return {0, 1};
        case Tag::Plus: return {s, s};
        case Tag::Minus: return {s, -s};
    }
    return {};
}

// Ideal query output as a dense vector; qubit q is bit q of the index.
Eigen::VectorXcd ideal_vector(const QramGeometry &g, const AddressState &a, const ClassicalData &d) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index{1} << g.qubit_count());
    const uint32_t L = g.layers();
    for (const auto &c : a.components) {
        uint64_t idx = 0;
        for (uint32_t b = 1; b <= L; b++) idx |= ((c.index >> (L - b)) & 1) << g.address(b);
        if (d.bits[c.index]) idx |= uint64_t{1} << g.data();
        v[static_cast<Eigen::Index>(idx)] += c.amplitude;
    }
    return v;
}

// sum over router basis states r of |<ideal, r|state>|^2.
double oracle_fidelity(const Eigen::VectorXcd &state, const Eigen::VectorXcd &ideal, const QramGeometry &g) {
    const uint64_t low = uint64_t{1} << (g.layers() + 1);
    std::map<uint64_t, Complex> per_rest;
    for (Eigen::Index j = 0; j < state.size(); j++) {
        if (state[j] == Complex(0)) continue;
        uint64_t u = static_cast<uint64_t>(j);
        per_rest[u / low] += std::conj(ideal[static_cast<Eigen::Index>(u % low)]) * state[j];
    }
    double f = 0;
    for (const auto &[r, o] : per_rest) f += std::norm(o);
    return f;
}

ErrorConfiguration random_errors(std::mt19937_64 &rng, const CircuitIR &c, int n) {
    ErrorConfiguration e;
    std::uniform_int_distribution<size_t> pos(0, c.size());
    std::uniform_int_distribution<uint32_t> q(0, c.geometry.qubit_count() - 1);
    std::uniform_int_distribution<int> p(1, 3);
    for (int k = 0; k < n; k++) e.add({pos(rng), q(rng), static_cast<Pauli>(p(rng))});
    e.sort();
    return e;
}

}  // namespace

TEST(Ecs, PauliAndHadamardOnTagsMatchMatrices) {
    const char *names[] = {"I", "X", "Y", "Z"};
    for (int p = 0; p < 4; p++) {
        Matrix m = p == 0 ? Matrix(Matrix::Identity(2, 2)) : single_qubit_matrix(names[p]);
        for (Tag t : {Tag::Zero, Tag::One, Tag::Plus, Tag::Minus}) {
            auto [nt, ph] = pauli_on_tag(static_cast<Pauli>(p), t);
            Eigen::Vector2cd got = ph * tag_vector(nt);
            Eigen::Vector2cd want = m * tag_vector(t);
            EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-15) << names[p] << tag_char(t);
        }
    }
    Matrix h = single_qubit_matrix("H");
    for (Tag t : {Tag::Zero, Tag::One, Tag::Plus, Tag::Minus}) {
        Eigen::Vector2cd want = h * tag_vector(t);
        Eigen::Vector2cd got = tag_vector(static_cast<Tag>(static_cast<uint8_t>(t) ^ 2));
        EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(Ecs, TagOverlapsMatchVectors) {
    for (Tag a : {Tag::Zero, Tag::One, Tag::Plus, Tag::Minus}) {
        for (Tag b : {Tag::Zero, Tag::One, Tag::Plus, Tag::Minus}) {
            EXPECT_NEAR(tag_overlap(a, b), tag_vector(a).dot(tag_vector(b)).real(), 1e-15);
        }
    }
}

TEST(Ecs, RouterTablesMatchRouterUnitaries) {
    for (auto kind : {RoutingUnitaryKind::UPrime, RoutingUnitaryKind::UDoublePrime, RoutingUnitaryKind::CSWAP}) {
        Matrix u = router_unitary(kind).matrix;
        auto t = detail::router_table(kind);
        auto inv = t.inverse();
        for (uint32_t in = 0; in < 16; in++) {
            EXPECT_EQ(u(t.image[in], in), Complex(t.sign[in])) << routing_unitary_name(kind) << " col " << in;
            EXPECT_EQ(inv.image[t.image[in]], in);
        }
    }
}

TEST(Ecs, NoiselessQueryReproducesIdealState) {
    for (uint32_t L : {1u, 2u, 3u}) {
        QramGeometry g(L);
        ClassicalData d = ClassicalData::filled(g.memory_size(), 0);
        for (uint64_t i = 0; i < g.memory_size(); i++) d.bits[i] = static_cast<uint8_t>((i * 5 + 1) % 3 == 0);
        auto c = build_query_circuit(g, d);
        std::string pattern(L, '+');
        pattern[0] = '-';
        for (const auto &a : {AddressState::uniform(L), AddressState::basis(L, g.memory_size() - 1),
                              AddressState::product(pattern)}) {
            auto s = init_state(g, a);
            run_circuit(s, c);
            Eigen::VectorXcd got = to_dense(s), want = ideal_vector(g, a, d);
            EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12) << "L=" << L;
            EXPECT_NEAR(query_fidelity(s, g, a, d), 1.0, 1e-12);
            EXPECT_NEAR(norm(s), 1.0, 1e-12);
        }
    }
}

TEST(Ecs, QueryFidelityMatchesDenseOracleUnderErrors) {
    std::mt19937_64 rng(11);
    for (uint32_t L : {1u, 2u}) {
        QramGeometry g(L);
        auto d = ClassicalData::filled(g.memory_size(), 1);
        d.bits[0] = 0;
        auto c = build_query_circuit(g, d);
        auto a = AddressState::uniform(L);
        for (int trial = 0; trial < 30; trial++) {
            auto e = random_errors(rng, c, 1 + trial % 3);
            auto s = init_state(g, a, 64);
            run_circuit(s, c, e);
            double want = oracle_fidelity(to_dense(s), ideal_vector(g, a, d), g);
            EXPECT_NEAR(query_fidelity(s, g, a, d), want, 1e-12) << "L=" << L << " trial " << trial;
            EXPECT_NEAR(norm(s), 1.0, 1e-12);
        }
    }
}

TEST(Ecs, PhaseFlipOnDataRespectsStoredBits) {
    QramGeometry g(1);
    auto a = AddressState::uniform(1);
    for (auto [bits, want] : {std::pair{"01", 0.0}, std::pair{"11", 1.0}}) {
        auto d = ClassicalData::from_string(bits);
        auto c = build_query_circuit(g, d);
        ErrorConfiguration e;
        e.add({c.size(), g.data(), Pauli::Z});
        auto s = init_state(g, a);
        run_circuit(s, c, e);
        EXPECT_NEAR(query_fidelity(s, g, a, d), want, 1e-12) << bits;
    }
}

TEST(Ecs, BitFlipOnDataDestroysBasisQuery) {
    QramGeometry g(2);
    auto d = ClassicalData::from_string("0110");
    auto c = build_query_circuit(g, d);
    auto a = AddressState::basis(2, 1);
    ErrorConfiguration e;
    e.add({c.size(), g.data(), Pauli::X});
    auto s = init_state(g, a);
    run_circuit(s, c, e);
    EXPECT_NEAR(query_fidelity(s, g, a, d), 0.0, 1e-12);
}

TEST(Ecs, UnsortedOrLateEventsAreRejected) {
    QramGeometry g(1);
    auto d = ClassicalData::from_string("01");
    auto c = build_query_circuit(g, d);
    ErrorConfiguration e;
    e.add({c.size() + 1, g.data(), Pauli::X});
    auto s = init_state(g, AddressState::uniform(1));
    EXPECT_THROW(run_circuit(s, c, e), std::invalid_argument);
}

TEST(Ecs, ComponentCapIsEnforced) {
    QramGeometry g(2);
    auto c = build_query_circuit(g, ClassicalData::filled(4, 1));
    auto s = init_state(g, AddressState::uniform(2));
    s.cap = 1;
    EXPECT_THROW(run_circuit(s, c), CapacityError);
}

TEST(Ecs, ErrorFreeMassCountsCleanPaths) {
    QramGeometry g(2);
    auto a = AddressState::uniform(2);
    auto mass = [&](uint32_t node) {
        ErrorConfiguration e;
        e.add({0, 0, Pauli::X, false, node});
        return error_free_amplitude_mass(g, a, e);
    };
    EXPECT_NEAR(error_free_amplitude_mass(g, a, {}), 1.0, 1e-15);
    EXPECT_NEAR(mass(1), 0.0, 1e-15);
    EXPECT_NEAR(mass(2), 0.5, 1e-15);
    EXPECT_NEAR(mass(3), 0.5, 1e-15);
    EXPECT_NEAR(mass(4), 0.75, 1e-15);
    EXPECT_NEAR(mass(7), 0.75, 1e-15);
}

TEST(Ecs, InitStateRejectsMismatchedWidth) {
    QramGeometry g(2);
    EXPECT_THROW(init_state(g, AddressState::uniform(3)), std::invalid_argument);
}
