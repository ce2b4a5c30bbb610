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

#include "qram/registry.hpp"

#include <gtest/gtest.h>

#include "qram/stats.hpp"

using namespace qram;

TEST(Registry, PublishedCounts) {
    auto r = DecompositionRegistry::standard();
    const auto one = Connectivity::ControlAdjacentOneTarget;
    const auto two = Connectivity::ControlAdjacentTwoTargets;
    const auto star = Connectivity::StarFourQubit;
    EXPECT_EQ(r.at({Operation::RoutingDown, star, "UPrime"}).cz_count, 10u);
    EXPECT_EQ(r.at({Operation::RoutingDown, star, "UPrime"}).single_qubit_count, 16u);
    EXPECT_EQ(r.at({Operation::RoutingUp, star, "UTriplePrime"}).cz_count, 12u);
    EXPECT_EQ(r.at({Operation::CSWAP, one, "CSWAP"}).cz_count, 8u);
    EXPECT_EQ(r.at({Operation::CSWAP, two, "CSWAP"}).cz_count, 10u);
    EXPECT_EQ(r.at({Operation::RoutingDown, two, "UDoublePrime"}).cz_count, 7u);
    EXPECT_EQ(r.at({Operation::SWAP, Connectivity::None, "SWAP"}).cz_count, 3u);
    EXPECT_EQ(r.at({Operation::SWAP, Connectivity::None, "SWAP"}).single_qubit_count, 4u);
    EXPECT_THROW(r.at({Operation::CSWAP, star, "CSWAP"}), std::out_of_range);
    EXPECT_FALSE(r.contains({Operation::CSWAP, star, "CSWAP"}));
}

TEST(Registry, ConstituentsMatchCountsAndEdges) {
    auto r = DecompositionRegistry::standard();
    for (const auto &[key, e] : r.entries()) {
        uint32_t cz = 0, sq = 0;
        for (const auto &c : e.constituents) {
            if (c.two_qubit) {
                cz++;
                EXPECT_NE(c.a, c.b);
                EXPECT_LT(c.b, e.arity);
            } else {
                sq++;
            }
            EXPECT_LT(c.a, e.arity);
        }
        EXPECT_EQ(cz, e.cz_count) << key.str();
        EXPECT_EQ(sq, e.single_qubit_count) << key.str();
    }
}

TEST(Registry, SyntheticRecipeInterleaves) {
    auto rec = synthetic_recipe(2, {{0, 1}}, 2, 4);
    // sq*k/cz single-qubit gates precede CZ k.
    std::vector<Constituent> want = {{true, 0, 1}, {false, 0}, {false, 1}, {true, 0, 1}, {false, 0}, {false, 1}};
    ASSERT_EQ(rec.size(), 6u);
    EXPECT_TRUE(rec[0].two_qubit);
    EXPECT_EQ(std::count_if(rec.begin(), rec.end(), [](const Constituent &c) { return c.two_qubit; }), 2);
    EXPECT_EQ(rec, want);
    auto none = synthetic_recipe(3, {{0, 1}}, 0, 3);
    EXPECT_EQ(none.size(), 3u);
}

TEST(Registry, SetRejectsMismatchedReference) {
    auto r = DecompositionRegistry::standard();
    RegistryKey k{Operation::SWAP, Connectivity::None, "SWAP"};
    RegistryEntry bad{4, 6, 2, RefCircuit::parse(reference_circuits::kSwap, 2), {}};
    EXPECT_THROW(r.set(k, bad), std::invalid_argument);
    RegistryEntry good{3, 6, 2, RefCircuit::parse(reference_circuits::kSwap, 2), synthetic_recipe(2, {{0, 1}}, 3, 6)};
    r.set(k, good);
    EXPECT_EQ(r.at(k).single_qubit_count, 6u);
    EXPECT_TRUE(verify_reference_circuit(r, k).all_pass());
    EXPECT_THROW(verify_reference_circuit(r, {Operation::RoutingDown, Connectivity::StarFourQubit, "UPrime"}),
                 std::invalid_argument);
}

TEST(Registry, StarRoutersReduceCountAndDepth) {
    auto r = DecompositionRegistry::standard();
    double count = 1.0 - 10.0 / (2 * 8.0);
    EXPECT_DOUBLE_EQ(count, 0.375);
    QramGeometry g(2);
    auto st = circuit_stats(build_query_circuit(g, ClassicalData::filled(4, 1)), r);
    ASSERT_TRUE(st.depth_reduction.has_value());
    EXPECT_GT(*st.depth_reduction, 0.3);
    EXPECT_LT(st.optimized.cz_count, st.baseline.cz_count);
    // Each of the 8 L=2 routers costs 10 CZ against 16 for two CSWAPs; SWAPs are shared.
    EXPECT_EQ(st.baseline.cz_count - st.optimized.cz_count, 6u * 8u);
}
