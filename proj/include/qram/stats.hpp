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

#pragma once

#include <array>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "qram/registry.hpp"

namespace qram {

struct SchemeStats {
    uint64_t cz_count = 0;
    uint64_t cz_depth = 0;
    std::array<uint64_t, kPhaseCount> phase_cz_count{};
    std::array<uint64_t, kPhaseCount> phase_cz_depth{};
};

struct GateStats {
    SchemeStats optimized;
    SchemeStats baseline;
    /// (baseline - optimized) / baseline; absent when the baseline is zero.
    std::optional<double> count_reduction;
    std::optional<double> depth_reduction;

    std::string str() const {
        std::ostringstream out;
        auto line = [&](const char *name, const SchemeStats &s) {
            out << name << ": cz_count=" << s.cz_count << " cz_depth=" << s.cz_depth << '\n';
            for (size_t p = 0; p < kPhaseCount; p++) {
                out << "  " << phase_name(static_cast<Phase>(p)) << ": count=" << s.phase_cz_count[p]
                    << " depth=" << s.phase_cz_depth[p] << '\n';
            }
        };
        line("optimized", optimized);
        line("baseline", baseline);
        out << "count_reduction=" << (count_reduction ? std::to_string(*count_reduction) : "n/a") << '\n';
        out << "depth_reduction=" << (depth_reduction ? std::to_string(*depth_reduction) : "n/a") << '\n';
        return out.str();
    }
};

namespace detail {

/// ASAP CZ layering: a CZ lands one layer after the latest CZ on either of its qubits.
class CzScheduler {
   public:
    void add(Qubit a, Qubit b) {
        uint64_t layer = std::max(last_[a], last_[b]) + 1;
        last_[a] = last_[b] = layer;
        depth_ = std::max(depth_, layer);
        count_++;
    }
    uint64_t depth() const { return depth_; }
    uint64_t count() const { return count_; }

   private:
    std::unordered_map<Qubit, uint64_t> last_;
    uint64_t depth_ = 0;
    uint64_t count_ = 0;
};

/// Real-qubit CZ pairs realizing `app` under the optimized (`baseline == false`) or CSWAP scheme.
inline std::vector<std::pair<Qubit, Qubit>> cz_pairs(
    const GateApp &app, const DecompositionRegistry &registry, bool baseline, const std::string &variant) {
    std::vector<std::pair<Qubit, Qubit>> out;
    auto emit = [&](const RegistryEntry &e, const std::vector<Qubit> &slots) {
        for (const auto &c : e.constituents) {
            if (c.two_qubit) out.emplace_back(slots[c.a], slots[c.b]);
        }
    };
    switch (app.kind) {
        case GateKind::SWAP:
            emit(registry.at({Operation::SWAP, Connectivity::None, "SWAP"}), {app.qubits[0], app.qubits[1]});
            break;
        case GateKind::CZ:
            out.emplace_back(app.qubits[0], app.qubits[1]);
            break;
        case GateKind::RoutingDown:
        case GateKind::RoutingUp: {
            if (app.connectivity == Connectivity::None) {
                throw std::invalid_argument("routing gate without a connectivity case");
            }
            auto op = app.kind == GateKind::RoutingDown ? Operation::RoutingDown : Operation::RoutingUp;
            std::vector<Qubit> left{app.qubits[0], app.qubits[1], app.qubits[2]};
            std::vector<Qubit> right{app.qubits[0], app.qubits[1], app.qubits[3]};
            if (baseline) {
                auto half = app.connectivity == Connectivity::ControlAdjacentTwoTargets
                                ? Connectivity::ControlAdjacentTwoTargets
                                : Connectivity::ControlAdjacentOneTarget;
                const auto &e = registry.at({Operation::CSWAP, half, "CSWAP"});
                emit(e, left);
                emit(e, right);
            } else if (app.connectivity == Connectivity::StarFourQubit) {
                emit(registry.at({op, app.connectivity, variant}),
                     {app.qubits[0], app.qubits[1], app.qubits[2], app.qubits[3]});
            } else {
                const auto &e = registry.at({op, app.connectivity, variant});
                emit(e, left);
                emit(e, right);
            }
            break;
        }
        default:
            break;
    }
    return out;
}

inline SchemeStats scheme_stats(
    const CircuitIR &circuit, const DecompositionRegistry &registry, bool baseline, const std::string &variant) {
    SchemeStats s;
    CzScheduler all;
    std::array<CzScheduler, kPhaseCount> per_phase;
    for (const auto &app : circuit.gates) {
        auto p = static_cast<size_t>(app.phase);
        for (auto [a, b] : cz_pairs(app, registry, baseline, variant)) {
            all.add(a, b);
            per_phase[p].add(a, b);
        }
    }
    s.cz_count = all.count();
    s.cz_depth = all.depth();
    for (size_t p = 0; p < kPhaseCount; p++) {
        s.phase_cz_count[p] = per_phase[p].count();
        s.phase_cz_depth[p] = per_phase[p].depth();
    }
    return s;
}

}  // namespace detail

/// CZ count and greedy CZ depth under the optimized routing decompositions and the
/// two-CSWAP-per-router baseline.
inline GateStats circuit_stats(
    const CircuitIR &circuit, const DecompositionRegistry &registry, const std::string &routing_variant = "UPrime") {
    GateStats st;
    st.optimized = detail::scheme_stats(circuit, registry, false, routing_variant);
    st.baseline = detail::scheme_stats(circuit, registry, true, routing_variant);
    if (st.baseline.cz_count > 0) {
        st.count_reduction = 1.0 - static_cast<double>(st.optimized.cz_count) / static_cast<double>(st.baseline.cz_count);
        st.depth_reduction = 1.0 - static_cast<double>(st.optimized.cz_depth) / static_cast<double>(st.baseline.cz_depth);
    }
    return st;
}

}  // namespace qram
