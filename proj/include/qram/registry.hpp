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

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "qram/gates.hpp"

namespace qram {

enum class Operation : uint8_t { RoutingDown, RoutingUp, CSWAP, SWAP };

inline const char *operation_name(Operation op) {
    switch (op) {
        case Operation::RoutingDown: return "RoutingDown";
        case Operation::RoutingUp: return "RoutingUp";
        case Operation::CSWAP: return "CSWAP";
        case Operation::SWAP: return "SWAP";
    }
    return "?";
}

/// One constituent of a composite decomposition, on operand slots of the composite gate.
struct Constituent {
    bool two_qubit;
    uint8_t a;
    uint8_t b = 0;

    bool operator==(const Constituent &) const = default;
};

/// Interleaves `cz` CZs (round-robin over `edges`) with `sq` single-qubit gates (round-robin over
/// `arity` slots). Used when only gate counts of a decomposition are known.
inline std::vector<Constituent> synthetic_recipe(
    uint32_t arity, const std::vector<std::pair<uint32_t, uint32_t>> &edges, uint32_t cz, uint32_t sq) {
    std::vector<Constituent> out;
    uint32_t placed_sq = 0;
    auto place_sq_until = [&](uint32_t target) {
        while (placed_sq < target) {
            out.push_back({false, static_cast<uint8_t>(placed_sq % arity)});
            placed_sq++;
        }
    };
    for (uint32_t k = 0; k < cz; k++) {
        place_sq_until(cz ? sq * k / cz : sq);
        const auto &e = edges[k % edges.size()];
        out.push_back({true, static_cast<uint8_t>(e.first), static_cast<uint8_t>(e.second)});
    }
    place_sq_until(sq);
    return out;
}

struct RegistryKey {
    Operation operation;
    Connectivity connectivity;
    /// Unitary realizing the operation: "UPrime", "UDoublePrime", "UTriplePrime", "CSWAP" or "SWAP".
    std::string variant;

    auto tie() const { return std::tie(operation, connectivity, variant); }
    bool operator<(const RegistryKey &o) const { return tie() < o.tie(); }
    bool operator==(const RegistryKey &o) const { return tie() == o.tie(); }

    std::string str() const {
        return std::string(operation_name(operation)) + "/" + connectivity_name(connectivity) + "/" + variant;
    }
};

struct RegistryEntry {
    uint32_t cz_count;
    uint32_t single_qubit_count;
    /// Operand count of the decomposition: 2 (SWAP), 3 (one routing half / CSWAP), 4 (full router).
    uint32_t arity;
    std::optional<RefCircuit> reference;
    /// CZ/single-qubit constituents in decomposition order; used for noise and depth accounting.
    std::vector<Constituent> constituents;
};

namespace reference_circuits {

/// SWAP from three CNOTs, each written as H CZ H.
inline constexpr const char *kSwap = R"(H q1
CZ q0 q1
H q1
H q0
CZ q0 q1
H q0
H q1
CZ q0 q1
H q1
)";

/// Exact decomposition of the routing unitary U' (control q0, targets q1, q2) on the line
/// q0 - q1 - q2: CNOT(q2->q1) . CZ(q0,q1) . CC-RY(-pi)(q0,q2 -> q1) . CNOT(q2->q1).
/// Uses 7 CZ gates.
inline constexpr const char *kUPrimeOneTargetLine = R"(H q2
CZ q1 q2
H q2
H q1
CZ q2 q1
H q1
RY(0.78539816339744828) q1
H q1
CZ q0 q1
H q1
RY(-0.78539816339744828) q1
H q1
CZ q2 q1
H q1
RY(0.78539816339744828) q1
H q1
CZ q0 q1
H q1
RY(-0.78539816339744828) q1
CZ q0 q1
H q2
CZ q1 q2
H q2
)";

}  // namespace reference_circuits

class DecompositionRegistry {
   public:
    /// Registry populated with the published CZ counts.
    static DecompositionRegistry standard() {
        DecompositionRegistry r;
        const auto one = Connectivity::ControlAdjacentOneTarget;
        const auto two = Connectivity::ControlAdjacentTwoTargets;
        const auto star = Connectivity::StarFourQubit;

        r.add_half(Operation::RoutingDown, one, "UPrime", 5, 8);
        r.add_half(Operation::RoutingUp, one, "UPrime", 5, 8);
        r.add_half(Operation::RoutingDown, two, "UPrime", 8, 8);
        r.add_half(Operation::RoutingUp, two, "UPrime", 8, 8);
        r.add_half(Operation::RoutingDown, two, "UDoublePrime", 7, 8);
        r.add_half(Operation::CSWAP, one, "CSWAP", 8, 8);
        r.add_half(Operation::CSWAP, two, "CSWAP", 10, 8);

        // Full four-qubit routers: input hub adjacent to control and both outputs.
        r.add_router(Operation::RoutingDown, star, "UPrime", 10, 16);
        r.add_router(Operation::RoutingUp, star, "UPrime", 10, 16);
        // Upward router with the control adjacent to the other three qubits; count only.
        r.entries_[{Operation::RoutingUp, star, "UTriplePrime"}] = RegistryEntry{
            12, 16, 4, std::nullopt, synthetic_recipe(4, router_edges(two), 12, 16)};

        RegistryEntry swap{3, 4, 2, RefCircuit::parse(reference_circuits::kSwap, 2),
                           synthetic_recipe(2, {{0, 1}}, 3, 4)};
        r.entries_[{Operation::SWAP, Connectivity::None, "SWAP"}] = swap;
        return r;
    }

    const RegistryEntry &at(const RegistryKey &key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) throw std::out_of_range("no registry entry for " + key.str());
        return it->second;
    }
    bool contains(const RegistryKey &key) const { return entries_.count(key) != 0; }
    const std::map<RegistryKey, RegistryEntry> &entries() const { return entries_; }

    void set(const RegistryKey &key, RegistryEntry entry) {
        if (entry.reference && entry.reference->cz_count() != entry.cz_count) {
            throw std::invalid_argument(key.str() + ": reference circuit CZ count does not match cz_count");
        }
        entries_[key] = std::move(entry);
    }

   private:
    void add_half(Operation op, Connectivity c, const char *variant, uint32_t cz, uint32_t sq) {
        entries_[{op, c, variant}] = RegistryEntry{cz, sq, 3, std::nullopt, synthetic_recipe(3, half_router_edges(c), cz, sq)};
    }
    void add_router(Operation op, Connectivity c, const char *variant, uint32_t cz, uint32_t sq) {
        entries_[{op, c, variant}] = RegistryEntry{cz, sq, 4, std::nullopt, synthetic_recipe(4, router_edges(c), cz, sq)};
    }

    std::map<RegistryKey, RegistryEntry> entries_;
};

/// Composes `circuit` and checks it against the scenario for its arity, plus connectivity.
///
/// 2-qubit circuits must equal SWAP. 3-qubit circuits are checked against the routing
/// constraints of `scenario`.
inline VerificationReport verify_circuit(
    const RefCircuit &circuit, Scenario scenario, const std::vector<std::pair<uint32_t, uint32_t>> &edges,
    const std::string &subject) {
    VerificationReport rep;
    bool connected = circuit.respects(edges);
    Matrix u = circuit.unitary();
    if (circuit.qubit_count == 2) {
        rep.subject = subject;
        Matrix want = swap_unitary().matrix;
        if (std::abs(u(0, 0)) > 0.5) u /= u(0, 0) / std::abs(u(0, 0));
        double dev = (u - want).cwiseAbs().maxCoeff();
        rep.predicates.push_back({"equals SWAP", dev < 1e-9, dev});
    } else if (circuit.qubit_count == 3) {
        rep = verify_routing_equivalence(GateUnitary(subject, u), scenario);
    } else {
        throw std::invalid_argument(subject + ": reference circuits must have 2 or 3 qubits");
    }
    rep.predicates.push_back({"CZ gates respect declared connectivity", connected, connected ? 0.0 : 1.0});
    return rep;
}

inline VerificationReport verify_reference_circuit(const DecompositionRegistry &registry, const RegistryKey &key) {
    const auto &entry = registry.at(key);
    if (!entry.reference) throw std::invalid_argument(key.str() + ": entry has no reference circuit");
    std::vector<std::pair<uint32_t, uint32_t>> edges;
    if (entry.arity == 2) {
        edges = {{0, 1}};
    } else if (entry.arity == 3) {
        edges = half_router_edges(key.connectivity);
    } else {
        edges = router_edges(key.connectivity);
    }
    auto scenario = key.operation == Operation::RoutingDown ? Scenario::DownwardConstraints : Scenario::UpwardConstraints;
    auto rep = verify_circuit(*entry.reference, scenario, edges, key.str());
    size_t cz = entry.reference->cz_count();
    rep.predicates.push_back({"reference CZ count equals registered count", cz == entry.cz_count,
                              std::abs(static_cast<double>(cz) - entry.cz_count)});
    return rep;
}

}  // namespace qram
