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
#include <string>
#include <vector>

#include "qram/geometry.hpp"

namespace qram {

enum class GateKind : uint8_t { H, X, SWAP, RoutingDown, RoutingUp, CZ, PauliX, PauliY, PauliZ };

enum class Phase : uint8_t { AddressLoading, DataLoading, DataWriting, DataRetrieval, AddressRetrieval };
constexpr size_t kPhaseCount = 5;

/// Hardware adjacency assumed when booking CZ counts for a routing or CSWAP application.
enum class Connectivity : uint8_t {
    None,                      ///< not a routing gate
    ControlAdjacentOneTarget,  ///< line: control - target - target
    ControlAdjacentTwoTargets, ///< line: target - control - target
    StarFourQubit,             ///< one hub adjacent to the other three router qubits
};

/// Which 8x8 unitary realizes each half of a router.
enum class RoutingUnitaryKind : uint8_t { UPrime, UDoublePrime, CSWAP };

inline const char *gate_name(GateKind k) {
    switch (k) {
        case GateKind::H: return "H";
        case GateKind::X: return "X";
        case GateKind::SWAP: return "SWAP";
        case GateKind::RoutingDown: return "RoutingDown";
        case GateKind::RoutingUp: return "RoutingUp";
        case GateKind::CZ: return "CZ";
        case GateKind::PauliX: return "PauliX";
        case GateKind::PauliY: return "PauliY";
        case GateKind::PauliZ: return "PauliZ";
    }
    return "?";
}

inline const char *phase_name(Phase p) {
    switch (p) {
        case Phase::AddressLoading: return "AddressLoading";
        case Phase::DataLoading: return "DataLoading";
        case Phase::DataWriting: return "DataWriting";
        case Phase::DataRetrieval: return "DataRetrieval";
        case Phase::AddressRetrieval: return "AddressRetrieval";
    }
    return "?";
}

inline const char *connectivity_name(Connectivity c) {
    switch (c) {
        case Connectivity::None: return "none";
        case Connectivity::ControlAdjacentOneTarget: return "one-target";
        case Connectivity::ControlAdjacentTwoTargets: return "two-targets";
        case Connectivity::StarFourQubit: return "star";
    }
    return "?";
}

inline std::optional<GateKind> parse_gate_kind(std::string_view s) {
    for (auto k : {GateKind::H, GateKind::X, GateKind::SWAP, GateKind::RoutingDown, GateKind::RoutingUp, GateKind::CZ,
                   GateKind::PauliX, GateKind::PauliY, GateKind::PauliZ}) {
        if (s == gate_name(k)) return k;
    }
    return std::nullopt;
}

inline std::optional<Phase> parse_phase(std::string_view s) {
    for (size_t i = 0; i < kPhaseCount; i++) {
        if (s == phase_name(static_cast<Phase>(i))) return static_cast<Phase>(i);
    }
    return std::nullopt;
}

inline std::optional<Connectivity> parse_connectivity(std::string_view s) {
    for (auto c : {Connectivity::None, Connectivity::ControlAdjacentOneTarget, Connectivity::ControlAdjacentTwoTargets,
                   Connectivity::StarFourQubit}) {
        if (s == connectivity_name(c)) return c;
    }
    return std::nullopt;
}

inline uint32_t gate_arity(GateKind k) {
    switch (k) {
        case GateKind::SWAP:
        case GateKind::CZ:
            return 2;
        case GateKind::RoutingDown:
        case GateKind::RoutingUp:
            return 4;
        default:
            return 1;
    }
}

inline bool is_routing(GateKind k) { return k == GateKind::RoutingDown || k == GateKind::RoutingUp; }

/// One gate application. Routing operands are (control, input, output_left, output_right);
/// for RoutingUp "input" is the node incident that receives the selected child's content.
struct GateApp {
    GateKind kind;
    std::array<Qubit, 4> qubits{};
    Phase phase;
    /// Tree node the gate belongs to (root for data/address register gates).
    uint32_t node = 1;
    Connectivity connectivity = Connectivity::None;

    uint32_t arity() const { return gate_arity(kind); }
};

struct CircuitIR {
    QramGeometry geometry;
    std::vector<GateApp> gates;

    explicit CircuitIR(QramGeometry g) : geometry(g) {}

    size_t size() const { return gates.size(); }

    /// Index one past the last gate of `p`, i.e. the boundary after that phase.
    size_t phase_end(Phase p) const {
        size_t end = 0;
        for (size_t i = 0; i < gates.size(); i++) {
            if (static_cast<uint8_t>(gates[i].phase) <= static_cast<uint8_t>(p)) end = i + 1;
        }
        return end;
    }

    /// Prefix of the circuit up to and including phase `p`.
    CircuitIR truncated_after(Phase p) const {
        CircuitIR out(geometry);
        out.gates.assign(gates.begin(), gates.begin() + static_cast<std::ptrdiff_t>(phase_end(p)));
        return out;
    }

    bool phases_in_canonical_order() const {
        for (size_t i = 1; i < gates.size(); i++) {
            if (gates[i].phase < gates[i - 1].phase) return false;
        }
        return true;
    }

    void validate() const {
        uint32_t n = geometry.qubit_count();
        for (const auto &g : gates) {
            for (uint32_t k = 0; k < g.arity(); k++) {
                if (g.qubits[k] >= n) throw std::invalid_argument("gate operand out of range");
            }
        }
        if (!phases_in_canonical_order()) throw std::invalid_argument("phase labels out of canonical order");
    }

    std::string dump() const {
        std::ostringstream out;
        for (const auto &g : gates) {
            out << phase_name(g.phase) << ' ' << gate_name(g.kind);
            for (uint32_t k = 0; k < g.arity(); k++) out << ' ' << geometry.name(g.qubits[k]);
            out << '\n';
        }
        return out.str();
    }

    /// Parses the `PHASE GATE q1 [q2 [q3 [q4]]]` dump format. Routing gates get `routing_connectivity`.
    static CircuitIR parse(
        const QramGeometry &g, std::string_view text, Connectivity routing_connectivity = Connectivity::StarFourQubit) {
        CircuitIR c(g);
        std::istringstream in{std::string(text)};
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            line_no++;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            std::istringstream ls(line);
            std::string phase_s, gate_s;
            if (!(ls >> phase_s)) continue;
            auto fail = [&](const std::string &msg) {
                throw std::invalid_argument("circuit line " + std::to_string(line_no) + ": " + msg);
            };
            if (!(ls >> gate_s)) fail("missing gate name");
            auto phase = parse_phase(phase_s);
            if (!phase) fail("unknown phase '" + phase_s + "'");
            auto kind = parse_gate_kind(gate_s);
            if (!kind) fail("unknown gate '" + gate_s + "'");
            GateApp app{*kind, {}, *phase};
            std::string q;
            uint32_t k = 0;
            while (ls >> q) {
                if (k >= app.arity()) fail("too many operands");
                try {
                    app.qubits[k++] = g.parse_name(q);
                } catch (const std::exception &e) {
                    fail(e.what());
                }
            }
            if (k != app.arity()) fail("expected " + std::to_string(app.arity()) + " operands");
            if (is_routing(app.kind)) {
                app.connectivity = routing_connectivity;
                auto r = g.role_of(app.qubits[0]);
                if (r.role != Role::Control) fail("routing control must be a C qubit");
                app.node = r.index;
            } else {
                app.node = node_of(g, app.qubits[0]);
            }
            c.gates.push_back(app);
        }
        c.validate();
        return c;
    }

    /// Tree node that owns a qubit. Routers map to their node, leaf F_i to the pseudo-node
    /// 2^L + i below its parent (so a leaf lies on exactly one root-to-leaf path), and the
    /// address/data registers to the root.
    static uint32_t node_of(const QramGeometry &g, Qubit q) {
        auto r = g.role_of(q);
        switch (r.role) {
            case Role::Control:
            case Role::Incident:
                return r.index;
            case Role::Leaf:
                return static_cast<uint32_t>(g.memory_size() + r.index);
            default:
                return 1;
        }
    }
};

namespace detail {

inline void push(CircuitIR &c, GateKind k, Phase p, std::initializer_list<Qubit> qs, uint32_t node) {
    GateApp app{k, {}, p, node};
    size_t i = 0;
    for (auto q : qs) app.qubits[i++] = q;
    if (is_routing(k)) app.connectivity = Connectivity::StarFourQubit;
    c.gates.push_back(app);
}

inline void route_layer(CircuitIR &c, GateKind kind, Phase phase, uint32_t layer) {
    const auto &g = c.geometry;
    for (uint32_t k = g.first_node_of_layer(layer); k <= g.last_node_of_layer(layer); k++) {
        push(c, kind, phase, {g.control(k), g.incident(k), g.left_output(k), g.right_output(k)}, k);
    }
}

}  // namespace detail

/// Builds the canonical five-phase bucket-brigade query circuit.
///
///  - AddressLoading: for each address bit l, the bit enters the root incident, is routed down
///    through layers 1..l-1 and swapped into the layer-l controls. Bit 1 swaps straight into C1.
///  - DataLoading: a bus qubit is prepared as |+> in the root incident and routed down to the
///    leaf positions.
///  - DataWriting: each leaf j with x_j = 1 gets H X H (= Z), writing (-1)^x_j onto the bus.
///  - DataRetrieval: the bus is routed back up, swapped into D and rotated back by H.
///  - AddressRetrieval: AddressLoading reversed; engines apply each gate there as its adjoint.
///
/// With all gates ideal, every router and leaf qubit ends in |0> and (A, D) carries
/// sum_i alpha_i |i>|x_i>.
inline CircuitIR build_query_circuit(const QramGeometry &g, const ClassicalData &data) {
    data.check(g);
    using detail::push;
    CircuitIR c(g);
    const uint32_t L = g.layers();

    push(c, GateKind::SWAP, Phase::AddressLoading, {g.address(1), g.control(1)}, 1);
    for (uint32_t l = 2; l <= L; l++) {
        push(c, GateKind::SWAP, Phase::AddressLoading, {g.address(l), g.incident(1)}, 1);
        for (uint32_t j = 1; j < l; j++) detail::route_layer(c, GateKind::RoutingDown, Phase::AddressLoading, j);
        for (uint32_t k = g.first_node_of_layer(l); k <= g.last_node_of_layer(l); k++) {
            push(c, GateKind::SWAP, Phase::AddressLoading, {g.incident(k), g.control(k)}, k);
        }
    }
    size_t loading_end = c.gates.size();

    push(c, GateKind::H, Phase::DataLoading, {g.incident(1)}, 1);
    for (uint32_t j = 1; j <= L; j++) detail::route_layer(c, GateKind::RoutingDown, Phase::DataLoading, j);

    for (uint32_t i = 0; i < g.memory_size(); i++) {
        if (!data.bits[i]) continue;
        uint32_t node = CircuitIR::node_of(g, g.leaf(i));
        push(c, GateKind::H, Phase::DataWriting, {g.leaf(i)}, node);
        push(c, GateKind::X, Phase::DataWriting, {g.leaf(i)}, node);
        push(c, GateKind::H, Phase::DataWriting, {g.leaf(i)}, node);
    }

    for (uint32_t j = L; j >= 1; j--) detail::route_layer(c, GateKind::RoutingUp, Phase::DataRetrieval, j);
    push(c, GateKind::SWAP, Phase::DataRetrieval, {g.incident(1), g.data()}, 1);
    push(c, GateKind::H, Phase::DataRetrieval, {g.data()}, 1);

    for (size_t i = loading_end; i-- > 0;) {
        GateApp app = c.gates[i];
        app.phase = Phase::AddressRetrieval;
        c.gates.push_back(app);
    }
    return c;
}

}  // namespace qram
