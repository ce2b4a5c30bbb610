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

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qram {

using Complex = std::complex<double>;
using Qubit = uint32_t;

enum class Role : uint8_t { Address, Data, Control, Incident, Leaf };

struct QubitRole {
    Role role;
    /// 1-based for Address (A1..AL), heap node index for Control/Incident, leaf index for Leaf, 0 for Data.
    uint32_t index;

    bool operator==(const QubitRole &) const = default;
};

/// Binary bucket-brigade tree with L layers.
///
/// Nodes use heap order: node k in [1, 2^L - 1] has children 2k and 2k+1 and sits on
/// layer floor(log2 k) + 1. Qubits are laid out as
///   A1..AL | D | C1..C(2^L-1) | I1..I(2^L-1) | F0..F(2^L-1).
/// The outputs of a node on layer L are the leaf qubits F(2k - 2^L) and F(2k + 1 - 2^L).
class QramGeometry {
   public:
    explicit QramGeometry(uint32_t layers) : layers_(layers) {
        if (layers == 0 || layers > 20) {
            throw std::invalid_argument("QramGeometry: layers must be in [1, 20], got " + std::to_string(layers));
        }
    }

    uint32_t layers() const { return layers_; }
    uint64_t memory_size() const { return uint64_t{1} << layers_; }
    uint32_t node_count() const { return (uint32_t{1} << layers_) - 1; }
    uint32_t qubit_count() const { return layers_ + 1 + 2 * node_count() + (uint32_t{1} << layers_); }

    Qubit address(uint32_t bit) const {
        check_range(bit, 1, layers_, "address bit");
        return bit - 1;
    }
    Qubit data() const { return layers_; }
    Qubit control(uint32_t node) const {
        check_node(node);
        return layers_ + 1 + (node - 1);
    }
    Qubit incident(uint32_t node) const {
        check_node(node);
        return layers_ + 1 + node_count() + (node - 1);
    }
    Qubit leaf(uint32_t i) const {
        if (i >= memory_size()) {
            throw std::out_of_range("leaf index " + std::to_string(i) + " out of range");
        }
        return layers_ + 1 + 2 * node_count() + i;
    }

    static uint32_t layer_of(uint32_t node) {
        uint32_t layer = 0;
        while (node) {
            node >>= 1;
            layer++;
        }
        return layer;
    }
    uint32_t first_node_of_layer(uint32_t layer) const {
        check_range(layer, 1, layers_, "layer");
        return uint32_t{1} << (layer - 1);
    }
    uint32_t last_node_of_layer(uint32_t layer) const { return 2 * first_node_of_layer(layer) - 1; }

    Qubit left_output(uint32_t node) const { return child_output(node, 0); }
    Qubit right_output(uint32_t node) const { return child_output(node, 1); }
    Qubit child_output(uint32_t node, uint32_t side) const {
        check_node(node);
        uint32_t child = 2 * node + side;
        if (layer_of(node) == layers_) {
            return leaf(child - (uint32_t{1} << layers_));
        }
        return incident(child);
    }

    /// Node on `layer` traversed when routing to leaf `leaf_index`. Layer L + 1 yields the
    /// leaf pseudo-node 2^L + leaf_index.
    uint32_t node_on_path(uint64_t leaf_index, uint32_t layer) const {
        check_range(layer, 1, layers_ + 1, "layer");
        return static_cast<uint32_t>((memory_size() + leaf_index) >> (layers_ - layer + 1));
    }

    bool is_router(Qubit q) const {
        auto r = role_of(q).role;
        return r == Role::Control || r == Role::Incident;
    }

    QubitRole role_of(Qubit q) const {
        if (q < layers_) return {Role::Address, q + 1};
        if (q == layers_) return {Role::Data, 0};
        uint32_t off = q - layers_ - 1;
        if (off < node_count()) return {Role::Control, off + 1};
        off -= node_count();
        if (off < node_count()) return {Role::Incident, off + 1};
        off -= node_count();
        if (off < memory_size()) return {Role::Leaf, off};
        throw std::out_of_range("qubit " + std::to_string(q) + " out of range");
    }

    std::string name(Qubit q) const {
        auto r = role_of(q);
        switch (r.role) {
            case Role::Address:
                return "A" + std::to_string(r.index);
            case Role::Data:
                return "D";
            case Role::Control:
                return "C" + std::to_string(r.index);
            case Role::Incident:
                return "I" + std::to_string(r.index);
            case Role::Leaf:
                return "F" + std::to_string(r.index);
        }
        return "?";
    }

    Qubit parse_name(std::string_view s) const {
        if (s == "D") return data();
        if (s.size() < 2) throw std::invalid_argument("bad qubit name '" + std::string(s) + "'");
        uint32_t n = 0;
        for (char c : s.substr(1)) {
            if (c < '0' || c > '9') throw std::invalid_argument("bad qubit name '" + std::string(s) + "'");
            n = n * 10 + static_cast<uint32_t>(c - '0');
        }
        switch (s[0]) {
            case 'A':
                return address(n);
            case 'C':
                return control(n);
            case 'I':
                return incident(n);
            case 'F':
                return leaf(n);
            default:
                throw std::invalid_argument("bad qubit name '" + std::string(s) + "'");
        }
    }

    bool operator==(const QramGeometry &) const = default;

   private:
    static void check_range(uint32_t v, uint32_t lo, uint32_t hi, const char *what) {
        if (v < lo || v > hi) {
            throw std::out_of_range(std::string(what) + " " + std::to_string(v) + " out of range");
        }
    }
    void check_node(uint32_t node) const { check_range(node, 1, node_count(), "node"); }

    uint32_t layers_;
};

/// Classical memory contents; bits[i] is the value stored at big-endian address i.
struct ClassicalData {
    std::vector<uint8_t> bits;

    static ClassicalData from_string(std::string_view s) {
        ClassicalData d;
        for (char c : s) {
            if (c != '0' && c != '1') {
                throw std::invalid_argument("classical data must be a 0/1 string, got '" + std::string(s) + "'");
            }
            d.bits.push_back(static_cast<uint8_t>(c - '0'));
        }
        return d;
    }
    static ClassicalData filled(uint64_t n, uint8_t v) { return ClassicalData{std::vector<uint8_t>(n, v)}; }

    std::string str() const {
        std::string s;
        for (auto b : bits) s.push_back(static_cast<char>('0' + b));
        return s;
    }

    void check(const QramGeometry &g) const {
        if (bits.size() != g.memory_size()) {
            throw std::invalid_argument(
                "classical data has " + std::to_string(bits.size()) + " bits but memory size is " +
                std::to_string(g.memory_size()));
        }
        for (auto b : bits) {
            if (b > 1) throw std::invalid_argument("classical data entries must be 0 or 1");
        }
    }
};

struct AddressComponent {
    Complex amplitude;
    uint64_t index;  ///< big-endian value of the address bitstring
};

/// Sum_i alpha_i |i>_A over distinct computational basis addresses.
struct AddressState {
    uint32_t layers = 0;
    std::vector<AddressComponent> components;

    static AddressState basis(uint32_t layers, uint64_t index) { return AddressState{layers, {{1.0, index}}}; }

    static AddressState uniform(uint32_t layers) {
        AddressState a{layers, {}};
        uint64_t n = uint64_t{1} << layers;
        double amp = 1.0 / std::sqrt(static_cast<double>(n));
        for (uint64_t i = 0; i < n; i++) a.components.push_back({amp, i});
        return a;
    }

    /// Equal superposition over the listed addresses.
    static AddressState equal(uint32_t layers, const std::vector<uint64_t> &indices) {
        AddressState a{layers, {}};
        double amp = 1.0 / std::sqrt(static_cast<double>(indices.size()));
        for (auto i : indices) a.components.push_back({amp, i});
        a.validate();
        return a;
    }

    /// Product state given per-bit characters '0', '1', '+', '-' (bit 1 first).
    static AddressState product(std::string_view pattern) {
        AddressState a{static_cast<uint32_t>(pattern.size()), {{1.0, 0}}};
        const double s = 1.0 / std::sqrt(2.0);
        for (char c : pattern) {
            std::vector<AddressComponent> next;
            for (const auto &comp : a.components) {
                uint64_t base = comp.index << 1;
                switch (c) {
                    case '0':
                        next.push_back({comp.amplitude, base});
                        break;
                    case '1':
                        next.push_back({comp.amplitude, base | 1});
                        break;
                    case '+':
                        next.push_back({comp.amplitude * s, base});
                        next.push_back({comp.amplitude * s, base | 1});
                        break;
                    case '-':
                        next.push_back({comp.amplitude * s, base});
                        next.push_back({-comp.amplitude * s, base | 1});
                        break;
                    default:
                        throw std::invalid_argument("address pattern characters must be 0, 1, + or -");
                }
            }
            a.components = std::move(next);
        }
        return a;
    }

    uint32_t bit(size_t component, uint32_t address_bit) const {
        return static_cast<uint32_t>((components[component].index >> (layers - address_bit)) & 1);
    }

    void validate() const {
        double norm = 0;
        uint64_t n = uint64_t{1} << layers;
        if (components.empty() || components.size() > n) {
            throw std::invalid_argument("address state must have between 1 and 2^L components");
        }
        std::vector<bool> seen(n, false);
        for (const auto &c : components) {
            if (c.index >= n) throw std::invalid_argument("address index out of range");
            if (seen[c.index]) throw std::invalid_argument("duplicate address component");
            seen[c.index] = true;
            norm += std::norm(c.amplitude);
        }
        if (std::abs(norm - 1.0) > 1e-12) {
            throw std::invalid_argument("address state is not normalized (norm^2 = " + std::to_string(norm) + ")");
        }
    }
};

}  // namespace qram
