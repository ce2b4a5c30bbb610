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

#include <Eigen/Eigenvalues>
#include <random>
#include <unordered_map>

#include "qram/ecs.hpp"

namespace qram {

/// State vector over lazily activated qubits. Inactive qubits are |0>.
///
/// Active qubit in slot s is bit s of the amplitude index.
class DenseState {
   public:
    explicit DenseState(uint32_t qubit_count, uint32_t max_active = 26)
        : slot_(qubit_count, -1), max_active_(max_active), amps_(1, 1.0) {}

    uint32_t qubit_count() const { return static_cast<uint32_t>(slot_.size()); }
    uint32_t active_count() const { return static_cast<uint32_t>(active_.size()); }
    bool is_active(Qubit q) const { return slot_.at(q) >= 0; }
    const std::vector<Complex> &amplitudes() const { return amps_; }
    std::vector<Complex> &mutable_amplitudes() { return amps_; }
    const std::vector<Qubit> &active() const { return active_; }

    void activate(Qubit q) {
        if (is_active(q)) return;
        if (active_.size() >= compact_threshold_) compact();
        activate_no_compact(q);
    }

    /// Applies `u` to `qs` (qs[0] is the most significant bit of u's basis index).
    void apply(const Matrix &u, const std::vector<Qubit> &qs) {
        const size_t k = qs.size();
        if (u.rows() != (Eigen::Index{1} << k)) throw std::invalid_argument("dense apply: matrix/operand mismatch");
        size_t fresh = 0;
        for (auto q : qs) fresh += is_active(q) ? 0 : 1;
        // Compact before activating so operand slots stay valid below.
        if (fresh && active_.size() + fresh > compact_threshold_) compact();
        for (auto q : qs) activate_no_compact(q);
        std::vector<uint64_t> bit(k);
        uint64_t op_mask = 0;
        for (size_t j = 0; j < k; j++) {
            bit[j] = uint64_t{1} << slot_[qs[j]];
            op_mask |= bit[j];
        }
        const size_t d = size_t{1} << k;
        std::vector<uint64_t> offset(d, 0);
        for (size_t s = 0; s < d; s++) {
            for (size_t j = 0; j < k; j++) {
                if ((s >> (k - 1 - j)) & 1) offset[s] |= bit[j];
            }
        }
        // Sparse columns.
        std::vector<std::vector<std::pair<size_t, Complex>>> cols(d);
        for (size_t c = 0; c < d; c++) {
            for (size_t r = 0; r < d; r++) {
                Complex v = u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
                if (v != Complex(0)) cols[c].push_back({r, v});
            }
        }
        std::vector<Complex> in(d), out(d);
        for (uint64_t base = 0; base < amps_.size(); base++) {
            if (base & op_mask) continue;
            bool any = false;
            for (size_t s = 0; s < d; s++) {
                in[s] = amps_[base | offset[s]];
                any |= in[s] != Complex(0);
            }
            if (!any) continue;
            std::fill(out.begin(), out.end(), Complex(0));
            for (size_t c = 0; c < d; c++) {
                if (in[c] == Complex(0)) continue;
                for (auto [r, v] : cols[c]) out[r] += v * in[c];
            }
            for (size_t s = 0; s < d; s++) amps_[base | offset[s]] = out[s];
        }
    }

    /// SWAP is a relabelling of slots.
    void swap(Qubit a, Qubit b) {
        std::swap(slot_[a], slot_[b]);
        if (slot_[a] >= 0) active_[static_cast<size_t>(slot_[a])] = a;
        if (slot_[b] >= 0) active_[static_cast<size_t>(slot_[b])] = b;
    }

    /// Probability that `q` reads `value`.
    double probability(Qubit q, int value) const {
        if (!is_active(q)) return value == 0 ? total() : 0.0;
        uint64_t b = uint64_t{1} << slot_[q];
        double p = 0;
        for (uint64_t i = 0; i < amps_.size(); i++) {
            if (((i & b) != 0) == (value != 0)) p += std::norm(amps_[i]);
        }
        return p;
    }

    /// Projects `q` onto |value> without renormalizing; returns the remaining squared norm.
    double project(Qubit q, int value) {
        if (!is_active(q)) {
            if (value != 0) std::fill(amps_.begin(), amps_.end(), Complex(0));
            return total();
        }
        uint64_t b = uint64_t{1} << slot_[q];
        for (uint64_t i = 0; i < amps_.size(); i++) {
            if (((i & b) != 0) != (value != 0)) amps_[i] = 0.0;
        }
        return total();
    }

    double total() const {
        double n = 0;
        for (auto &a : amps_) n += std::norm(a);
        return n;
    }

    void normalize() {
        double n = std::sqrt(total());
        if (n == 0) throw std::domain_error("dense engine: cannot normalize a zero state");
        for (auto &a : amps_) a /= n;
    }

    /// Drops active qubits whose |1> population is below `tol` (mass below tol is discarded).
    void compact(double tol = 1e-24) {
        for (size_t s = active_.size(); s-- > 0;) {
            uint64_t b = uint64_t{1} << s;
            double p = 0;
            for (uint64_t i = 0; i < amps_.size(); i++) {
                if (i & b) p += std::norm(amps_[i]);
            }
            if (p >= tol) continue;
            remove_slot(s);
        }
    }

    /// Amplitude of a full logical basis state (qubit q = bit q).
    Complex amplitude(uint64_t logical) const {
        uint64_t idx = 0;
        for (Qubit q = 0; q < qubit_count(); q++) {
            if (!((logical >> q) & 1)) continue;
            if (!is_active(q)) return 0.0;
            idx |= uint64_t{1} << slot_[q];
        }
        return amps_[idx];
    }

    /// Full logical vector with qubit q as bit q.
    Eigen::VectorXcd to_vector() const {
        if (qubit_count() > 26) throw std::invalid_argument("to_vector: too many qubits");
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index{1} << qubit_count());
        for (uint64_t i = 0; i < amps_.size(); i++) {
            uint64_t logical = 0;
            for (size_t s = 0; s < active_.size(); s++) {
                if ((i >> s) & 1) logical |= uint64_t{1} << active_[s];
            }
            v[static_cast<Eigen::Index>(logical)] = amps_[i];
        }
        return v;
    }

    int slot(Qubit q) const { return slot_.at(q); }

    /// Activating beyond this many qubits triggers a compaction first.
    void set_compact_threshold(size_t n) { compact_threshold_ = n; }

   private:
    void activate_no_compact(Qubit q) {
        if (is_active(q)) return;
        if (active_.size() >= max_active_) {
            throw std::length_error("dense engine: more than " + std::to_string(max_active_) + " active qubits");
        }
        slot_[q] = static_cast<int>(active_.size());
        active_.push_back(q);
        amps_.resize(amps_.size() * 2, 0.0);
    }

    void remove_slot(size_t s) {
        const uint64_t b = uint64_t{1} << s;
        const uint64_t low = b - 1;
        std::vector<Complex> next(amps_.size() / 2);
        for (uint64_t j = 0; j < next.size(); j++) next[j] = amps_[(j & low) | ((j & ~low) << 1)];
        amps_.swap(next);
        slot_[active_[s]] = -1;
        active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(s));
        for (size_t t = s; t < active_.size(); t++) slot_[active_[t]] = static_cast<int>(t);
    }

    std::vector<int> slot_;
    std::vector<Qubit> active_;
    uint32_t max_active_;
    size_t compact_threshold_ = 14;
    std::vector<Complex> amps_;
};

inline Matrix pauli_matrix(Pauli p) {
    switch (p) {
        case Pauli::X: return single_qubit_matrix("X");
        case Pauli::Y: return single_qubit_matrix("Y");
        case Pauli::Z: return single_qubit_matrix("Z");
        default: return Matrix::Identity(2, 2);
    }
}

/// Initial state sum_i alpha_i |i>_A, everything else |0>.
inline DenseState dense_init(const QramGeometry &g, const AddressState &address, uint32_t max_active = 26) {
    address.validate();
    DenseState s(g.qubit_count(), max_active);
    for (uint32_t b = 1; b <= g.layers(); b++) s.activate(g.address(b));
    auto &mut = s.mutable_amplitudes();
    std::fill(mut.begin(), mut.end(), Complex(0));
    for (const auto &c : address.components) {
        uint64_t idx = 0;
        for (uint32_t b = 1; b <= g.layers(); b++) {
            if ((c.index >> (g.layers() - b)) & 1) idx |= uint64_t{1} << s.slot(g.address(b));
        }
        mut[idx] = c.amplitude;
    }
    return s;
}

inline void dense_apply_gate(DenseState &s, const GateApp &app, const RoutingChoice &routing = {}, bool inverse = false) {
    const auto &q = app.qubits;
    switch (app.kind) {
        case GateKind::H: s.apply(single_qubit_matrix("H"), {q[0]}); break;
        case GateKind::X:
        case GateKind::PauliX: s.apply(pauli_matrix(Pauli::X), {q[0]}); break;
        case GateKind::PauliY: s.apply(pauli_matrix(Pauli::Y), {q[0]}); break;
        case GateKind::PauliZ: s.apply(pauli_matrix(Pauli::Z), {q[0]}); break;
        case GateKind::SWAP: s.swap(q[0], q[1]); break;
        case GateKind::CZ: s.apply(cz_unitary().matrix, {q[0], q[1]}); break;
        case GateKind::RoutingDown:
        case GateKind::RoutingUp: {
            auto kind = app.kind == GateKind::RoutingDown ? routing.down : routing.up;
            static const std::array<Matrix, 3> routers = {router_unitary(RoutingUnitaryKind::UPrime).matrix,
                                                          router_unitary(RoutingUnitaryKind::UDoublePrime).matrix,
                                                          router_unitary(RoutingUnitaryKind::CSWAP).matrix};
            const Matrix &u = routers[static_cast<size_t>(kind)];
            s.apply(inverse ? Matrix(u.adjoint()) : u, {q[0], q[1], q[2], q[3]});
            break;
        }
    }
}

/// Exact state-vector evolution with the same gate and error semantics as run_circuit.
inline DenseState dense_run(const CircuitIR &circuit, const AddressState &address, const ErrorConfiguration &errors = {},
                            const RoutingChoice &routing = {}, uint32_t max_active = 26) {
    DenseState s = dense_init(circuit.geometry, address, max_active);
    size_t e = 0;
    auto flush = [&](size_t position) {
        while (e < errors.events.size() && errors.events[e].position == position) {
            s.apply(pauli_matrix(errors.events[e].pauli), {errors.events[e].qubit});
            e++;
        }
    };
    for (size_t i = 0; i < circuit.gates.size(); i++) {
        flush(i);
        dense_apply_gate(s, circuit.gates[i], routing, circuit.gates[i].phase == Phase::AddressRetrieval);
    }
    flush(circuit.gates.size());
    if (e != errors.events.size()) throw std::invalid_argument("error events unsorted or past the end of the circuit");
    return s;
}

/// Reduced density matrix on `subset` (subset[0] = most significant). Inactive qubits are |0>.
inline Matrix reduced_density(const DenseState &s, const std::vector<Qubit> &subset) {
    if (subset.size() > 10) throw std::invalid_argument("reduced_density: subset larger than 10 qubits");
    const size_t k = subset.size();
    const size_t d = size_t{1} << k;
    Matrix rho = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    uint64_t sub_mask = 0;
    std::vector<int> bit(k, -1);
    for (size_t j = 0; j < k; j++) {
        if (subset[j] >= s.qubit_count()) throw std::out_of_range("reduced_density: qubit out of range");
        bit[j] = s.slot(subset[j]);
        if (bit[j] >= 0) sub_mask |= uint64_t{1} << bit[j];
    }
    // Group amplitudes by the complement bits.
    std::unordered_map<uint64_t, std::vector<Complex>> groups;
    const auto &a = s.amplitudes();
    for (uint64_t i = 0; i < a.size(); i++) {
        if (a[i] == Complex(0)) continue;
        size_t local = 0;
        for (size_t j = 0; j < k; j++) {
            if (bit[j] >= 0 && ((i >> bit[j]) & 1)) local |= size_t{1} << (k - 1 - j);
        }
        auto &v = groups[i & ~sub_mask];
        if (v.empty()) v.assign(d, 0.0);
        v[local] = a[i];
    }
    for (auto &[rest, v] : groups) {
        Eigen::Map<Eigen::VectorXcd> col(v.data(), static_cast<Eigen::Index>(d));
        rho += col * col.adjoint();
    }
    Complex tr = rho.trace();
    if (std::abs(tr) == 0) throw std::domain_error("reduced_density: zero state");
    return rho / tr;
}

/// Von Neumann entropy in bits.
inline double entanglement_entropy(const Matrix &rho) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("entropy: density matrix must be square");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9) throw std::invalid_argument("entropy: matrix not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    double s = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); i++) {
        double l = es.eigenvalues()[i];
        if (l < -1e-9) throw std::invalid_argument("entropy: matrix not positive semidefinite");
        if (l > 0) s -= l * std::log2(l);
    }
    return s;
}

/// <psi_ideal| Tr_R rho |psi_ideal> on a dense state.
inline double dense_query_fidelity(
    const DenseState &s, const QramGeometry &g, const AddressState &address, const ClassicalData &data) {
    data.check(g);
    const uint32_t L = g.layers();
    std::vector<int> abit(L);
    uint64_t ad_mask = 0;
    for (uint32_t b = 1; b <= L; b++) {
        abit[b - 1] = s.slot(g.address(b));
        if (abit[b - 1] >= 0) ad_mask |= uint64_t{1} << abit[b - 1];
    }
    int dbit = s.slot(g.data());
    if (dbit >= 0) ad_mask |= uint64_t{1} << dbit;
    std::unordered_map<uint64_t, Complex> alpha;
    for (const auto &c : address.components) alpha[c.index] = c.amplitude;
    std::unordered_map<uint64_t, Complex> acc;
    const auto &a = s.amplitudes();
    for (uint64_t i = 0; i < a.size(); i++) {
        if (a[i] == Complex(0)) continue;
        uint64_t idx = 0;
        for (uint32_t b = 0; b < L; b++) idx = (idx << 1) | (abit[b] >= 0 ? ((i >> abit[b]) & 1) : 0);
        uint64_t dv = dbit >= 0 ? ((i >> dbit) & 1) : 0;
        auto it = alpha.find(idx);
        if (it == alpha.end() || data.bits[idx] != dv) continue;
        acc[i & ~ad_mask] += std::conj(it->second) * a[i];
    }
    double f = 0;
    for (auto &[r, v] : acc) f += std::norm(v);
    return f / s.total();
}

enum class TeleportMode : uint8_t { PostSelect, Feedforward };

/// Moves the state of `source` to `destination` through a Bell pair on (ancilla, destination).
/// Returns the keep probability (1 for feedforward). Source and ancilla end in |0>.
inline double teleport_retrieval(DenseState &s, Qubit source, Qubit ancilla, Qubit destination, TeleportMode mode,
                                 std::mt19937_64 *rng = nullptr) {
    if (s.probability(ancilla, 1) > 1e-12 || s.probability(destination, 1) > 1e-12) {
        throw std::invalid_argument("teleport: ancilla and destination must start in |0>");
    }
    const Matrix h = single_qubit_matrix("H");
    Matrix cnot(4, 4);
    cnot << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0;
    s.apply(h, {ancilla});
    s.apply(cnot, {ancilla, destination});
    s.apply(cnot, {source, ancilla});
    s.apply(h, {source});
    const double before = s.total();
    if (mode == TeleportMode::PostSelect) {
        s.project(source, 0);
        double keep = s.project(ancilla, 0) / before;
        if (keep > 0) s.normalize();
        s.compact();
        return keep;
    }
    if (!rng) throw std::invalid_argument("teleport: feedforward needs a random generator");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int m1 = u(*rng) < s.probability(source, 1) / before ? 1 : 0;
    s.project(source, m1);
    s.normalize();
    int m2 = u(*rng) < s.probability(ancilla, 1) ? 1 : 0;
    s.project(ancilla, m2);
    s.normalize();
    if (m2) s.apply(single_qubit_matrix("X"), {destination});
    if (m1) s.apply(single_qubit_matrix("Z"), {destination});
    // Classical reset of the measured qubits.
    if (m1) s.apply(single_qubit_matrix("X"), {source});
    if (m2) s.apply(single_qubit_matrix("X"), {ancilla});
    s.compact();
    return 1.0;
}

}  // namespace qram
