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

#include <Eigen/Dense>
#include <array>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qram/errors.hpp"
#include "qram/gates.hpp"

namespace qram {

/// Single-qubit state of one component. Bit 1 = Hadamard basis, bit 0 = value.
enum class Tag : uint8_t { Zero = 0, One = 1, Plus = 2, Minus = 3 };

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

inline char tag_char(Tag t) { return "01+-"[static_cast<int>(t)]; }
inline bool is_computational(Tag t) { return (static_cast<uint8_t>(t) & 2) == 0; }
inline uint8_t tag_value(Tag t) { return static_cast<uint8_t>(t) & 1; }

/// <bra|ket> for the four tag states; always real.
inline double tag_overlap(Tag bra, Tag ket) {
    if (bra == ket) return 1.0;
    uint8_t a = static_cast<uint8_t>(bra), b = static_cast<uint8_t>(ket);
    if ((a & 2) == (b & 2)) return 0.0;
    return ((a & 1) && (b & 1)) ? -kInvSqrt2 : kInvSqrt2;
}

/// Which half-router unitary each routing direction uses.
struct RoutingChoice {
    RoutingUnitaryKind down = RoutingUnitaryKind::UPrime;
    RoutingUnitaryKind up = RoutingUnitaryKind::UPrime;
};

class CapacityError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Sparse superposition of product states over {|0>, |1>, |+>, |->}.
struct EcsState {
    uint32_t qubit_count = 0;
    size_t cap = 0;
    std::vector<Complex> amps;
    /// Row-major: component k occupies tags[k * qubit_count, (k + 1) * qubit_count).
    std::vector<Tag> tags;

    size_t size() const { return amps.size(); }
    Tag *row(size_t k) { return tags.data() + k * qubit_count; }
    const Tag *row(size_t k) const { return tags.data() + k * qubit_count; }
    Tag tag(size_t k, Qubit q) const { return tags[k * qubit_count + q]; }

    size_t push(Complex amp, const Tag *src) {
        amps.push_back(amp);
        tags.insert(tags.end(), src, src + qubit_count);
        return amps.size() - 1;
    }

    void erase_if(const std::vector<bool> &drop) {
        size_t w = 0;
        for (size_t k = 0; k < size(); k++) {
            if (drop[k]) continue;
            if (w != k) {
                amps[w] = amps[k];
                std::copy(row(k), row(k) + qubit_count, row(w));
            }
            w++;
        }
        amps.resize(w);
        tags.resize(w * qubit_count);
    }

    std::string str() const {
        std::ostringstream out;
        for (size_t k = 0; k < size(); k++) {
            out << '(' << amps[k].real() << (amps[k].imag() < 0 ? "" : "+") << amps[k].imag() << "i) ";
            for (uint32_t q = 0; q < qubit_count; q++) out << tag_char(tag(k, q));
            out << '\n';
        }
        return out.str();
    }
};

/// Merges components with identical tags and drops those with vanishing amplitude.
inline void canonicalize(EcsState &s, double drop_below = 1e-15) {
    std::unordered_map<std::string, size_t> seen;
    std::vector<bool> drop(s.size(), false);
    for (size_t k = 0; k < s.size(); k++) {
        std::string key(reinterpret_cast<const char *>(s.row(k)), s.qubit_count);
        auto [it, fresh] = seen.emplace(std::move(key), k);
        if (!fresh) {
            s.amps[it->second] += s.amps[k];
            drop[k] = true;
        }
    }
    for (size_t k = 0; k < s.size(); k++) {
        if (std::abs(s.amps[k]) < drop_below) drop[k] = true;
    }
    s.erase_if(drop);
}

/// One component per address component; everything else |0>. The component cap defaults to
/// 4 N_A.
inline EcsState init_state(const QramGeometry &g, const AddressState &address, size_t cap_factor = 4) {
    address.validate();
    if (address.layers != g.layers()) throw std::invalid_argument("address width does not match layers");
    EcsState s;
    s.qubit_count = g.qubit_count();
    s.cap = std::max<size_t>(1, cap_factor * address.components.size());
    std::vector<Tag> r(s.qubit_count, Tag::Zero);
    for (size_t c = 0; c < address.components.size(); c++) {
        for (uint32_t b = 1; b <= g.layers(); b++) r[g.address(b)] = address.bit(c, b) ? Tag::One : Tag::Zero;
        s.push(address.components[c].amplitude, r.data());
    }
    return s;
}

namespace detail {

/// Signed permutation on n <= 4 computational operands; operand 0 is the most significant bit.
struct PermTable {
    uint32_t arity = 0;
    std::array<uint8_t, 16> image{};
    std::array<int8_t, 16> sign{};

    PermTable inverse() const {
        PermTable t{arity, {}, {}};
        for (uint32_t j = 0; j < (1u << arity); j++) {
            t.image[image[j]] = static_cast<uint8_t>(j);
            t.sign[image[j]] = sign[j];
        }
        return t;
    }
};

/// Column lookup in an integer signed-permutation matrix.
inline std::pair<uint32_t, int8_t> column_image(const Matrix &m, uint32_t col) {
    for (Eigen::Index r = 0; r < m.rows(); r++) {
        if (std::abs(m(r, col)) > 0.5) return {static_cast<uint32_t>(r), m(r, col).real() > 0 ? int8_t{1} : int8_t{-1}};
    }
    throw std::logic_error("matrix is not a signed permutation");
}

/// Router table: left half with the control negated, then the right half.
inline PermTable router_table(RoutingUnitaryKind kind) {
    const Matrix half = routing_unitary(kind).matrix;
    PermTable t{4, {}, {}};
    for (uint32_t in = 0; in < 16; in++) {
        uint32_t c = (in >> 3) & 1, i = (in >> 2) & 1, l = (in >> 1) & 1, r = in & 1;
        int8_t sign = 1;
        auto [img1, s1] = column_image(half, ((c ^ 1) << 2) | (i << 1) | l);
        c = ((img1 >> 2) & 1) ^ 1;
        i = (img1 >> 1) & 1;
        l = img1 & 1;
        sign = static_cast<int8_t>(sign * s1);
        auto [img2, s2] = column_image(half, (c << 2) | (i << 1) | r);
        c = (img2 >> 2) & 1;
        i = (img2 >> 1) & 1;
        r = img2 & 1;
        sign = static_cast<int8_t>(sign * s2);
        t.image[in] = static_cast<uint8_t>((c << 3) | (i << 2) | (l << 1) | r);
        t.sign[in] = sign;
    }
    return t;
}

inline const PermTable &cached_router_table(RoutingUnitaryKind kind, bool inverse) {
    static const std::array<PermTable, 6> tables = [] {
        std::array<PermTable, 6> out{};
        for (int k = 0; k < 3; k++) {
            out[2 * k] = router_table(static_cast<RoutingUnitaryKind>(k));
            out[2 * k + 1] = out[2 * k].inverse();
        }
        return out;
    }();
    return tables[2 * static_cast<size_t>(kind) + (inverse ? 1 : 0)];
}

inline const PermTable &cz_table() {
    static const PermTable t{2, {0, 1, 2, 3}, {1, 1, 1, -1}};
    return t;
}

struct Sub {
    Complex amp;
    std::array<Tag, 4> t;
};

/// Rejoins pairs of outputs that differ only in one operand, (a|0> +- a|1>) -> sqrt2 a|+->.
inline void fuse(std::vector<Sub> &subs, uint32_t arity) {
    bool changed = true;
    while (changed && subs.size() > 1) {
        changed = false;
        for (uint32_t p = 0; p < arity && !changed; p++) {
            for (size_t x = 0; x < subs.size() && !changed; x++) {
                if (subs[x].t[p] != Tag::Zero) continue;
                for (size_t y = 0; y < subs.size(); y++) {
                    if (y == x || subs[y].t[p] != Tag::One) continue;
                    bool rest_equal = true;
                    for (uint32_t q = 0; q < arity; q++) {
                        if (q != p && subs[x].t[q] != subs[y].t[q]) rest_equal = false;
                    }
                    if (!rest_equal) continue;
                    Complex a0 = subs[x].amp, a1 = subs[y].amp;
                    double tol = 1e-12 * std::abs(a0);
                    Tag fused;
                    if (std::abs(a1 - a0) <= tol) {
                        fused = Tag::Plus;
                    } else if (std::abs(a1 + a0) <= tol) {
                        fused = Tag::Minus;
                    } else {
                        continue;
                    }
                    subs[x].t[p] = fused;
                    subs[x].amp = a0 * std::sqrt(2.0);
                    subs.erase(subs.begin() + static_cast<std::ptrdiff_t>(y));
                    changed = true;
                    break;
                }
            }
        }
    }
}

inline void check_capacity(EcsState &s) {
    if (s.size() <= s.cap) return;
    canonicalize(s);
    if (s.size() > s.cap) {
        throw CapacityError("ECS component cap exceeded: " + std::to_string(s.size()) + " > " + std::to_string(s.cap));
    }
}

/// Applies a signed permutation to `ops` of every component, splitting non-computational
/// operands into computational branches and fusing the results back where possible.
inline void apply_table(EcsState &s, const Qubit *ops, const PermTable &t) {
    const uint32_t n = t.arity;
    const size_t original = s.size();
    std::vector<Sub> subs;
    for (size_t k = 0; k < original; k++) {
        Tag *r = s.row(k);
        uint32_t split_mask = 0, pattern = 0;
        for (uint32_t j = 0; j < n; j++) {
            Tag tg = r[ops[j]];
            if (!is_computational(tg)) split_mask |= 1u << (n - 1 - j);
            pattern |= static_cast<uint32_t>(tag_value(tg)) << (n - 1 - j);
        }
        if (!split_mask) {
            uint32_t img = t.image[pattern];
            for (uint32_t j = 0; j < n; j++) r[ops[j]] = ((img >> (n - 1 - j)) & 1) ? Tag::One : Tag::Zero;
            if (t.sign[pattern] < 0) s.amps[k] = -s.amps[k];
            continue;
        }
        // Enumerate computational branches of the split operands.
        subs.clear();
        const double scale = std::pow(kInvSqrt2, std::popcount(split_mask));
        const uint32_t fixed = pattern & ~split_mask;
        for (uint32_t sub = split_mask;; sub = (sub - 1) & split_mask) {
            uint32_t in = fixed | sub;
            double sgn = scale;
            for (uint32_t j = 0; j < n; j++) {
                uint32_t b = 1u << (n - 1 - j);
                if ((split_mask & b) && (sub & b) && r[ops[j]] == Tag::Minus) sgn = -sgn;
            }
            uint32_t img = t.image[in];
            Sub out{s.amps[k] * (sgn * t.sign[in]), {}};
            for (uint32_t j = 0; j < n; j++) out.t[j] = ((img >> (n - 1 - j)) & 1) ? Tag::One : Tag::Zero;
            subs.push_back(out);
            if (sub == 0) break;
        }
        fuse(subs, n);
        for (size_t m = 0; m < subs.size(); m++) {
            size_t dst = k;
            if (m > 0) dst = s.push(0.0, s.row(k));
            Tag *d = s.row(dst);
            for (uint32_t j = 0; j < n; j++) d[ops[j]] = subs[m].t[j];
            s.amps[dst] = subs[m].amp;
        }
    }
    check_capacity(s);
}

}  // namespace detail

/// Pauli action on one tag: new tag and phase.
inline std::pair<Tag, Complex> pauli_on_tag(Pauli p, Tag t) {
    const Complex i1(0, 1);
    switch (p) {
        case Pauli::I:
            return {t, 1.0};
        case Pauli::X:
            switch (t) {
                case Tag::Zero: return {Tag::One, 1.0};
                case Tag::One: return {Tag::Zero, 1.0};
                case Tag::Plus: return {Tag::Plus, 1.0};
                case Tag::Minus: return {Tag::Minus, -1.0};
            }
            break;
        case Pauli::Z:
            switch (t) {
                case Tag::Zero: return {Tag::Zero, 1.0};
                case Tag::One: return {Tag::One, -1.0};
                case Tag::Plus: return {Tag::Minus, 1.0};
                case Tag::Minus: return {Tag::Plus, 1.0};
            }
            break;
        case Pauli::Y:
            switch (t) {
                case Tag::Zero: return {Tag::One, i1};
                case Tag::One: return {Tag::Zero, -i1};
                case Tag::Plus: return {Tag::Minus, -i1};
                case Tag::Minus: return {Tag::Plus, i1};
            }
            break;
    }
    return {t, 1.0};
}

inline void apply_pauli(EcsState &s, Qubit q, Pauli p) {
    if (p == Pauli::I) return;
    for (size_t k = 0; k < s.size(); k++) {
        auto [t, ph] = pauli_on_tag(p, s.row(k)[q]);
        s.row(k)[q] = t;
        if (ph != Complex(1.0)) s.amps[k] *= ph;
    }
}

inline void apply_hadamard(EcsState &s, Qubit q) {
    for (size_t k = 0; k < s.size(); k++) {
        auto &t = s.row(k)[q];
        t = static_cast<Tag>(static_cast<uint8_t>(t) ^ 2);
    }
}

/// Applies one gate. `inverse` applies the adjoint (only differs for non-self-inverse routers).
inline void apply_gate(EcsState &s, const GateApp &app, const RoutingChoice &routing = {}, bool inverse = false) {
    const auto &q = app.qubits;
    for (uint32_t j = 0; j < app.arity(); j++) {
        if (q[j] >= s.qubit_count) throw std::invalid_argument("gate operand out of range");
    }
    switch (app.kind) {
        case GateKind::H:
            apply_hadamard(s, q[0]);
            break;
        case GateKind::X:
        case GateKind::PauliX:
            apply_pauli(s, q[0], Pauli::X);
            break;
        case GateKind::PauliY:
            apply_pauli(s, q[0], Pauli::Y);
            break;
        case GateKind::PauliZ:
            apply_pauli(s, q[0], Pauli::Z);
            break;
        case GateKind::SWAP:
            for (size_t k = 0; k < s.size(); k++) std::swap(s.row(k)[q[0]], s.row(k)[q[1]]);
            break;
        case GateKind::CZ:
            detail::apply_table(s, q.data(), detail::cz_table());
            break;
        case GateKind::RoutingDown:
            detail::apply_table(s, q.data(), detail::cached_router_table(routing.down, inverse));
            break;
        case GateKind::RoutingUp:
            detail::apply_table(s, q.data(), detail::cached_router_table(routing.up, inverse));
            break;
    }
}

/// Runs `circuit` with the sampled events of `errors`. Routers in AddressRetrieval are applied
/// as adjoints so the retrieval undoes loading for any routing choice.
inline void run_circuit(
    EcsState &s, const CircuitIR &circuit, const ErrorConfiguration &errors = {}, const RoutingChoice &routing = {}) {
    size_t e = 0;
    auto flush = [&](size_t position) {
        while (e < errors.events.size() && errors.events[e].position == position) {
            apply_pauli(s, errors.events[e].qubit, errors.events[e].pauli);
            e++;
        }
    };
    for (size_t i = 0; i < circuit.gates.size(); i++) {
        flush(i);
        const auto &app = circuit.gates[i];
        apply_gate(s, app, routing, app.phase == Phase::AddressRetrieval);
    }
    flush(circuit.gates.size());
    if (e != errors.events.size()) throw std::invalid_argument("error events unsorted or past the end of the circuit");
}

namespace detail {

/// Basis / value bit planes over a qubit range, for fast product-state overlaps.
struct Planes {
    size_t words = 0;
    std::vector<uint64_t> basis, value;

    Planes(const EcsState &s, Qubit first, Qubit last) {
        uint32_t n = last - first;
        words = (n + 63) / 64;
        basis.assign(s.size() * words, 0);
        value.assign(s.size() * words, 0);
        for (size_t k = 0; k < s.size(); k++) {
            const Tag *r = s.row(k);
            for (uint32_t j = 0; j < n; j++) {
                auto t = static_cast<uint8_t>(r[first + j]);
                if (t & 2) basis[k * words + j / 64] |= uint64_t{1} << (j % 64);
                if (t & 1) value[k * words + j / 64] |= uint64_t{1} << (j % 64);
            }
        }
    }

    /// <l|k>, real.
    double overlap(size_t l, size_t k) const {
        int mixed = 0, parity = 0;
        for (size_t w = 0; w < words; w++) {
            uint64_t bl = basis[l * words + w], bk = basis[k * words + w];
            uint64_t vl = value[l * words + w], vk = value[k * words + w];
            uint64_t mix = bl ^ bk;
            if (~mix & (vl ^ vk)) return 0.0;
            mixed += std::popcount(mix);
            parity += std::popcount(mix & vl & vk);
        }
        double v = mixed == 0 ? 1.0 : std::pow(kInvSqrt2, mixed);
        return (parity & 1) ? -v : v;
    }
};

/// sum_{k,l} w_k conj(w_l) <l|k> for weights w over the given planes.
inline double gram_sum(const Planes &p, const std::vector<Complex> &w) {
    std::vector<size_t> nz;
    for (size_t k = 0; k < w.size(); k++) {
        if (w[k] != Complex(0)) nz.push_back(k);
    }
    double total = 0;
    for (size_t a = 0; a < nz.size(); a++) {
        total += std::norm(w[nz[a]]);
        for (size_t b = a + 1; b < nz.size(); b++) {
            double o = p.overlap(nz[b], nz[a]);
            if (o != 0.0) total += 2.0 * o * (w[nz[a]] * std::conj(w[nz[b]])).real();
        }
    }
    return total;
}

}  // namespace detail

/// Squared norm, sum_{k,l} a_k conj(a_l) <l|k>.
inline double norm(const EcsState &s) {
    detail::Planes p(s, 0, s.qubit_count);
    return detail::gram_sum(p, s.amps);
}

/// <psi_ideal| Tr_R |state><state| |psi_ideal> with psi_ideal = sum_i alpha_i |i>_A |x_i>_D and R
/// all controls, incidents and leaves.
inline double query_fidelity(
    const EcsState &s, const QramGeometry &g, const AddressState &address, const ClassicalData &data) {
    data.check(g);
    const uint32_t L = g.layers();
    std::unordered_map<uint64_t, Complex> alpha;
    for (const auto &c : address.components) alpha[c.index] = c.amplitude;

    std::vector<Complex> w(s.size(), 0.0);
    for (size_t k = 0; k < s.size(); k++) {
        const Tag *r = s.row(k);
        bool computational = true;
        uint64_t idx = 0;
        for (uint32_t b = 1; b <= L; b++) {
            Tag t = r[g.address(b)];
            computational &= is_computational(t);
            idx = (idx << 1) | tag_value(t);
        }
        Complex proj = 0.0;
        if (computational) {
            auto it = alpha.find(idx);
            if (it != alpha.end()) proj = std::conj(it->second) * tag_overlap(data.bits[idx] ? Tag::One : Tag::Zero, r[g.data()]);
        } else {
            for (const auto &c : address.components) {
                double o = tag_overlap(data.bits[c.index] ? Tag::One : Tag::Zero, r[g.data()]);
                for (uint32_t b = 1; b <= L && o != 0.0; b++) {
                    Tag want = ((c.index >> (L - b)) & 1) ? Tag::One : Tag::Zero;
                    o *= tag_overlap(want, r[g.address(b)]);
                }
                proj += std::conj(c.amplitude) * o;
            }
        }
        w[k] = s.amps[k] * proj;
    }
    detail::Planes routers(s, g.data() + 1, s.qubit_count);
    double f = detail::gram_sum(routers, w);
    return std::clamp(f, 0.0, 1.0 + 1e-12);
}

/// Dense vector with qubit q as bit q of the basis index.
inline Eigen::VectorXcd to_dense(const EcsState &s) {
    if (s.qubit_count > 26) throw std::invalid_argument("to_dense: too many qubits");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(Eigen::Index{1} << s.qubit_count);
    std::vector<std::pair<uint64_t, Complex>> terms, next;
    for (size_t k = 0; k < s.size(); k++) {
        terms.assign(1, {0, s.amps[k]});
        for (uint32_t q = 0; q < s.qubit_count; q++) {
            Tag t = s.tag(k, q);
            if (is_computational(t)) {
                if (tag_value(t)) {
                    for (auto &term : terms) term.first |= uint64_t{1} << q;
                }
                continue;
            }
            next.clear();
            for (auto &term : terms) {
                next.push_back({term.first, term.second * kInvSqrt2});
                next.push_back({term.first | (uint64_t{1} << q), term.second * (t == Tag::Minus ? -kInvSqrt2 : kInvSqrt2)});
            }
            terms.swap(next);
        }
        for (auto &term : terms) out[static_cast<Eigen::Index>(term.first)] += term.second;
    }
    return out;
}

/// Sum of |alpha_i|^2 over addresses whose root-to-leaf path (including the leaf) saw no event.
inline double error_free_amplitude_mass(
    const QramGeometry &g, const AddressState &address, const ErrorConfiguration &errors) {
    std::unordered_set<uint32_t> bad;
    for (const auto &e : errors.events) bad.insert(e.node);
    double mass = 0;
    for (const auto &c : address.components) {
        bool clean = true;
        for (uint32_t layer = 1; layer <= g.layers() + 1 && clean; layer++) {
            if (bad.count(g.node_on_path(c.index, layer))) clean = false;
        }
        if (clean) mass += std::norm(c.amplitude);
    }
    return mass;
}

}  // namespace qram
