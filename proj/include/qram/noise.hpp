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
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <unsupported/Eigen/KroneckerProduct>

#include "qram/config.hpp"
#include "qram/errors.hpp"
#include "qram/registry.hpp"

namespace qram {

/// CZ and single-qubit constituent counts of a composite gate.
struct Recipe {
    uint32_t cz = 0;
    uint32_t sq = 0;
    bool operator==(const Recipe &) const = default;
};

/// Depolarizing injection at the boundary after `phase`: with probability p one of X, Y, Z.
struct Injection {
    Qubit qubit;
    Phase phase = Phase::DataLoading;
    double p = 0;
    bool operator==(const Injection &) const = default;
};

/// Pauli noise model.
///
/// Rates are TOTAL non-identity probabilities: a single-qubit gate suffers X, Y or Z with
/// probability e_s / 3 each; a CZ suffers each of the 15 non-identity two-qubit Paulis with
/// probability e_t / 15.
struct NoiseModel {
    double e_t = 0;
    double e_s = 0;
    std::map<std::pair<GateKind, Connectivity>, Recipe> recipes = default_recipes();
    std::vector<Injection> injections;

    /// e_s = e_t / 10 and the default recipes.
    static NoiseModel standard(double e_t) {
        NoiseModel m;
        m.e_t = e_t;
        m.e_s = e_t / 10;
        return m;
    }

    /// SWAP = 3 CZ + 4 single-qubit gates; full routers 10 CZ + 16 single-qubit gates in the
    /// star case, two halves of the registered half-router counts otherwise.
    static std::map<std::pair<GateKind, Connectivity>, Recipe> default_recipes() {
        return recipes_from_registry(DecompositionRegistry::standard());
    }

    static std::map<std::pair<GateKind, Connectivity>, Recipe> recipes_from_registry(const DecompositionRegistry &r) {
        std::map<std::pair<GateKind, Connectivity>, Recipe> out;
        const auto &sw = r.at({Operation::SWAP, Connectivity::None, "SWAP"});
        out[{GateKind::SWAP, Connectivity::None}] = {sw.cz_count, sw.single_qubit_count};
        for (auto [kind, op] : {std::pair{GateKind::RoutingDown, Operation::RoutingDown},
                                std::pair{GateKind::RoutingUp, Operation::RoutingUp}}) {
            const auto &star = r.at({op, Connectivity::StarFourQubit, "UPrime"});
            out[{kind, Connectivity::StarFourQubit}] = {star.cz_count, star.single_qubit_count};
            for (auto c : {Connectivity::ControlAdjacentOneTarget, Connectivity::ControlAdjacentTwoTargets}) {
                const auto &half = r.at({op, c, "UPrime"});
                out[{kind, c}] = {2 * half.cz_count, 2 * half.single_qubit_count};
            }
        }
        return out;
    }

    void validate() const {
        auto rate = [](double v, const char *name) {
            if (!(v >= 0 && v <= 1)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
        };
        rate(e_t, "e_t");
        rate(e_s, "e_s");
        for (const auto &inj : injections) {
            if (!(inj.p >= 0 && inj.p <= 0.75)) throw ConfigError("injection p must lie in [0, 3/4]");
        }
    }

    const Recipe &recipe(GateKind k, Connectivity c) const {
        auto it = recipes.find({k, c});
        if (it == recipes.end()) {
            throw ConfigError(std::string("no noise recipe for ") + gate_name(k) + "/" + connectivity_name(c));
        }
        return it->second;
    }

    KeyValueConfig to_config(const QramGeometry &g) const {
        KeyValueConfig kv;
        kv.set("e_t", e_t);
        kv.set("e_s", e_s);
        for (const auto &[key, r] : recipes) {
            std::string base = std::string("recipe.") + gate_name(key.first) + "." + connectivity_name(key.second);
            kv.set(base + ".cz", std::to_string(r.cz));
            kv.set(base + ".sq", std::to_string(r.sq));
        }
        for (size_t n = 0; n < injections.size(); n++) {
            std::string base = "inject." + std::to_string(n);
            kv.set(base + ".qubit", g.name(injections[n].qubit));
            kv.set(base + ".phase", phase_name(injections[n].phase));
            kv.set(base + ".p", injections[n].p);
        }
        return kv;
    }

    /// Reads the noise keys of `kv`; unrelated keys are ignored. e_s defaults to e_t / 10.
    static NoiseModel from_config(const KeyValueConfig &kv, const QramGeometry &g) {
        NoiseModel m;
        m.e_t = kv.get_double("e_t", 0.0);
        m.e_s = kv.get_double("e_s", m.e_t / 10);
        std::map<size_t, Injection> inj;
        for (const auto &[key, value] : kv.entries()) {
            if (key.rfind("recipe.", 0) == 0) {
                auto parts = split(key, '.');
                if (parts.size() != 4 || (parts[3] != "cz" && parts[3] != "sq")) {
                    throw ConfigError("bad recipe key '" + key + "' (want recipe.<gate>.<case>.cz|sq)");
                }
                auto kind = parse_gate_kind(parts[1]);
                auto conn = parse_connectivity(parts[2]);
                if (!kind || !conn) throw ConfigError("unknown gate or connectivity in '" + key + "'");
                auto &r = m.recipes[{*kind, *conn}];
                (parts[3] == "cz" ? r.cz : r.sq) = static_cast<uint32_t>(KeyValueConfig::parse_uint(value, key));
            } else if (key.rfind("inject.", 0) == 0) {
                auto parts = split(key, '.');
                if (parts.size() != 3) throw ConfigError("bad injection key '" + key + "'");
                size_t n = KeyValueConfig::parse_uint(parts[1], key);
                auto &e = inj[n];
                if (parts[2] == "qubit") {
                    try {
                        e.qubit = g.parse_name(value);
                    } catch (const std::exception &ex) {
                        throw ConfigError("'" + key + "': " + ex.what());
                    }
                } else if (parts[2] == "phase") {
                    auto p = parse_phase(value);
                    if (!p) throw ConfigError("'" + key + "': unknown phase '" + value + "'");
                    e.phase = *p;
                } else if (parts[2] == "p") {
                    e.p = KeyValueConfig::parse_double(value, key);
                } else {
                    throw ConfigError("bad injection field in '" + key + "'");
                }
            }
        }
        for (auto &[n, e] : inj) m.injections.push_back(e);
        m.validate();
        return m;
    }

   private:
    static std::vector<std::string> split(const std::string &s, char sep) {
        std::vector<std::string> out(1);
        for (char c : s) {
            if (c == sep) {
                out.emplace_back();
            } else {
                out.back() += c;
            }
        }
        return out;
    }
};

/// e_d = 4p/3.
inline double injection_rate(double p) {
    if (!(p >= 0 && p <= 0.75)) throw std::invalid_argument("injection_rate: p must lie in [0, 3/4]");
    return 4.0 * p / 3.0;
}

/// Constituents of a composite gate on its operand slots.
inline std::vector<Constituent> composite_constituents(GateKind kind, Connectivity c, const Recipe &r) {
    switch (kind) {
        case GateKind::SWAP:
            return synthetic_recipe(2, {{0, 1}}, r.cz, r.sq);
        case GateKind::RoutingDown:
        case GateKind::RoutingUp:
            if (c == Connectivity::StarFourQubit) return synthetic_recipe(4, router_edges(c), r.cz, r.sq);
            {
                auto half = half_router_edges(c);
                std::vector<std::pair<uint32_t, uint32_t>> edges;
                for (auto e : half) edges.push_back(e);
                for (auto e : half) edges.emplace_back(e.first == 2 ? 3 : e.first, e.second == 2 ? 3 : e.second);
                return synthetic_recipe(4, edges, r.cz, r.sq);
            }
        default:
            throw std::invalid_argument("composite_constituents: not a composite gate");
    }
}

/// Per-sample random stream derived from (seed, sample); independent of scheduling.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 sample_rng(uint64_t seed, uint64_t sample) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(sample + 0x5851f42d4c957f2dULL)));
}

/// Fault sites of a circuit under a noise model, flattened once and reused for every sample.
class NoiseSchedule {
   public:
    struct Site {
        uint32_t gate;
        uint32_t order;
        Qubit a;
        Qubit b;
    };

    NoiseSchedule(const CircuitIR &circuit, const NoiseModel &model) : circuit_(&circuit), model_(model) {
        model.validate();
        uint32_t order = 0;
        for (uint32_t i = 0; i < circuit.gates.size(); i++) {
            const auto &app = circuit.gates[i];
            switch (app.kind) {
                case GateKind::H:
                case GateKind::X:
                    sq_.push_back({i, order++, app.qubits[0], 0});
                    break;
                case GateKind::CZ:
                    tq_.push_back({i, order++, app.qubits[0], app.qubits[1]});
                    break;
                case GateKind::SWAP:
                case GateKind::RoutingDown:
                case GateKind::RoutingUp: {
                    auto conn = app.kind == GateKind::SWAP ? Connectivity::None : app.connectivity;
                    auto key = std::pair{app.kind, conn};
                    auto it = cache_.find(key);
                    if (it == cache_.end()) {
                        it = cache_.emplace(key, composite_constituents(app.kind, conn, model.recipe(app.kind, conn))).first;
                    }
                    for (const auto &c : it->second) {
                        if (c.two_qubit) {
                            tq_.push_back({i, order++, app.qubits[c.a], app.qubits[c.b]});
                        } else {
                            sq_.push_back({i, order++, app.qubits[c.a], 0});
                        }
                    }
                    break;
                }
                default:
                    break;  // explicit Pauli gates are treated as noiseless
            }
        }
        site_count_ = order;
        for (const auto &inj : model.injections) {
            if (inj.qubit >= circuit.geometry.qubit_count()) throw ConfigError("injection qubit out of range");
        }
    }

    const std::vector<Site> &single_qubit_sites() const { return sq_; }
    const std::vector<Site> &two_qubit_sites() const { return tq_; }
    const NoiseModel &model() const { return model_; }
    const CircuitIR &circuit() const { return *circuit_; }

    /// Expected number of faulty constituents per sample (injections excluded).
    double expected_gate_faults() const {
        return model_.e_s * static_cast<double>(sq_.size()) + model_.e_t * static_cast<double>(tq_.size());
    }

    ErrorConfiguration sample(uint64_t seed, uint64_t sample_index) const {
        auto rng = sample_rng(seed, sample_index);
        return sample_with(rng);
    }

    ErrorConfiguration sample_with(std::mt19937_64 &rng) const {
        struct Keyed {
            size_t position;
            uint64_t order;
            ErrorEvent event;
        };
        std::vector<Keyed> keyed;
        ErrorConfiguration cfg;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        auto for_each_fault = [&](const std::vector<Site> &sites, double p, auto &&emit) {
            if (p <= 0 || sites.empty()) return;
            const double log_q = std::log1p(-p);
            size_t i = 0;
            while (true) {
                // Geometric skip: number of clean sites before the next fault.
                if (p < 1) {
                    double u = 1.0 - unif(rng);
                    double skip = std::floor(std::log(u) / log_q);
                    if (skip >= static_cast<double>(sites.size() - i)) return;
                    i += static_cast<size_t>(skip);
                }
                if (i >= sites.size()) return;
                emit(sites[i]);
                cfg.gate_faults++;
                i++;
            }
        };
        std::uniform_int_distribution<int> pick3(1, 3), pick15(1, 15);
        for_each_fault(sq_, model_.e_s, [&](const Site &s) {
            keyed.push_back({s.gate + size_t{1}, s.order,
                             {s.gate + size_t{1}, s.a, static_cast<Pauli>(pick3(rng)), false, circuit_->gates[s.gate].node}});
        });
        for_each_fault(tq_, model_.e_t, [&](const Site &s) {
            int r = pick15(rng);
            auto pa = static_cast<Pauli>(r >> 2), pb = static_cast<Pauli>(r & 3);
            uint32_t node = circuit_->gates[s.gate].node;
            if (pa != Pauli::I) keyed.push_back({s.gate + size_t{1}, s.order, {s.gate + size_t{1}, s.a, pa, false, node}});
            if (pb != Pauli::I) keyed.push_back({s.gate + size_t{1}, s.order, {s.gate + size_t{1}, s.b, pb, false, node}});
        });
        for (size_t j = 0; j < model_.injections.size(); j++) {
            const auto &inj = model_.injections[j];
            if (inj.p <= 0 || unif(rng) >= inj.p) continue;
            size_t pos = circuit_->phase_end(inj.phase);
            cfg.injected_faults++;
            keyed.push_back({pos, site_count_ + j,
                             {pos, inj.qubit, static_cast<Pauli>(pick3(rng)), true,
                              CircuitIR::node_of(circuit_->geometry, inj.qubit)}});
        }
        std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed &x, const Keyed &y) {
            return x.position != y.position ? x.position < y.position : x.order < y.order;
        });
        cfg.events.reserve(keyed.size());
        for (auto &k : keyed) cfg.events.push_back(k.event);
        return cfg;
    }

   private:
    const CircuitIR *circuit_;
    NoiseModel model_;
    std::vector<Site> sq_, tq_;
    uint32_t site_count_ = 0;
    std::map<std::pair<GateKind, Connectivity>, std::vector<Constituent>> cache_;
};

inline ErrorConfiguration sample_configuration(const CircuitIR &circuit, const NoiseModel &model, uint64_t seed,
                                               uint64_t sample_index = 0) {
    return NoiseSchedule(circuit, model).sample(seed, sample_index);
}

// ---------------------------------------------------------------------------------------------
// Readout correction.

/// Applies the per-qubit response matrices (qubit 0 = most significant bit) to a histogram.
inline std::vector<double> apply_readout(const std::vector<double> &hist, const std::vector<Eigen::Matrix2d> &resp) {
    const size_t n = resp.size();
    if (hist.size() != (size_t{1} << n)) throw std::invalid_argument("readout: histogram size must be 2^qubits");
    std::vector<double> v = hist;
    for (size_t j = 0; j < n; j++) {
        const size_t bit = size_t{1} << (n - 1 - j);
        for (size_t i = 0; i < v.size(); i++) {
            if (i & bit) continue;
            double a = v[i], b = v[i | bit];
            v[i] = resp[j](0, 0) * a + resp[j](0, 1) * b;
            v[i | bit] = resp[j](1, 0) * a + resp[j](1, 1) * b;
        }
    }
    return v;
}

/// Euclidean projection onto the probability simplex.
inline std::vector<double> project_to_simplex(const std::vector<double> &y) {
    std::vector<double> u = y;
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0, theta = 0;
    for (size_t i = 0; i < u.size(); i++) {
        css += u[i];
        double t = (css - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0) theta = t;
    }
    std::vector<double> x(y.size());
    for (size_t i = 0; i < y.size(); i++) x[i] = std::max(0.0, y[i] - theta);
    return x;
}

/// Applies the tensor product of per-qubit inverse response matrices, R_ij = P(m=i | t=j).
inline std::vector<double> correct_readout(
    const std::vector<double> &hist, const std::vector<Eigen::Matrix2d> &resp, bool clip = false) {
    std::vector<Eigen::Matrix2d> inv;
    for (const auto &r : resp) {
        if (std::abs(r(0, 0) + r(1, 0) - 1) > 1e-9 || std::abs(r(0, 1) + r(1, 1) - 1) > 1e-9 || (r.array() < 0).any()) {
            throw std::invalid_argument("readout: response matrices must be column-stochastic");
        }
        if (std::abs(r.determinant()) < 1e-12) throw std::invalid_argument("readout: singular response matrix");
        inv.push_back(r.inverse());
    }
    auto v = apply_readout(hist, inv);
    return clip ? project_to_simplex(v) : v;
}

// ---------------------------------------------------------------------------------------------
// Composite-gate noise calibration.

namespace detail {

/// rho -> sum_P w_P P rho P over Paulis on `qubits` of an n-qubit density matrix; weights indexed
/// by base-4 Pauli strings (first qubit most significant).
inline Matrix pauli_channel(const Matrix &rho, const std::vector<uint32_t> &qubits, const std::vector<double> &w,
                            uint32_t n) {
    static const std::array<Matrix, 4> paulis = {Matrix(Matrix::Identity(2, 2)), single_qubit_matrix("X"),
                                                 single_qubit_matrix("Y"), single_qubit_matrix("Z")};
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    const size_t k = qubits.size();
    for (size_t idx = 0; idx < w.size(); idx++) {
        if (w[idx] == 0) continue;
        Matrix p = Matrix::Identity(1, 1);
        for (size_t j = 0; j < k; j++) {
            size_t digit = (idx >> (2 * (k - 1 - j))) & 3;
            Matrix next(p.rows() * 2, p.cols() * 2);
            next = Eigen::kroneckerProduct(p, paulis[digit]).eval();
            p = next;
        }
        Matrix full = embed(p, qubits, n);
        out += w[idx] * full * rho * full.adjoint();
    }
    return out;
}

inline std::vector<double> depolarizing_weights(size_t k, double e) {
    size_t d = size_t{1} << (2 * k);
    std::vector<double> w(d, e / static_cast<double>(d - 1));
    w[0] = 1 - e;
    return w;
}

inline double trace_distance(const Matrix &a, const Matrix &b) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a - b);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace detail

struct CalibrationProbe {
    std::string input;
    double sequential_distance;
    double lumped_distance;
};

/// Compares, for the reference decomposition of U', the exact circuit-level noisy channel with
/// (a) the constituents' Pauli channels applied in order after the ideal unitary and (b) one
/// lumped three-qubit depolarizing channel of equal total error probability.
inline std::vector<CalibrationProbe> composite_calibration(double e_t, double e_s,
                                                           const RefCircuit &circuit = RefCircuit::parse(
                                                               reference_circuits::kUPrimeOneTargetLine, 3)) {
    const uint32_t n = circuit.qubit_count;
    const Matrix u = circuit.unitary();
    double clean = 1.0;
    for (const auto &g : circuit.gates) clean *= 1 - (g.name == "CZ" ? e_t : e_s);
    std::vector<CalibrationProbe> out;
    const double s = 1.0 / std::sqrt(2.0);
    auto ket = [&](const std::string &label) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Ones(1);
        for (char c : label) {
            Eigen::VectorXcd q(2);
            if (c == '0') q << 1, 0;
            if (c == '1') q << 0, 1;
            if (c == '+') q << s, s;
            if (c == '-') q << s, -s;
            v = Eigen::kroneckerProduct(v, q).eval();
        }
        return v;
    };
    for (std::string label : {"000", "1+0", "110", "+++"}) {
        Eigen::VectorXcd psi = ket(label);
        Matrix rho0 = psi * psi.adjoint();
        // Exact: noise after every constituent.
        Matrix exact = rho0;
        for (const auto &g : circuit.gates) {
            Matrix gm = g.name == "CZ" ? cz_unitary().matrix : single_qubit_matrix(g.name, g.param);
            Matrix full = embed(gm, g.qubits, n);
            exact = full * exact * full.adjoint();
            exact = detail::pauli_channel(exact, g.qubits, detail::depolarizing_weights(g.qubits.size(), g.name == "CZ" ? e_t : e_s), n);
        }
        Matrix ideal = u * rho0 * u.adjoint();
        Matrix seq = ideal;
        for (const auto &g : circuit.gates) {
            seq = detail::pauli_channel(seq, g.qubits, detail::depolarizing_weights(g.qubits.size(), g.name == "CZ" ? e_t : e_s), n);
        }
        std::vector<uint32_t> all(n);
        std::iota(all.begin(), all.end(), 0u);
        Matrix lumped = detail::pauli_channel(ideal, all, detail::depolarizing_weights(n, 1 - clean), n);
        out.push_back({label, detail::trace_distance(exact, seq), detail::trace_distance(exact, lumped)});
    }
    return out;
}

}  // namespace qram
