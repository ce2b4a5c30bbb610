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
#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qram/circuit.hpp"

namespace qram {

using Matrix = Eigen::MatrixXcd;

/// A d x d unitary, d in {2, 4, 8, 16}. Basis index bits run most significant = first operand.
struct GateUnitary {
    std::string name;
    Matrix matrix;

    GateUnitary(std::string n, Matrix m) : name(std::move(n)), matrix(std::move(m)) {
        auto d = matrix.rows();
        if (matrix.cols() != d || (d != 2 && d != 4 && d != 8 && d != 16)) {
            throw std::invalid_argument(name + ": unitary dimension must be 2, 4, 8 or 16");
        }
    }

    Eigen::Index dim() const { return matrix.rows(); }

    double unitarity_error() const {
        Matrix e = matrix.adjoint() * matrix - Matrix::Identity(dim(), dim());
        return e.cwiseAbs().maxCoeff();
    }
    bool is_unitary(double tol = 1e-12) const { return unitarity_error() < tol; }
};

namespace detail {

/// Builds a signed permutation from `image[j] = (row, sign)`, i.e. U|j> = sign |row>.
inline Matrix signed_permutation(const std::vector<std::pair<int, double>> &image) {
    auto d = static_cast<Eigen::Index>(image.size());
    Matrix m = Matrix::Zero(d, d);
    for (Eigen::Index j = 0; j < d; j++) m(image[static_cast<size_t>(j)].first, j) = image[static_cast<size_t>(j)].second;
    return m;
}

}  // namespace detail

inline GateUnitary routing_unitary(RoutingUnitaryKind kind) {
    switch (kind) {
        case RoutingUnitaryKind::UPrime:
            return {"UPrime",
                    detail::signed_permutation({{0, 1}, {1, 1}, {2, 1}, {3, 1}, {4, 1}, {6, 1}, {5, 1}, {7, -1}})};
        case RoutingUnitaryKind::UDoublePrime:
            return {"UDoublePrime",
                    detail::signed_permutation({{0, 1}, {7, 1}, {2, 1}, {6, 1}, {4, 1}, {3, 1}, {5, 1}, {1, -1}})};
        case RoutingUnitaryKind::CSWAP:
            return {"CSWAP",
                    detail::signed_permutation({{0, 1}, {1, 1}, {2, 1}, {3, 1}, {4, 1}, {6, 1}, {5, 1}, {7, 1}})};
    }
    throw std::invalid_argument("unknown routing unitary");
}

inline const char *routing_unitary_name(RoutingUnitaryKind k) {
    switch (k) {
        case RoutingUnitaryKind::UPrime: return "UPrime";
        case RoutingUnitaryKind::UDoublePrime: return "UDoublePrime";
        case RoutingUnitaryKind::CSWAP: return "CSWAP";
    }
    return "?";
}

inline GateUnitary swap_unitary() {
    return {"SWAP", detail::signed_permutation({{0, 1}, {2, 1}, {1, 1}, {3, 1}})};
}
inline GateUnitary cz_unitary() {
    return {"CZ", detail::signed_permutation({{0, 1}, {1, 1}, {2, 1}, {3, -1}})};
}

inline Matrix single_qubit_matrix(std::string_view name, double param = 0.0) {
    const Complex i1(0, 1);
    const double s = 1.0 / std::sqrt(2.0);
    Matrix m(2, 2);
    if (name == "H") {
        m << s, s, s, -s;
    } else if (name == "X") {
        m << 0, 1, 1, 0;
    } else if (name == "Y") {
        m << 0, -i1, i1, 0;
    } else if (name == "Z") {
        m << 1, 0, 0, -1;
    } else if (name == "S") {
        m << 1, 0, 0, i1;
    } else if (name == "SDG") {
        m << 1, 0, 0, -i1;
    } else if (name == "T") {
        m << 1, 0, 0, std::exp(i1 * (M_PI / 4));
    } else if (name == "TDG") {
        m << 1, 0, 0, std::exp(-i1 * (M_PI / 4));
    } else if (name == "RX") {
        m << std::cos(param / 2), -i1 * std::sin(param / 2), -i1 * std::sin(param / 2), std::cos(param / 2);
    } else if (name == "RY") {
        m << std::cos(param / 2), -std::sin(param / 2), std::sin(param / 2), std::cos(param / 2);
    } else if (name == "RZ") {
        m << std::exp(-i1 * (param / 2)), 0, 0, std::exp(i1 * (param / 2));
    } else {
        throw std::invalid_argument("unknown single-qubit gate '" + std::string(name) + "'");
    }
    return m;
}

enum class Scenario : uint8_t { UpwardConstraints, DownwardConstraints };

struct Predicate {
    std::string name;
    bool pass;
    double max_deviation;
};

struct VerificationReport {
    std::string subject;
    std::vector<Predicate> predicates;

    bool all_pass() const {
        return std::all_of(predicates.begin(), predicates.end(), [](const Predicate &p) { return p.pass; });
    }
    double max_deviation() const {
        double m = 0;
        for (const auto &p : predicates) m = std::max(m, p.max_deviation);
        return m;
    }
    std::string str() const {
        std::ostringstream out;
        out << subject << ": " << (all_pass() ? "PASS" : "FAIL") << '\n';
        for (const auto &p : predicates) {
            out << "  [" << (p.pass ? "pass" : "FAIL") << "] " << p.name << "  max_dev=" << p.max_deviation << '\n';
        }
        return out.str();
    }
};

/// Checks a 3-qubit candidate (basis |control, t1, t2>) against the routing constraints.
///
/// Upward: identity on the control-0 block, U|100> = |100>, U|110> = |101>, and the two free
/// columns |101>, |111> form a unitary block on the orthogonal complement of the images of the
/// six constrained columns. Downward: agreement with CSWAP on |000>, |010>, |100>, |110>.
///
/// A global phase is removed using the <000|U|000> entry.
inline VerificationReport verify_routing_equivalence(
    const GateUnitary &candidate, Scenario scenario, double tol = 1e-9) {
    if (candidate.dim() != 8) throw std::invalid_argument(candidate.name + ": routing candidate must be 8x8");
    if (!candidate.is_unitary(1e-9)) throw std::invalid_argument(candidate.name + ": candidate is not unitary");

    Matrix u = candidate.matrix;
    if (std::abs(u(0, 0)) > 0.5) u /= u(0, 0) / std::abs(u(0, 0));

    VerificationReport rep{candidate.name + (scenario == Scenario::UpwardConstraints ? " upward" : " downward"), {}};
    auto column_check = [&](int in, int out) {
        Eigen::VectorXcd want = Eigen::VectorXcd::Zero(8);
        want(out) = 1;
        double dev = (u.col(in) - want).cwiseAbs().maxCoeff();
        auto bits = [](int v) {
            return std::string{char('0' + ((v >> 2) & 1)), char('0' + ((v >> 1) & 1)), char('0' + (v & 1))};
        };
        rep.predicates.push_back({"U|" + bits(in) + "> = |" + bits(out) + ">", dev < tol, dev});
    };

    if (scenario == Scenario::UpwardConstraints) {
        for (int j = 0; j < 4; j++) column_check(j, j);
        column_check(4, 4);
        column_check(6, 5);
        // Free block: project the |101>, |111> images onto the complement of the constrained images.
        Matrix constrained(8, 6);
        int cols[] = {0, 1, 2, 3, 4, 6};
        for (int k = 0; k < 6; k++) constrained.col(k) = u.col(cols[k]);
        Matrix proj = Matrix::Identity(8, 8) - constrained * constrained.adjoint();
        Matrix free_cols(8, 2);
        free_cols.col(0) = u.col(5);
        free_cols.col(1) = u.col(7);
        double leak = (free_cols - proj * free_cols).cwiseAbs().maxCoeff();
        Matrix gram = free_cols.adjoint() * free_cols - Matrix::Identity(2, 2);
        double dev = std::max(leak, gram.cwiseAbs().maxCoeff());
        rep.predicates.push_back({"span{|101>,|111>} -> unitary block on the free subspace", dev < tol, dev});
    } else {
        Matrix cswap = routing_unitary(RoutingUnitaryKind::CSWAP).matrix;
        for (int j : {0, 2, 4, 6}) {
            Eigen::Index out;
            cswap.col(j).cwiseAbs().maxCoeff(&out);
            column_check(j, static_cast<int>(out));
        }
    }
    return rep;
}

/// Small circuit over CZ and single-qubit gates used as a reference decomposition.
///
/// File format: one gate per line, `GATE q1 [q2]`, with qubits named q0, q1, ... (q0 is the
/// most significant basis bit). Parameterized gates are written `RY(theta)`. '#' starts a comment.
struct RefCircuit {
    struct Gate {
        std::string name;
        std::vector<uint32_t> qubits;
        double param = 0.0;
    };
    uint32_t qubit_count = 0;
    std::vector<Gate> gates;

    size_t cz_count() const {
        return static_cast<size_t>(std::count_if(gates.begin(), gates.end(), [](const Gate &g) { return g.name == "CZ"; }));
    }
    size_t single_qubit_count() const { return gates.size() - cz_count(); }

    static RefCircuit parse(std::string_view text, uint32_t qubit_count) {
        RefCircuit c{qubit_count, {}};
        std::istringstream in{std::string(text)};
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            line_no++;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            std::istringstream ls(line);
            std::string head;
            if (!(ls >> head)) continue;
            auto fail = [&](const std::string &msg) {
                throw std::invalid_argument("reference circuit line " + std::to_string(line_no) + ": " + msg);
            };
            Gate g;
            auto paren = head.find('(');
            if (paren != std::string::npos) {
                if (head.back() != ')') fail("unterminated parameter");
                g.name = head.substr(0, paren);
                try {
                    g.param = std::stod(head.substr(paren + 1, head.size() - paren - 2));
                } catch (const std::exception &) {
                    fail("bad parameter in '" + head + "'");
                }
            } else {
                g.name = head;
            }
            std::string q;
            while (ls >> q) {
                if (q.size() < 2 || q[0] != 'q') fail("qubit names must be q0, q1, ...");
                uint32_t idx = static_cast<uint32_t>(std::stoul(q.substr(1)));
                if (idx >= qubit_count) fail("qubit " + q + " out of range");
                g.qubits.push_back(idx);
            }
            size_t want = g.name == "CZ" ? 2 : 1;
            if (g.qubits.size() != want) fail("gate " + g.name + " expects " + std::to_string(want) + " operands");
            if (g.name != "CZ") single_qubit_matrix(g.name, g.param);  // validates the name
            c.gates.push_back(std::move(g));
        }
        return c;
    }

    std::string dump() const {
        std::ostringstream out;
        out.precision(17);
        for (const auto &g : gates) {
            out << g.name;
            if (g.name == "RX" || g.name == "RY" || g.name == "RZ") out << '(' << g.param << ')';
            for (auto q : g.qubits) out << " q" << q;
            out << '\n';
        }
        return out.str();
    }

    Matrix unitary() const {
        auto d = Eigen::Index{1} << qubit_count;
        Matrix u = Matrix::Identity(d, d);
        for (const auto &g : gates) {
            Matrix step = Matrix::Zero(d, d);
            if (g.name == "CZ") {
                uint32_t a = qubit_count - 1 - g.qubits[0], b = qubit_count - 1 - g.qubits[1];
                for (Eigen::Index j = 0; j < d; j++) step(j, j) = (((j >> a) & 1) && ((j >> b) & 1)) ? -1.0 : 1.0;
            } else {
                Matrix m = single_qubit_matrix(g.name, g.param);
                uint32_t bit = qubit_count - 1 - g.qubits[0];
                for (Eigen::Index j = 0; j < d; j++) {
                    int jb = static_cast<int>((j >> bit) & 1);
                    for (int ob = 0; ob < 2; ob++) {
                        Eigen::Index row = (j & ~(Eigen::Index{1} << bit)) | (Eigen::Index{ob} << bit);
                        step(row, j) += m(ob, jb);
                    }
                }
            }
            u = step * u;
        }
        return u;
    }

    /// True when every CZ acts on a pair in `edges` (unordered).
    bool respects(const std::vector<std::pair<uint32_t, uint32_t>> &edges) const {
        for (const auto &g : gates) {
            if (g.name != "CZ") continue;
            bool ok = std::any_of(edges.begin(), edges.end(), [&](const auto &e) {
                return (e.first == g.qubits[0] && e.second == g.qubits[1]) ||
                       (e.first == g.qubits[1] && e.second == g.qubits[0]);
            });
            if (!ok) return false;
        }
        return true;
    }
};

/// Embeds a k-qubit matrix acting on `positions` (first = most significant of `u`) into an
/// n-qubit space whose first operand is also the most significant bit.
inline Matrix embed(const Matrix &u, const std::vector<uint32_t> &positions, uint32_t n) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    const size_t k = positions.size();
    if (u.rows() != (Eigen::Index{1} << k)) throw std::invalid_argument("embed: matrix size does not match operands");
    auto bit_of = [&](size_t j) { return n - 1 - positions[j]; };
    Matrix out = Matrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; col++) {
        Eigen::Index sub_col = 0;
        for (size_t j = 0; j < k; j++) sub_col = (sub_col << 1) | ((col >> bit_of(j)) & 1);
        for (Eigen::Index sub_row = 0; sub_row < u.rows(); sub_row++) {
            if (u(sub_row, sub_col) == Complex(0)) continue;
            Eigen::Index row = col;
            for (size_t j = 0; j < k; j++) {
                Eigen::Index b = Eigen::Index{1} << bit_of(j);
                row = ((sub_row >> (k - 1 - j)) & 1) ? (row | b) : (row & ~b);
            }
            out(row, col) += u(sub_row, sub_col);
        }
    }
    return out;
}

/// Full router on (control, input, left, right): the half (control, input, right) acts when the
/// control is 1 and the half (control, input, left) with the control negated acts when it is 0.
/// The left half is applied first.
inline GateUnitary router_unitary(RoutingUnitaryKind kind) {
    Matrix half = routing_unitary(kind).matrix;
    Matrix x = embed(single_qubit_matrix("X"), {0}, 4);
    Matrix left = x * embed(half, {0, 1, 2}, 4) * x;
    Matrix right = embed(half, {0, 1, 3}, 4);
    return {std::string(routing_unitary_name(kind)) + "Router", right * left};
}

/// Adjacent slot pairs for a 3-qubit (control, t1, t2) routing half under `c`.
inline std::vector<std::pair<uint32_t, uint32_t>> half_router_edges(Connectivity c) {
    switch (c) {
        case Connectivity::ControlAdjacentOneTarget:
            return {{0, 1}, {1, 2}};
        case Connectivity::ControlAdjacentTwoTargets:
            return {{0, 1}, {0, 2}};
        default:
            throw std::invalid_argument("half-router connectivity must be one-target or two-targets");
    }
}

/// Adjacent slot pairs for a full router (control, input, left, right) under `c`.
inline std::vector<std::pair<uint32_t, uint32_t>> router_edges(Connectivity c) {
    switch (c) {
        case Connectivity::StarFourQubit:
        case Connectivity::ControlAdjacentOneTarget:
            return {{1, 0}, {1, 2}, {1, 3}};
        case Connectivity::ControlAdjacentTwoTargets:
            return {{0, 1}, {0, 2}, {0, 3}};
        default:
            throw std::invalid_argument("router connectivity required");
    }
}

}  // namespace qram
