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

#include <algorithm>
#include <vector>

#include "qram/circuit.hpp"

namespace qram {

enum class Pauli : uint8_t { I, X, Y, Z };

inline char pauli_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

/// A single-qubit Pauli applied once the first `position` gates of the circuit have run.
/// A fault on gate j therefore has position j + 1; an injection at a phase boundary has
/// position phase_end(phase).
struct ErrorEvent {
    size_t position;
    Qubit qubit;
    Pauli pauli;
    bool injected = false;
    /// Tree node the event is attributed to (the faulty gate's node, or the injected qubit's).
    uint32_t node = 1;

    bool operator==(const ErrorEvent &) const = default;
};

/// One Monte Carlo error configuration.
struct ErrorConfiguration {
    /// Sorted by position; within a position, in the order they were sampled.
    std::vector<ErrorEvent> events;
    /// Number of faulty constituent gates (a two-qubit fault may produce two events).
    uint64_t gate_faults = 0;
    uint64_t injected_faults = 0;

    bool empty() const { return events.empty(); }

    void add(ErrorEvent e) { events.push_back(e); }

    void sort() {
        std::stable_sort(events.begin(), events.end(),
                         [](const ErrorEvent &a, const ErrorEvent &b) { return a.position < b.position; });
    }

    void validate(const CircuitIR &circuit) const {
        size_t last = 0;
        for (const auto &e : events) {
            if (e.position > circuit.size()) throw std::invalid_argument("error event position past end of circuit");
            if (e.qubit >= circuit.geometry.qubit_count()) throw std::invalid_argument("error event qubit out of range");
            if (e.pauli == Pauli::I) throw std::invalid_argument("error event with identity Pauli");
            if (e.position < last) throw std::invalid_argument("error events not sorted by position");
            last = e.position;
        }
    }
};

}  // namespace qram
