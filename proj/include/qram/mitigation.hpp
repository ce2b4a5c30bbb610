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

#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>

#include "qram/ecs.hpp"
#include "qram/noise.hpp"

namespace qram {

enum class SelectionMode : uint8_t { All, QueriedBranchesOnly, UnqueriedBranchesOnly };

inline const char *selection_mode_name(SelectionMode m) {
    switch (m) {
        case SelectionMode::All: return "all";
        case SelectionMode::QueriedBranchesOnly: return "queried";
        case SelectionMode::UnqueriedBranchesOnly: return "unqueried";
    }
    return "?";
}

inline std::optional<SelectionMode> parse_selection_mode(std::string_view s) {
    for (auto m : {SelectionMode::All, SelectionMode::QueriedBranchesOnly, SelectionMode::UnqueriedBranchesOnly}) {
        if (s == selection_mode_name(m)) return m;
    }
    return std::nullopt;
}

/// Post-select the control and incident qubits of layers 1..k_layers onto |0>.
struct MitigationConfig {
    uint32_t k_layers = 0;
    SelectionMode mode = SelectionMode::All;
    bool include_controls = true;
    bool include_incidents = true;
};

/// Qubits measured under `config`. Queried nodes are those on a path of some address component.
inline std::vector<Qubit> postselection_qubits(const QramGeometry &g, const MitigationConfig &config,
                                               const AddressState &address) {
    if (config.k_layers > g.layers()) throw std::invalid_argument("mitigation: k_layers exceeds layers");
    std::vector<bool> queried(g.node_count() + 1, false);
    for (const auto &c : address.components) {
        for (uint32_t l = 1; l <= g.layers(); l++) queried[g.node_on_path(c.index, l)] = true;
    }
    std::vector<Qubit> out;
    for (uint32_t l = 1; l <= config.k_layers; l++) {
        for (uint32_t k = g.first_node_of_layer(l); k <= g.last_node_of_layer(l); k++) {
            if (config.mode == SelectionMode::QueriedBranchesOnly && !queried[k]) continue;
            if (config.mode == SelectionMode::UnqueriedBranchesOnly && queried[k]) continue;
            if (config.include_controls) out.push_back(g.control(k));
            if (config.include_incidents) out.push_back(g.incident(k));
        }
    }
    return out;
}

/// Projects `qubits` onto |0> componentwise and renormalizes. Returns the keep probability
/// (relative to the input norm); on zero keep probability the state is left empty.
inline double postselect(EcsState &s, const std::vector<Qubit> &qubits) {
    const double before = norm(s);
    std::vector<bool> drop(s.size(), false);
    for (size_t k = 0; k < s.size(); k++) {
        Tag *r = s.row(k);
        for (auto q : qubits) {
            switch (r[q]) {
                case Tag::Zero:
                    break;
                case Tag::One:
                    drop[k] = true;
                    break;
                case Tag::Plus:
                case Tag::Minus:
                    // <0|+> = <0|-> = 1/sqrt2.
                    r[q] = Tag::Zero;
                    s.amps[k] *= kInvSqrt2;
                    break;
            }
            if (drop[k]) break;
        }
    }
    s.erase_if(drop);
    if (s.size() == 0) return 0.0;
    double after = norm(s);
    double keep = after / before;
    if (keep <= 1e-300) {
        s.amps.clear();
        s.tags.clear();
        return 0.0;
    }
    const double scale = 1.0 / std::sqrt(after);
    for (auto &a : s.amps) a *= scale;
    return keep;
}

inline double postselect(EcsState &s, const MitigationConfig &config, const QramGeometry &g, const AddressState &address) {
    return postselect(s, postselection_qubits(g, config, address));
}

/// n >= 1.96^2 p(1-p) / delta^2 at 95% confidence.
inline uint64_t required_samples(double delta, double p_hat) {
    if (!(delta > 0)) throw std::invalid_argument("required_samples: delta must be positive");
    if (!(p_hat >= 0 && p_hat <= 1)) throw std::invalid_argument("required_samples: p_hat must lie in [0, 1]");
    // Round away representation noise before the ceiling (e.g. 9604.000000000002).
    double n = std::round(1.96 * 1.96 * p_hat * (1 - p_hat) / (delta * delta) * 1e9) / 1e9;
    return static_cast<uint64_t>(std::ceil(n));
}

// ---------------------------------------------------------------------------------------------
// Monte Carlo execution.

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware concurrency).
inline void parallel_for(size_t n, unsigned threads, const std::function<void(size_t)> &body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<size_t>(threads, n));
    if (threads <= 1) {
        for (size_t i = 0; i < n; i++) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; t++) {
        pool.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = n;
                }
            }
        });
    }
    for (auto &th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

/// A query to estimate: the circuit, its inputs, and engine settings.
struct QueryTask {
    CircuitIR circuit;
    AddressState address;
    ClassicalData data;
    RoutingChoice routing{};
    size_t cap_factor = 4;

    QueryTask(const QramGeometry &g, AddressState a, ClassicalData d)
        : circuit(build_query_circuit(g, d)), address(std::move(a)), data(std::move(d)) {}
};

/// Per-sample outcome for a list of mitigation configurations.
struct SampleOutcome {
    std::vector<double> weight;    ///< keep probability per configuration
    std::vector<double> fidelity;  ///< conditional query fidelity per configuration
    bool faulted = false;
    double error_free_mass = 1.0;
};

/// Evaluates one sampled trajectory. Error-free samples short-circuit to F = 1, w = 1.
inline SampleOutcome evaluate_sample(const QueryTask &task, const ErrorConfiguration &cfg,
                                     const std::vector<std::vector<Qubit>> &scopes) {
    SampleOutcome out;
    out.weight.assign(scopes.size(), 1.0);
    out.fidelity.assign(scopes.size(), 1.0);
    if (cfg.empty()) return out;
    out.faulted = true;
    const auto &g = task.circuit.geometry;
    out.error_free_mass = error_free_amplitude_mass(g, task.address, cfg);
    EcsState s = init_state(g, task.address, task.cap_factor);
    run_circuit(s, task.circuit, cfg, task.routing);
    for (size_t j = 0; j < scopes.size(); j++) {
        if (scopes[j].empty()) {
            out.fidelity[j] = query_fidelity(s, g, task.address, task.data);
            continue;
        }
        EcsState p = s;
        out.weight[j] = postselect(p, scopes[j]);
        out.fidelity[j] = out.weight[j] > 0 ? query_fidelity(p, g, task.address, task.data) : 0.0;
    }
    return out;
}

/// Samples `n` trajectories (sample i uses stream (seed, i)) and evaluates each.
inline std::vector<SampleOutcome> run_samples(const QueryTask &task, const NoiseModel &model,
                                              const std::vector<MitigationConfig> &configs, uint64_t n, uint64_t seed,
                                              unsigned threads = 0) {
    NoiseSchedule schedule(task.circuit, model);
    std::vector<std::vector<Qubit>> scopes;
    for (const auto &c : configs) scopes.push_back(postselection_qubits(task.circuit.geometry, c, task.address));
    std::vector<SampleOutcome> out(n);
    parallel_for(n, threads, [&](size_t i) { out[i] = evaluate_sample(task, schedule.sample(seed, i), scopes); });
    return out;
}

/// F' with a delta-method CI, valid fraction with a normal CI; both 95%.
struct MitigatedEstimate {
    double fidelity = 0;
    double fidelity_ci = 0;
    double valid_fraction = 0;
    double valid_fraction_ci = 0;
    uint64_t n_samples = 0;
    double accepted_weight = 0;
};

/// Reduces (w, F) pairs in index order. `strict` replaces w by a Bernoulli accept with
/// probability w, drawn from a stream derived from (seed, i).
inline MitigatedEstimate estimate(const std::vector<double> &w_in, const std::vector<double> &f, bool strict = false,
                                  uint64_t seed = 0) {
    const size_t n = w_in.size();
    if (n == 0 || f.size() != n) throw std::invalid_argument("estimate: empty or mismatched samples");
    std::vector<double> w = w_in;
    if (strict) {
        for (size_t i = 0; i < n; i++) {
            auto rng = sample_rng(seed ^ 0xa5a5a5a5a5a5a5a5ULL, i);
            w[i] = std::uniform_real_distribution<double>(0, 1)(rng) < w_in[i] ? 1.0 : 0.0;
        }
    }
    double sw = 0, swf = 0;
    for (size_t i = 0; i < n; i++) {
        sw += w[i];
        swf += w[i] * f[i];
    }
    if (sw <= 0) throw std::runtime_error("mitigation: every sample was rejected");
    MitigatedEstimate e;
    e.n_samples = n;
    e.accepted_weight = sw;
    const double dn = static_cast<double>(n);
    const double wbar = sw / dn;
    const double r = swf / sw;
    double var_w = 0, var_res = 0;
    for (size_t i = 0; i < n; i++) {
        var_w += (w[i] - wbar) * (w[i] - wbar);
        double res = w[i] * f[i] - r * w[i];
        var_res += res * res;
    }
    if (n > 1) {
        var_w /= dn - 1;
        var_res /= dn - 1;
    }
    e.fidelity = r;
    e.fidelity_ci = 1.96 * std::sqrt(var_res / dn) / wbar;
    e.valid_fraction = wbar;
    e.valid_fraction_ci = 1.96 * std::sqrt(var_w / dn);
    return e;
}

inline MitigatedEstimate estimate_column(const std::vector<SampleOutcome> &samples, size_t column, bool strict = false,
                                         uint64_t seed = 0) {
    std::vector<double> w(samples.size()), f(samples.size());
    for (size_t i = 0; i < samples.size(); i++) {
        w[i] = samples[i].weight.at(column);
        f[i] = samples[i].fidelity.at(column);
    }
    return estimate(w, f, strict, seed);
}

/// Mitigated query fidelity under `model` with post-selection `config`.
inline MitigatedEstimate mitigated_query(const QueryTask &task, const NoiseModel &model, const MitigationConfig &config,
                                         uint64_t n, uint64_t seed, bool strict = false, unsigned threads = 0) {
    if (n < 100) throw std::invalid_argument("mitigated_query: need at least 100 samples");
    auto samples = run_samples(task, model, {config}, n, seed, threads);
    return estimate_column(samples, 0, strict, seed);
}

}  // namespace qram
