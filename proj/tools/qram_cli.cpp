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

// Command-line front end.
//
// Every subcommand reads its settings from one flat key-value config assembled from
// (lowest to highest precedence) built-in defaults, `--config FILE` and explicit flags.
// `--dump-config` prints that config instead of running; feeding the dump back through
// `--config` reproduces the run.
//
// Exit status: 0 success, 1 runtime failure, 2 configuration error, 3 statistical-failure
// flag in an experiment (outputs are still written).

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "qram/experiments.hpp"
#include "qram/run_config.hpp"
#include "qram/stats.hpp"

using namespace qram;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitStatistical = 3;

struct Key {
    std::string name;
    std::string default_value;
    std::string help;
};

struct Command {
    std::string name;
    std::string help;
    std::vector<Key> keys;
    /// Accepts recipe.* / inject.* noise keys from a config file.
    bool noise_keys = false;
    std::function<int(const KeyValueConfig &)> run;
};

std::string default_out_dir() {
    const char *env = std::getenv("QRAM_OUT_DIR");
    return env && *env ? env : ".";
}

const Key kSamples{"samples", "10000", "Monte Carlo samples per point"};
const Key kSeed{"seed", "1", "master seed"};
const Key kThreads{"threads", "0", "worker threads (0 = all cores); results do not depend on it"};
const Key kFormat{"format", "both", "output files: csv, json or both"};
Key out_dir_key() { return {"out_dir", default_out_dir(), "output directory (default $QRAM_OUT_DIR or .)"}; }

RunOptions run_options(const KeyValueConfig &kv) {
    return RunOptions{kv.get_uint("samples"), kv.get_uint("seed"), static_cast<unsigned>(kv.get_uint("threads"))};
}

uint32_t layers_of(const KeyValueConfig &kv) {
    auto L = kv.get_uint("layers");
    if (L < 1 || L > 20) throw ConfigError("'layers' must lie in [1, 20]");
    return static_cast<uint32_t>(L);
}

RoutingUnitaryKind parse_routing(const std::string &s, const std::string &key) {
    for (auto k : {RoutingUnitaryKind::UPrime, RoutingUnitaryKind::UDoublePrime, RoutingUnitaryKind::CSWAP}) {
        if (s == routing_unitary_name(k)) return k;
    }
    throw ConfigError("'" + key + "': expected UPrime, UDoublePrime or CSWAP");
}

bool parse_bool(const std::string &s, const std::string &key) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("'" + key + "': expected true or false");
}

SelectionMode mode_of(const KeyValueConfig &kv) {
    auto m = parse_selection_mode(kv.get_string("mode"));
    if (!m) throw ConfigError("'mode': expected all, queried or unqueried");
    return *m;
}

/// Writes the result and reports; exit 3 when a row carries a statistical-failure flag.
int emit(const ExperimentResult &r, const KeyValueConfig &kv) {
    auto fmt = kv.get_string("format");
    if (fmt != "csv" && fmt != "json" && fmt != "both") throw ConfigError("'format': expected csv, json or both");
    auto paths = write_result(r, kv.get_string("out_dir"), kv.get_uint("seed"), fmt != "json", fmt != "csv");
    for (const auto &p : paths) std::cout << "wrote " << p << '\n';
    for (const auto &f : r.fits) {
        std::cout << "fit " << f.label << ": slope=" << format_double(f.slope) << " stderr=" << format_double(f.stderr_slope)
                  << '\n';
    }
    if (r.any_flagged()) {
        std::cerr << "warning: some rows are flagged (" << kStatisticalFailure << ")\n";
        return kExitStatistical;
    }
    return 0;
}

// ---------------------------------------------------------------------------------------------
// Subcommands.

int cmd_build(const KeyValueConfig &kv) {
    QramGeometry g(layers_of(kv));
    std::cout << build_query_circuit(g, parse_data_spec(kv.get_string("data"), g)).dump();
    return 0;
}

int cmd_stats(const KeyValueConfig &kv) {
    QramGeometry g(layers_of(kv));
    auto circuit = build_query_circuit(g, parse_data_spec(kv.get_string("data"), g));
    std::cout << "gates=" << circuit.size() << " qubits=" << g.qubit_count() << '\n';
    std::cout << circuit_stats(circuit, DecompositionRegistry::standard()).str();
    return 0;
}

int cmd_verify_gates(const KeyValueConfig &) {
    std::vector<VerificationReport> reps = {
        verify_routing_equivalence(routing_unitary(RoutingUnitaryKind::UPrime), Scenario::UpwardConstraints),
        verify_routing_equivalence(routing_unitary(RoutingUnitaryKind::UDoublePrime), Scenario::DownwardConstraints),
        verify_routing_equivalence(routing_unitary(RoutingUnitaryKind::CSWAP), Scenario::UpwardConstraints),
        verify_routing_equivalence(routing_unitary(RoutingUnitaryKind::CSWAP), Scenario::DownwardConstraints),
        verify_circuit(RefCircuit::parse(reference_circuits::kUPrimeOneTargetLine, 3), Scenario::UpwardConstraints,
                       half_router_edges(Connectivity::ControlAdjacentOneTarget), "reference U' (line)"),
        verify_reference_circuit(DecompositionRegistry::standard(), {Operation::SWAP, Connectivity::None, "SWAP"}),
    };
    bool ok = true;
    for (const auto &r : reps) {
        std::cout << r.str();
        ok = ok && r.all_pass();
    }
    Matrix u = routing_unitary(RoutingUnitaryKind::UPrime).matrix;
    bool involution = (u * u) == Matrix(Matrix::Identity(8, 8));
    std::cout << "UPrime^2 == I: " << (involution ? "yes" : "no") << '\n';
    return ok && involution ? 0 : kExitRuntime;
}

int cmd_simulate(const KeyValueConfig &kv) {
    QramGeometry g(layers_of(kv));
    auto data = parse_data_spec(kv.get_string("data"), g);
    auto address = parse_address_spec(kv.get_string("address"), g.layers());
    auto model = NoiseModel::from_config(kv, g);
    RoutingChoice routing{parse_routing(kv.get_string("routing_down"), "routing_down"),
                          parse_routing(kv.get_string("routing_up"), "routing_up")};
    const std::string engine = kv.get_string("engine");
    if (engine != "ecs" && engine != "dense") throw ConfigError("'engine': expected ecs or dense");
    const bool noiseless = model.e_t == 0 && model.e_s == 0 && model.injections.empty();
    QueryTask task(g, address, data);
    task.routing = routing;
    task.cap_factor = kv.get_uint("cap_factor");
    std::cout << std::fixed << std::setprecision(6);
    if (noiseless) {
        double f;
        if (engine == "dense") {
            f = dense_query_fidelity(dense_run(task.circuit, address, {}, routing), g, address, data);
        } else {
            auto s = init_state(g, address, task.cap_factor);
            run_circuit(s, task.circuit, {}, routing);
            f = query_fidelity(s, g, address, data);
        }
        std::cout << "fidelity " << f << '\n';
        return 0;
    }
    if (engine == "dense") throw ConfigError("'engine': the dense engine runs noiseless queries only; use ecs");
    MitigationConfig mc{static_cast<uint32_t>(kv.get_uint("k")), mode_of(kv), true, true};
    auto e = mitigated_query(task, model, mc, kv.get_uint("samples"), kv.get_uint("seed"),
                             parse_bool(kv.get_string("strict"), "strict"), static_cast<unsigned>(kv.get_uint("threads")));
    std::cout << "fidelity " << e.fidelity << " +- " << e.fidelity_ci << '\n';
    std::cout << "valid_fraction " << e.valid_fraction << " +- " << e.valid_fraction_ci << '\n';
    std::cout << "samples " << e.n_samples << '\n';
    return 0;
}

int cmd_scaling(const KeyValueConfig &kv) {
    auto layers = parse_uint_range(kv.get_string("layers"), "layers");
    double e_t = kv.get_double("e_t");
    double e_s = kv.get_double("e_s", e_t / 10);
    double ratio = e_t > 0 ? e_s / e_t : 0.1;
    return emit(scaling_experiment(layers, e_t, run_options(kv), ratio), kv);
}

int cmd_mitigate(const KeyValueConfig &kv) {
    uint32_t L = layers_of(kv);
    std::string ks = kv.get_string("k");
    auto k_range = parse_uint_range(ks == "all" ? "0.." + std::to_string(L) : ks, "k");
    double e_t = kv.get_double("e_t");
    double e_s = kv.get_double("e_s", e_t / 10);
    QramGeometry g(L);
    auto address = parse_address_spec(kv.get_string("address"), L);
    auto data = parse_data_spec(kv.get_string("data"), g);
    return emit(mitigation_sweep(L, e_t, k_range, run_options(kv), mode_of(kv), e_t > 0 ? e_s / e_t : 0.1, address, data,
                                 parse_bool(kv.get_string("strict"), "strict")),
                kv);
}

int cmd_inject(const KeyValueConfig &kv) {
    uint32_t L = layers_of(kv);
    QramGeometry g(L);
    auto address = parse_address_spec(kv.get_string("address"), L);
    auto data = parse_data_spec(kv.get_string("data"), g);
    auto nodes = parse_uint_range(kv.get_string("nodes"), "nodes");
    auto p = parse_double_list(kv.get_string("p"), "p");
    auto target = kv.get_string("target");
    if (target != "control" && target != "incident") throw ConfigError("'target': expected control or incident");
    return emit(injection_experiment(L, address, data, nodes, p, run_options(kv), kv.get_double("background_e_t"),
                                     target == "control" ? InjectionTarget::Control : InjectionTarget::Incident),
                kv);
}

int cmd_entropy(const KeyValueConfig &kv) {
    uint32_t L = layers_of(kv);
    auto r = entropy_by_layer(L, parse_address_spec(kv.get_string("address"), L));
    auto s = layer_entropies(r);
    for (size_t l = 0; l < s.size(); l++) std::cout << "layer " << l + 1 << " entropy " << format_double(s[l]) << '\n';
    return emit(r, kv);
}

int cmd_contour(const KeyValueConfig &kv) {
    auto layers = parse_uint_range(kv.get_string("layers"), "layers");
    auto grid = parse_double_list(kv.get_string("e_t_grid"), "e_t_grid");
    auto targets = parse_double_list(kv.get_string("targets"), "targets");
    return emit(threshold_contour(layers, grid, targets, run_options(kv), kv.get_double("e_s_ratio"),
                                  kv.get_double("fit_floor")),
                kv);
}

int cmd_teleport(const KeyValueConfig &kv) { return emit(teleport_experiment(run_options(kv)), kv); }

int cmd_readout_correct(const KeyValueConfig &kv) {
    auto hist = parse_double_list(kv.get_string("hist"), "hist");
    std::vector<Eigen::Matrix2d> resp;
    std::istringstream in(kv.get_string("response"));
    std::string block;
    while (std::getline(in, block, ';')) {
        auto v = parse_double_list(block, "response");
        if (v.size() != 4) throw ConfigError("'response': each qubit needs r00,r01,r10,r11");
        Eigen::Matrix2d r;
        r << v[0], v[1], v[2], v[3];
        resp.push_back(r);
    }
    if (hist.size() != (size_t{1} << resp.size())) {
        throw ConfigError("'hist': expected 2^" + std::to_string(resp.size()) + " entries");
    }
    std::vector<double> out;
    try {
        out = correct_readout(hist, resp, parse_bool(kv.get_string("clip"), "clip"));
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    for (size_t i = 0; i < out.size(); i++) std::cout << (i ? "," : "") << format_double(out[i]);
    std::cout << '\n';
    return 0;
}

std::vector<Command> commands() {
    const Key layers1{"layers", "2", "tree depth L"};
    const Key data{"data", "all-ones", "classical data: bitstring, all-ones or all-zeros"};
    const Key address{"address", "uniform", "basis:<bits> | uniform | bell:<b1>,<b2> | product:<0/1/+/-> | file:<path>"};
    const Key e_t{"e_t", "1e-4", "two-qubit (CZ) Pauli error rate"};
    const Key mode{"mode", "all", "post-selection scope: all, queried, unqueried"};
    const Key strict{"strict", "false", "Bernoulli accept/reject instead of weighted post-selection"};
    auto out = out_dir_key();
    return {
        {"build", "print the query circuit in dump format", {layers1, data}, false, cmd_build},
        {"stats", "CZ count and depth versus the CSWAP baseline", {layers1, data}, false, cmd_stats},
        {"verify-gates", "check the routing unitaries and reference circuits", {}, false, cmd_verify_gates},
        {"simulate",
         "one query: exact when noiseless, Monte Carlo otherwise",
         {layers1, data, address, {"e_t", "0", "two-qubit Pauli error rate"}, {"e_s", "", "single-qubit Pauli error rate (default e_t/10)"},
          {"k", "0", "post-select the first K router layers"}, mode, strict, kSamples, kSeed, kThreads,
          {"engine", "ecs", "ecs or dense (dense: noiseless only)"},
          {"routing_down", "UPrime", "downward half-router unitary"},
          {"routing_up", "UPrime", "upward half-router unitary"},
          {"cap_factor", "4", "ECS capacity as a multiple of the address components"}},
         true,
         cmd_simulate},
        {"scaling",
         "infidelity versus L",
         {{"layers", "2..6", "layer range a..b or list"}, e_t, {"e_s", "", "single-qubit rate (default e_t/10)"},
          kSamples, kSeed, kThreads, out, kFormat},
         false,
         cmd_scaling},
        {"mitigate",
         "post-selection mitigation versus K",
         {{"layers", "6", "tree depth L"}, {"e_t", "1e-5", "two-qubit Pauli error rate"},
          {"e_s", "", "single-qubit rate (default e_t/10)"}, {"k", "all", "K range a..b, list, or all"}, mode, strict,
          address, data, kSamples, kSeed, kThreads, out, kFormat},
         false,
         cmd_mitigate},
        {"inject",
         "fidelity versus injected depolarizing error after data loading",
         {{"layers", "3", "tree depth L"}, {"address", "product:00+", address.help},
          {"data", "01010101", data.help}, {"nodes", "4..7", "target nodes"},
          {"p", "0,0.05,0.1,0.15,0.2", "depolarizing probabilities"}, {"background_e_t", "0", "background CZ error rate"},
          {"target", "control", "router qubit receiving the injection: control or incident"}, kSamples, kSeed, kThreads,
          out, kFormat},
         false,
         cmd_inject},
        {"entropy",
         "entanglement entropy of router controls after address loading",
         {{"layers", "3", "tree depth L"}, {"address", "uniform", address.help}, {"seed", "0", "file-name seed"}, out,
          kFormat},
         false,
         cmd_entropy},
        {"contour",
         "error threshold for target fidelities versus L",
         {{"layers", "2..6", "layer range"}, {"e_t_grid", "0,5e-5,1e-4,2e-4,5e-4,1e-3,2e-3", "CZ error grid"},
          {"targets", "0.95", "target fidelities"}, {"e_s_ratio", "0.1", "e_s / e_t"},
          {"fit_floor", "0.8", "lowest fidelity included in the linear fits"}, kSamples, kSeed, kThreads, out, kFormat},
         false,
         cmd_contour},
        {"teleport",
         "teleport the six cardinal states",
         {{"samples", "4000", "feedforward samples per state"}, kSeed, kThreads, out, kFormat},
         false,
         cmd_teleport},
        {"readout-correct",
         "invert per-qubit readout response matrices",
         {{"hist", "", "measured histogram, comma-separated, qubit 0 most significant"},
          {"response", "", "per-qubit r00,r01,r10,r11 blocks separated by ';' (R_ij = P(read i | prepared j))"},
          {"clip", "false", "project the result onto the probability simplex"}},
         false,
         cmd_readout_correct},
    };
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"bucket-brigade QRAM simulator"};
    app.require_subcommand(1);
    auto cmds = commands();
    // Per subcommand: flag values and the CLI11 option handles.
    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, std::map<std::string, CLI::Option *>> options;
    std::map<std::string, std::string> config_path, dump;
    std::map<std::string, bool> dump_flag;
    std::map<std::string, CLI::App *> subs;
    for (const auto &c : cmds) {
        auto *sub = app.add_subcommand(c.name, c.help);
        subs[c.name] = sub;
        for (const auto &k : c.keys) {
            std::string help = k.help + (k.default_value.empty() ? "" : " [default: " + k.default_value + "]");
            std::string flag = "--" + k.name;
            options[c.name][k.name] = sub->add_option(flag, values[c.name][k.name], help);
        }
        sub->add_option("--config", config_path[c.name], "key = value config file (flags override it)");
        sub->add_flag("--dump-config", dump_flag[c.name], "print the effective config and exit");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }
    for (const auto &c : cmds) {
        if (!subs[c.name]->parsed()) continue;
        try {
            KeyValueConfig kv;
            for (const auto &k : c.keys) {
                if (!k.default_value.empty()) kv.set(k.name, k.default_value);
            }
            if (!config_path[c.name].empty()) {
                std::ifstream in(config_path[c.name]);
                if (!in) throw ConfigError("cannot read config '" + config_path[c.name] + "'");
                std::stringstream ss;
                ss << in.rdbuf();
                auto file = KeyValueConfig::parse(ss.str(), config_path[c.name]);
                for (const auto &[key, value] : file.entries()) {
                    bool known = std::any_of(c.keys.begin(), c.keys.end(), [&](const Key &k) { return k.name == key; });
                    bool noise = c.noise_keys && (key.rfind("recipe.", 0) == 0 || key.rfind("inject.", 0) == 0);
                    if (!known && !noise) {
                        throw ConfigError(config_path[c.name] + ": key '" + key + "' does not apply to " + c.name);
                    }
                    kv.set(key, value);
                }
            }
            for (const auto &k : c.keys) {
                if (options[c.name][k.name]->count() > 0) kv.set(k.name, values[c.name][k.name]);
            }
            if (dump_flag[c.name]) {
                std::cout << "# " << c.name << '\n' << kv.dump();
                return 0;
            }
            return c.run(kv);
        } catch (const ConfigError &e) {
            std::cerr << "config error: " << e.what() << '\n';
            return kExitConfig;
        } catch (const std::invalid_argument &e) {
            std::cerr << "config error: " << e.what() << '\n';
            return kExitConfig;
        } catch (const std::exception &e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitRuntime;
        }
    }
    return kExitConfig;
}
