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

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "qram/dense.hpp"
#include "qram/mitigation.hpp"

namespace qram {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; "nan" / "inf" / "-inf" for non-finite values.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------------------------
// Least squares.

/// A straight-line fit y = intercept + slope * x over the listed rows.
struct Fit {
    std::string label;
    std::string x;  ///< abscissa, e.g. "log(param.layers)"
    std::string y;  ///< ordinate, e.g. "log(infidelity)"
    double slope = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
    double stderr_slope = std::numeric_limits<double>::quiet_NaN();
    double stderr_intercept = std::numeric_limits<double>::quiet_NaN();
    bool weighted = false;
    std::vector<size_t> rows;
};

/// Ordinary least squares, or inverse-variance weighted least squares when the per-point
/// standard deviations differ by more than 3x. `sigma` may be empty (always unweighted).
///
/// OLS standard errors come from the residuals (NaN with two points). WLS treats the sigmas
/// as known, so its standard errors are the propagated ones. Zero sigmas are floored at
/// 1e-9 of the largest, which pins the line through those points.
inline Fit fit_line(const std::vector<double> &x, const std::vector<double> &y, const std::vector<double> &sigma = {}) {
    const size_t n = x.size();
    if (n < 2 || y.size() != n || (!sigma.empty() && sigma.size() != n)) {
        throw std::invalid_argument("fit_line: need at least two points of matching length");
    }
    Fit f;
    std::vector<double> w(n, 1.0);
    if (!sigma.empty()) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0;
        for (double s : sigma) {
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        if (hi > 0 && (lo == 0 || hi / lo > 3.0)) {
            f.weighted = true;
            const double floor = hi * 1e-9;
            for (size_t i = 0; i < n; i++) {
                double s = std::max(sigma[i], floor);
                w[i] = 1.0 / (s * s);
            }
        }
    }
    double sw = 0, swx = 0, swy = 0;
    for (size_t i = 0; i < n; i++) {
        sw += w[i];
        swx += w[i] * x[i];
        swy += w[i] * y[i];
    }
    const double xb = swx / sw, yb = swy / sw;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; i++) {
        sxx += w[i] * (x[i] - xb) * (x[i] - xb);
        sxy += w[i] * (x[i] - xb) * (y[i] - yb);
    }
    if (!(sxx > 0)) throw std::invalid_argument("fit_line: abscissa has no spread");
    f.slope = sxy / sxx;
    f.intercept = yb - f.slope * xb;
    if (f.weighted) {
        f.stderr_slope = std::sqrt(1.0 / sxx);
        f.stderr_intercept = std::sqrt(1.0 / sw + xb * xb / sxx);
    } else if (n > 2) {
        double ssr = 0;
        for (size_t i = 0; i < n; i++) {
            double r = y[i] - f.intercept - f.slope * x[i];
            ssr += r * r;
        }
        double s2 = ssr / static_cast<double>(n - 2);
        f.stderr_slope = std::sqrt(s2 / sxx);
        f.stderr_intercept = std::sqrt(s2 * (1.0 / static_cast<double>(n) + xb * xb / sxx));
    }
    return f;
}

// ---------------------------------------------------------------------------------------------
// Results.

/// One sweep point. Absent estimates are written as empty CSV cells / JSON null.
struct ResultRow {
    std::vector<std::pair<std::string, Json>> params;
    std::optional<double> fidelity, fidelity_ci, infidelity, valid_fraction, valid_fraction_ci;
    uint64_t n_samples = 0;
    uint64_t seed = 0;
    std::vector<std::pair<std::string, double>> metrics;
    std::string flag;  ///< empty unless something is wrong with the row

    const Json *param(const std::string &name) const {
        for (const auto &[k, v] : params) {
            if (k == name) return &v;
        }
        return nullptr;
    }
    double param_double(const std::string &name) const {
        auto p = param(name);
        if (!p || !p->is_number()) throw std::out_of_range("row has no numeric param '" + name + "'");
        return p->get<double>();
    }
    std::optional<double> metric(const std::string &name) const {
        for (const auto &[k, v] : metrics) {
            if (k == name) return v;
        }
        return std::nullopt;
    }
    void set_estimate(const MitigatedEstimate &e) {
        fidelity = e.fidelity;
        fidelity_ci = e.fidelity_ci;
        infidelity = 1.0 - e.fidelity;
        valid_fraction = e.valid_fraction;
        valid_fraction_ci = e.valid_fraction_ci;
        n_samples = e.n_samples;
    }
};

inline constexpr const char *kStatisticalFailure = "ci_wider_than_value";

struct ExperimentResult {
    std::string id;
    std::vector<ResultRow> rows;
    std::vector<Fit> fits;
    std::vector<std::pair<std::string, std::string>> meta;

    bool any_flagged() const {
        for (const auto &r : rows) {
            if (!r.flag.empty()) return true;
        }
        return false;
    }

    const Fit *fit(const std::string &label) const {
        for (const auto &f : fits) {
            if (f.label == label) return &f;
        }
        return nullptr;
    }

    void add_meta(const std::string &k, const std::string &v) { meta.emplace_back(k, v); }

    /// Union of param and metric names, in first-seen order.
    std::vector<std::string> columns() const {
        std::vector<std::string> params, metrics;
        auto add = [](std::vector<std::string> &v, const std::string &s) {
            if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
        };
        for (const auto &r : rows) {
            for (const auto &p : r.params) add(params, p.first);
            for (const auto &m : r.metrics) add(metrics, m.first);
        }
        std::vector<std::string> out;
        for (const auto &p : params) out.push_back("param." + p);
        for (const char *c : {"fidelity", "fidelity_ci", "infidelity", "valid_fraction", "valid_fraction_ci",
                              "n_samples", "seed"}) {
            out.emplace_back(c);
        }
        for (const auto &m : metrics) out.push_back("metric." + m);
        out.emplace_back("flag");
        return out;
    }

    std::string to_csv() const {
        auto cols = columns();
        std::ostringstream out;
        for (size_t i = 0; i < cols.size(); i++) out << (i ? "," : "") << cols[i];
        out << '\n';
        auto opt = [](const std::optional<double> &v) { return v ? format_double(*v) : std::string(); };
        for (const auto &r : rows) {
            for (size_t i = 0; i < cols.size(); i++) {
                const auto &c = cols[i];
                std::string cell;
                if (c.rfind("param.", 0) == 0) {
                    if (auto p = r.param(c.substr(6))) cell = p->is_string() ? p->get<std::string>() : json_number(*p);
                } else if (c.rfind("metric.", 0) == 0) {
                    cell = opt(r.metric(c.substr(7)));
                } else if (c == "fidelity") {
                    cell = opt(r.fidelity);
                } else if (c == "fidelity_ci") {
                    cell = opt(r.fidelity_ci);
                } else if (c == "infidelity") {
                    cell = opt(r.infidelity);
                } else if (c == "valid_fraction") {
                    cell = opt(r.valid_fraction);
                } else if (c == "valid_fraction_ci") {
                    cell = opt(r.valid_fraction_ci);
                } else if (c == "n_samples") {
                    cell = std::to_string(r.n_samples);
                } else if (c == "seed") {
                    cell = std::to_string(r.seed);
                } else if (c == "flag") {
                    cell = r.flag;
                }
                out << (i ? "," : "") << cell;
            }
            out << '\n';
        }
        for (const auto &f : fits) {
            out << "# fit slope=" << format_double(f.slope) << " stderr=" << format_double(f.stderr_slope) << " rows=";
            for (size_t i = 0; i < f.rows.size(); i++) out << (i ? "," : "") << f.rows[i];
            out << " intercept=" << format_double(f.intercept)
                << " intercept_stderr=" << format_double(f.stderr_intercept)
                << " weighting=" << (f.weighted ? "inverse-variance" : "ols") << " label=" << f.label << " x=" << f.x
                << " y=" << f.y << '\n';
        }
        for (const auto &[k, v] : meta) out << "# meta " << k << "=" << v << '\n';
        return out.str();
    }

    Json to_json() const {
        Json j;
        j["id"] = id;
        j["columns"] = columns();
        auto opt = [](const std::optional<double> &v) { return v && std::isfinite(*v) ? Json(*v) : Json(nullptr); };
        j["rows"] = Json::array();
        for (const auto &r : rows) {
            Json row;
            for (const auto &[k, v] : r.params) row["param." + k] = v;
            row["fidelity"] = opt(r.fidelity);
            row["fidelity_ci"] = opt(r.fidelity_ci);
            row["infidelity"] = opt(r.infidelity);
            row["valid_fraction"] = opt(r.valid_fraction);
            row["valid_fraction_ci"] = opt(r.valid_fraction_ci);
            row["n_samples"] = r.n_samples;
            row["seed"] = r.seed;
            for (const auto &[k, v] : r.metrics) row["metric." + k] = opt(v);
            row["flag"] = r.flag;
            j["rows"].push_back(row);
        }
        j["fits"] = Json::array();
        for (const auto &f : fits) {
            j["fits"].push_back({{"label", f.label},
                                 {"x", f.x},
                                 {"y", f.y},
                                 {"slope", opt(f.slope)},
                                 {"stderr", opt(f.stderr_slope)},
                                 {"intercept", opt(f.intercept)},
                                 {"intercept_stderr", opt(f.stderr_intercept)},
                                 {"weighting", f.weighted ? "inverse-variance" : "ols"},
                                 {"rows", f.rows}});
        }
        Json meta_obj = Json::object();
        for (const auto &[k, v] : meta) meta_obj[k] = v;
        j["meta"] = meta_obj;
        return j;
    }

   private:
    static std::string json_number(const Json &v) {
        if (v.is_number_unsigned()) return std::to_string(v.get<uint64_t>());
        if (v.is_number_integer()) return std::to_string(v.get<int64_t>());
        if (v.is_number()) return format_double(v.get<double>());
        return v.dump();
    }
};

/// Parsed form of a CSV written by ExperimentResult::to_csv, used to validate the schema.
struct ParsedCsv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::map<std::string, std::string>> fits;
    std::map<std::string, std::string> meta;

    size_t column(const std::string &name) const {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw std::invalid_argument("CSV has no column '" + name + "'");
        return static_cast<size_t>(it - header.begin());
    }
};

/// Parses and checks an experiment CSV: required columns present, rows rectangular, fit
/// footers carrying slope/stderr/rows with row indices in range.
inline ParsedCsv parse_experiment_csv(const std::string &text) {
    ParsedCsv p;
    std::istringstream in(text);
    std::string line;
    auto split = [](const std::string &s, char sep) {
        std::vector<std::string> out;
        std::string cur;
        std::istringstream ss(s);
        while (std::getline(ss, cur, sep)) out.push_back(cur);
        if (!s.empty() && s.back() == sep) out.emplace_back();
        return out;
    };
    if (!std::getline(in, line) || line.empty() || line[0] == '#') throw std::invalid_argument("CSV: missing header row");
    p.header = split(line, ',');
    for (const char *c : {"fidelity", "fidelity_ci", "infidelity", "valid_fraction", "valid_fraction_ci", "n_samples",
                          "seed"}) {
        p.column(c);
    }
    for (const auto &h : p.header) {
        static const std::vector<std::string> fixed = {"fidelity",          "fidelity_ci", "infidelity",
                                                       "valid_fraction",    "valid_fraction_ci",
                                                       "n_samples",         "seed",        "flag"};
        if (h.rfind("param.", 0) != 0 && h.rfind("metric.", 0) != 0 &&
            std::find(fixed.begin(), fixed.end(), h) == fixed.end()) {
            throw std::invalid_argument("CSV: unexpected column '" + h + "'");
        }
    }
    size_t line_no = 1;
    while (std::getline(in, line)) {
        line_no++;
        if (line.rfind("# fit ", 0) == 0) {
            std::map<std::string, std::string> f;
            for (const auto &tok : split(line.substr(6), ' ')) {
                auto eq = tok.find('=');
                if (eq == std::string::npos) throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": bad fit token");
                f[tok.substr(0, eq)] = tok.substr(eq + 1);
            }
            for (const char *k : {"slope", "stderr", "rows"}) {
                if (!f.count(k)) throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": fit lacks " + k);
            }
            for (const auto &r : split(f["rows"], ',')) {
                if (std::stoul(r) >= p.rows.size()) throw std::invalid_argument("CSV: fit row index out of range");
            }
            p.fits.push_back(f);
        } else if (line.rfind("# meta ", 0) == 0) {
            auto body = line.substr(7);
            auto eq = body.find('=');
            p.meta[body.substr(0, eq)] = eq == std::string::npos ? "" : body.substr(eq + 1);
        } else if (!line.empty() && line[0] == '#') {
            continue;
        } else {
            if (!p.fits.empty()) throw std::invalid_argument("CSV: data row after footer");
            auto cells = split(line, ',');
            if (cells.size() != p.header.size()) {
                throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": expected " +
                                            std::to_string(p.header.size()) + " cells");
            }
            p.rows.push_back(cells);
        }
    }
    return p;
}

/// Writes `<dir>/<id>_seed<seed>.csv` and/or the JSON mirror; returns the paths written.
inline std::vector<std::string> write_result(const ExperimentResult &r, const std::string &dir, uint64_t seed,
                                             bool csv = true, bool json = true) {
    std::string base = (dir.empty() ? std::string(".") : dir) + "/" + r.id + "_seed" + std::to_string(seed);
    std::vector<std::string> out;
    auto write = [&](const std::string &path, const std::string &text) {
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot write " + path);
        f << text;
        out.push_back(path);
    };
    if (csv) write(base + ".csv", r.to_csv());
    if (json) write(base + ".json", r.to_json().dump(2) + "\n");
    return out;
}

// ---------------------------------------------------------------------------------------------
// Runners.

/// Independent stream for a (master seed, tag, index) triple.
inline uint64_t derive_seed(uint64_t seed, uint64_t tag, uint64_t index = 0) {
    return splitmix64(splitmix64(seed ^ splitmix64(tag)) + index);
}

struct RunOptions {
    uint64_t samples = 10000;
    uint64_t seed = 1;
    unsigned threads = 0;
};

namespace detail {

inline NoiseModel with_rates(NoiseModel m, double e_t, double e_s) {
    m.e_t = e_t;
    m.e_s = e_s;
    return m;
}

inline void flag_if_unresolved(ResultRow &r) {
    if (r.infidelity && r.fidelity_ci && *r.fidelity_ci > *r.infidelity) r.flag = kStatisticalFailure;
}

inline void require_samples(uint64_t n, uint64_t min, const char *who) {
    if (n < min) throw std::invalid_argument(std::string(who) + ": need at least " + std::to_string(min) + " samples");
}

}  // namespace detail

/// Infidelity vs L with all-ones data and the uniform address; fit of log(1 - F) vs log L.
/// `e_s_ratio` sets e_s = e_s_ratio * e_t.
inline ExperimentResult scaling_experiment(const std::vector<uint32_t> &layers, double e_t, const RunOptions &opt,
                                           double e_s_ratio = 0.1, const NoiseModel &base = {}) {
    detail::require_samples(opt.samples, 1000, "scaling_experiment");
    ExperimentResult res;
    res.id = "scaling";
    for (uint32_t L : layers) {
        if (L < 2 || L > 9) throw std::invalid_argument("scaling_experiment: layers must lie in [2, 9]");
        QramGeometry g(L);
        QueryTask task(g, AddressState::uniform(L), ClassicalData::filled(g.memory_size(), 1));
        NoiseModel model = detail::with_rates(base, e_t, e_t * e_s_ratio);
        auto samples = run_samples(task, model, {MitigationConfig{}}, opt.samples, derive_seed(opt.seed, L), opt.threads);
        ResultRow row;
        row.params = {{"layers", L}, {"e_t", e_t}, {"e_s", model.e_s}};
        row.set_estimate(estimate_column(samples, 0));
        row.seed = opt.seed;
        detail::flag_if_unresolved(row);
        res.rows.push_back(row);
    }
    std::vector<double> x, y, s;
    std::vector<size_t> idx;
    for (size_t i = 0; i < res.rows.size(); i++) {
        double inf = *res.rows[i].infidelity;
        if (!(inf > 0)) continue;
        idx.push_back(i);
        x.push_back(std::log(res.rows[i].param_double("layers")));
        y.push_back(std::log(inf));
        s.push_back(*res.rows[i].fidelity_ci / 1.96 / inf);
    }
    if (idx.size() >= 2) {
        Fit f = fit_line(x, y, s);
        f.label = "scaling";
        f.x = "log(param.layers)";
        f.y = "log(infidelity)";
        f.rows = idx;
        res.fits.push_back(f);
    } else {
        res.add_meta("fit", "absent");
    }
    res.add_meta("address", "uniform");
    res.add_meta("data", "all-ones");
    return res;
}

/// Mitigated fidelity vs K at fixed L on shared samples; fit of log(1 - F') vs log K over K >= 2.
inline ExperimentResult mitigation_sweep(uint32_t L, double e_t, const std::vector<uint32_t> &ks, const RunOptions &opt,
                                         SelectionMode mode = SelectionMode::All, double e_s_ratio = 0.1,
                                         std::optional<AddressState> address = std::nullopt,
                                         std::optional<ClassicalData> data = std::nullopt, bool strict = false) {
    detail::require_samples(opt.samples, 100, "mitigation_sweep");
    QramGeometry g(L);
    QueryTask task(g, address ? *address : AddressState::uniform(L),
                   data ? *data : ClassicalData::filled(g.memory_size(), 1));
    std::vector<MitigationConfig> configs;
    for (uint32_t k : ks) {
        if (k > L) throw std::invalid_argument("mitigation_sweep: K exceeds L");
        configs.push_back(MitigationConfig{k, mode, true, true});
    }
    NoiseModel model = detail::with_rates(NoiseModel{}, e_t, e_t * e_s_ratio);
    const uint64_t stream = derive_seed(opt.seed, L);
    auto samples = run_samples(task, model, configs, opt.samples, stream, opt.threads);
    ExperimentResult res;
    res.id = "mitigation_L" + std::to_string(L);
    for (size_t j = 0; j < ks.size(); j++) {
        ResultRow row;
        row.params = {{"layers", L}, {"e_t", e_t}, {"k", ks[j]}, {"mode", selection_mode_name(mode)}};
        row.set_estimate(estimate_column(samples, j, strict, stream));
        row.seed = opt.seed;
        res.rows.push_back(row);
    }
    std::vector<double> x, y, s;
    std::vector<size_t> idx;
    for (size_t i = 0; i < res.rows.size(); i++) {
        double k = res.rows[i].param_double("k"), inf = *res.rows[i].infidelity;
        if (k < 2 || !(inf > 0)) continue;
        idx.push_back(i);
        x.push_back(std::log(k));
        y.push_back(std::log(inf));
        s.push_back(*res.rows[i].fidelity_ci / 1.96 / inf);
    }
    if (idx.size() >= 2) {
        Fit f = fit_line(x, y, s);
        f.label = "mitigation";
        f.x = "log(param.k)";
        f.y = "log(infidelity)";
        f.rows = idx;
        res.fits.push_back(f);
    }
    res.add_meta("postselect", strict ? "strict" : "weighted");
    return res;
}

/// Exact fidelity with a depolarizing injection of probability p on `qubit` after data
/// loading: F(p) = (1 - p) F0 + (p / 3)(F_X + F_Y + F_Z). Dense engine, no other noise.
struct InjectionLine {
    double f0 = 1;
    double f_pauli[3] = {1, 1, 1};
    double at(double p) const { return (1 - p) * f0 + p / 3 * (f_pauli[0] + f_pauli[1] + f_pauli[2]); }
    /// dF / d e_d with e_d = 4p/3.
    double slope() const { return 0.75 * ((f_pauli[0] + f_pauli[1] + f_pauli[2]) / 3 - f0); }
};

inline InjectionLine injection_exact_line(const QramGeometry &g, const AddressState &address, const ClassicalData &data,
                                          Qubit qubit) {
    auto circuit = build_query_circuit(g, data);
    InjectionLine line;
    line.f0 = dense_query_fidelity(dense_run(circuit, address), g, address, data);
    const size_t pos = circuit.phase_end(Phase::DataLoading);
    int i = 0;
    for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z}) {
        ErrorConfiguration e;
        e.add(ErrorEvent{pos, qubit, p, true, CircuitIR::node_of(g, qubit)});
        e.injected_faults = 1;
        line.f_pauli[i++] = dense_query_fidelity(dense_run(circuit, address, e), g, address, data);
    }
    return line;
}

/// Role of the router qubit that receives the injection.
enum class InjectionTarget : uint8_t { Control, Incident };

/// Fidelity vs e_d = 4p/3 for a depolarizing injection after data loading on the router
/// qubits of each target node; one fit per node, plus the exact dense line for comparison
/// (when `with_exact` and the geometry is small enough for the dense engine).
inline ExperimentResult injection_experiment(uint32_t L, const AddressState &address, const ClassicalData &data,
                                             const std::vector<uint32_t> &nodes, const std::vector<double> &p_grid,
                                             const RunOptions &opt, double background_e_t = 0,
                                             InjectionTarget target = InjectionTarget::Control, bool with_exact = true) {
    detail::require_samples(opt.samples, 100, "injection_experiment");
    QramGeometry g(L);
    data.check(g);
    address.validate();
    QueryTask task(g, address, data);
    ExperimentResult res;
    res.id = "injection";
    for (uint32_t node : nodes) {
        if (node < 1 || node > g.node_count()) throw std::invalid_argument("injection_experiment: node out of range");
        const Qubit q = target == InjectionTarget::Control ? g.control(node) : g.incident(node);
        std::optional<InjectionLine> exact;
        if (with_exact && background_e_t == 0) exact = injection_exact_line(g, address, data, q);
        std::vector<double> x, y, s;
        std::vector<size_t> idx;
        for (size_t pi = 0; pi < p_grid.size(); pi++) {
            const double p = p_grid[pi];
            NoiseModel model = detail::with_rates(NoiseModel{}, background_e_t, background_e_t / 10);
            model.injections.push_back(Injection{q, Phase::DataLoading, p});
            auto samples = run_samples(task, model, {MitigationConfig{}}, opt.samples,
                                       derive_seed(opt.seed, node, pi), opt.threads);
            ResultRow row;
            row.params = {{"node", node}, {"qubit", g.name(q)}, {"p", p}, {"e_d", injection_rate(p)}};
            row.set_estimate(estimate_column(samples, 0));
            row.seed = opt.seed;
            if (exact) row.metrics.emplace_back("exact_fidelity", exact->at(p));
            idx.push_back(res.rows.size());
            x.push_back(injection_rate(p));
            y.push_back(*row.fidelity);
            s.push_back(*row.fidelity_ci / 1.96);
            res.rows.push_back(row);
        }
        if (idx.size() >= 2) {
            Fit f = fit_line(x, y, s);
            f.label = "node" + std::to_string(node);
            f.x = "param.e_d";
            f.y = "fidelity";
            f.rows = idx;
            res.fits.push_back(f);
        }
        if (exact) res.add_meta("exact_slope.node" + std::to_string(node), format_double(exact->slope()));
    }
    res.add_meta("background_e_t", format_double(background_e_t));
    res.add_meta("target", target == InjectionTarget::Control ? "control" : "incident");
    return res;
}

/// Von Neumann entropy (bits) of every control qubit after address loading; dense engine.
inline ExperimentResult entropy_by_layer(uint32_t L, const AddressState &address) {
    QramGeometry g(L);
    address.validate();
    auto circuit = build_query_circuit(g, ClassicalData::filled(g.memory_size(), 0)).truncated_after(Phase::AddressLoading);
    auto s = dense_run(circuit, address);
    ExperimentResult res;
    res.id = "entropy";
    for (uint32_t k = 1; k <= g.node_count(); k++) {
        ResultRow row;
        row.params = {{"layer", g.layer_of(k)}, {"node", k}, {"qubit", g.name(g.control(k))}};
        row.metrics.emplace_back("entropy", entanglement_entropy(reduced_density(s, {g.control(k)})));
        res.rows.push_back(row);
    }
    return res;
}

/// Per-layer representative (first node of each layer) entropies from an entropy_by_layer result.
inline std::vector<double> layer_entropies(const ExperimentResult &r) {
    std::vector<double> out;
    for (const auto &row : r.rows) {
        auto layer = static_cast<size_t>(row.param_double("layer"));
        if (layer > out.size()) out.push_back(*row.metric("entropy"));
    }
    return out;
}

/// F vs e_t on a grid for each L; per-L linear fit over F >= fit_floor, inverted for the
/// error level reaching each target, then log eps* vs log L for the exponent alpha.
inline ExperimentResult threshold_contour(const std::vector<uint32_t> &layers, const std::vector<double> &e_t_grid,
                                          const std::vector<double> &targets, const RunOptions &opt,
                                          double e_s_ratio = 0.1, double fit_floor = 0.8) {
    detail::require_samples(opt.samples, 100, "threshold_contour");
    ExperimentResult res;
    res.id = "contour";
    std::map<uint32_t, Fit> per_layer;
    for (uint32_t L : layers) {
        QramGeometry g(L);
        QueryTask task(g, AddressState::uniform(L), ClassicalData::filled(g.memory_size(), 1));
        std::vector<double> x, y, s;
        std::vector<size_t> idx;
        for (size_t ei = 0; ei < e_t_grid.size(); ei++) {
            const double e = e_t_grid[ei];
            NoiseModel model = detail::with_rates(NoiseModel{}, e, e * e_s_ratio);
            auto samples = run_samples(task, model, {MitigationConfig{}}, opt.samples, derive_seed(opt.seed, L, ei),
                                       opt.threads);
            ResultRow row;
            row.params = {{"layers", L}, {"e_t", e}};
            row.set_estimate(estimate_column(samples, 0));
            row.seed = opt.seed;
            if (*row.fidelity >= fit_floor) {
                idx.push_back(res.rows.size());
                x.push_back(e);
                y.push_back(*row.fidelity);
                s.push_back(*row.fidelity_ci / 1.96);
            }
            res.rows.push_back(row);
        }
        if (idx.size() < 2) throw std::runtime_error("threshold_contour: fewer than two grid points with F >= fit floor at L=" + std::to_string(L));
        Fit f = fit_line(x, y, s);
        f.label = "linear.L" + std::to_string(L);
        f.x = "param.e_t";
        f.y = "fidelity";
        f.rows = idx;
        res.fits.push_back(f);
        per_layer[L] = f;
    }
    for (double target : targets) {
        std::vector<double> x, y;
        std::vector<size_t> idx;
        for (uint32_t L : layers) {
            const Fit &f = per_layer[L];
            ResultRow row;
            row.params = {{"layers", L}, {"target", target}};
            row.seed = opt.seed;
            double eps;
            if (target >= 1.0) {
                eps = 0.0;
                row.flag = "degenerate";
            } else {
                eps = (target - f.intercept) / f.slope;
                double lo = std::numeric_limits<double>::infinity(), hi = -lo;
                for (size_t r : f.rows) {
                    lo = std::min(lo, *res.rows[r].fidelity);
                    hi = std::max(hi, *res.rows[r].fidelity);
                }
                if (target < lo || target > hi) {
                    throw std::runtime_error("threshold_contour: target " + format_double(target) +
                                             " not bracketed by the fitted grid at L=" + std::to_string(L));
                }
            }
            row.metrics.emplace_back("eps_star", eps);
            if (eps > 0) {
                idx.push_back(res.rows.size());
                x.push_back(std::log(static_cast<double>(L)));
                y.push_back(std::log(eps));
            }
            res.rows.push_back(row);
        }
        if (idx.size() >= 2) {
            Fit f = fit_line(x, y);
            f.label = "alpha.target" + format_double(target);
            f.x = "log(param.layers)";
            f.y = "log(metric.eps_star)";
            f.rows = idx;
            res.fits.push_back(f);
        }
    }
    res.add_meta("fit_floor", format_double(fit_floor));
    return res;
}

/// Six cardinal states as (label, amplitudes of |0>, |1>).
inline std::vector<std::pair<std::string, std::array<Complex, 2>>> cardinal_states() {
    const double s = 1 / std::sqrt(2.0);
    const Complex i(0, 1);
    return {{"0", {1.0, 0.0}}, {"1", {0.0, 1.0}},   {"+", {s, s}},
            {"-", {s, -s}},    {"+i", {s, i * s}}, {"-i", {s, -i * s}}};
}

/// Teleports each cardinal state through a Bell pair. PostSelect rows carry the keep
/// probability as valid_fraction; Feedforward rows compare the sampled Z marginal of the
/// destination over `samples` runs with the source's.
inline ExperimentResult teleport_experiment(const RunOptions &opt) {
    detail::require_samples(opt.samples, 100, "teleport_experiment");
    ExperimentResult res;
    res.id = "teleport";
    const Qubit src = 0, anc = 1, dst = 2;
    auto prepare = [&](const std::array<Complex, 2> &psi) {
        DenseState s(3, 3);
        Matrix u(2, 2);
        u << psi[0], -std::conj(psi[1]), psi[1], std::conj(psi[0]);
        s.apply(u, {src});
        s.activate(anc);
        s.activate(dst);
        return s;
    };
    auto fidelity_with = [&](const DenseState &s, const std::array<Complex, 2> &psi) {
        Matrix rho = reduced_density(s, {dst});
        Eigen::Vector2cd v(psi[0], psi[1]);
        return std::real(v.dot(rho * v)) / std::real(rho.trace());
    };
    auto states = cardinal_states();
    for (size_t si = 0; si < states.size(); si++) {
        const auto &[label, psi] = states[si];
        DenseState s = prepare(psi);
        double keep = teleport_retrieval(s, src, anc, dst, TeleportMode::PostSelect);
        ResultRow ps;
        ps.params = {{"state", label}, {"mode", "postselect"}};
        ps.fidelity = fidelity_with(s, psi);
        ps.fidelity_ci = 0.0;
        ps.infidelity = 1 - *ps.fidelity;
        ps.valid_fraction = keep;
        ps.valid_fraction_ci = 0.0;
        ps.n_samples = 1;
        ps.seed = opt.seed;
        res.rows.push_back(ps);

        const double p1 = std::norm(psi[1]);
        std::vector<double> fid(opt.samples);
        std::vector<uint8_t> outcome(opt.samples);
        parallel_for(opt.samples, opt.threads, [&](size_t i) {
            auto rng = sample_rng(derive_seed(opt.seed, si), i);
            DenseState t = prepare(psi);
            teleport_retrieval(t, src, anc, dst, TeleportMode::Feedforward, &rng);
            fid[i] = fidelity_with(t, psi);
            double q1 = t.probability(dst, 1) / t.total();
            outcome[i] = std::uniform_real_distribution<double>(0, 1)(rng) < q1 ? 1 : 0;
        });
        double fsum = 0, ones = 0;
        for (size_t i = 0; i < opt.samples; i++) {
            fsum += fid[i];
            ones += outcome[i];
        }
        const double n = static_cast<double>(opt.samples);
        ResultRow ff;
        ff.params = {{"state", label}, {"mode", "feedforward"}};
        ff.fidelity = fsum / n;
        ff.fidelity_ci = 0.0;
        ff.infidelity = 1 - *ff.fidelity;
        ff.valid_fraction = 1.0;
        ff.valid_fraction_ci = 0.0;
        ff.n_samples = opt.samples;
        ff.seed = opt.seed;
        ff.metrics = {{"p1_source", p1}, {"p1_estimate", ones / n}, {"p1_ci", 1.96 * std::sqrt(p1 * (1 - p1) / n)}};
        res.rows.push_back(ff);
    }
    res.add_meta("reference_hardware_average_fidelity", "0.994+-0.005");
    return res;
}

}  // namespace qram
