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

#include <fstream>
#include <sstream>

#include "qram/config.hpp"
#include "qram/geometry.hpp"

namespace qram {

/// Classical data spec: a bitstring of length 2^L, `all-ones` or `all-zeros`.
inline ClassicalData parse_data_spec(const std::string &spec, const QramGeometry &g) {
    ClassicalData d;
    if (spec == "all-ones") {
        d = ClassicalData::filled(g.memory_size(), 1);
    } else if (spec == "all-zeros") {
        d = ClassicalData::filled(g.memory_size(), 0);
    } else {
        try {
            d = ClassicalData::from_string(spec);
        } catch (const std::exception &e) {
            throw ConfigError("data: " + std::string(e.what()));
        }
    }
    if (d.bits.size() != g.memory_size()) {
        throw ConfigError("data: expected " + std::to_string(g.memory_size()) + " bits for " +
                          std::to_string(g.layers()) + " layers, got " + std::to_string(d.bits.size()));
    }
    return d;
}

namespace detail {

inline uint64_t parse_address_bits(const std::string &bits, uint32_t L, const std::string &what) {
    if (bits.size() != L) {
        throw ConfigError(what + ": '" + bits + "' has " + std::to_string(bits.size()) + " bits, expected " +
                          std::to_string(L));
    }
    uint64_t v = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') throw ConfigError(what + ": '" + bits + "' is not a bitstring");
        v = (v << 1) | static_cast<uint64_t>(c - '0');
    }
    return v;
}

}  // namespace detail

/// Address spec forms:
///   basis:<bits>          one computational basis address
///   uniform               |+...+>
///   bell:<b1>,<b2>        (|b1> + |b2>)/sqrt2
///   product:<pattern>     per-bit 0, 1, +, -
///   file:<path>           lines `<bits> <re> [<im>]`, '#' comments; must be normalized
inline AddressState parse_address_spec(const std::string &spec, uint32_t L) {
    auto rest = [&](const char *prefix) { return spec.substr(std::string(prefix).size()); };
    AddressState a;
    if (spec == "uniform") {
        a = AddressState::uniform(L);
    } else if (spec.rfind("basis:", 0) == 0) {
        a = AddressState::basis(L, detail::parse_address_bits(rest("basis:"), L, "address"));
    } else if (spec.rfind("bell:", 0) == 0) {
        auto body = rest("bell:");
        auto comma = body.find(',');
        if (comma == std::string::npos) throw ConfigError("address: bell form is bell:<bits>,<bits>");
        uint64_t x = detail::parse_address_bits(body.substr(0, comma), L, "address");
        uint64_t y = detail::parse_address_bits(body.substr(comma + 1), L, "address");
        if (x == y) throw ConfigError("address: bell components must differ");
        a = AddressState::equal(L, {x, y});
    } else if (spec.rfind("product:", 0) == 0) {
        auto pattern = rest("product:");
        if (pattern.size() != L) throw ConfigError("address: product pattern length must equal layers");
        try {
            a = AddressState::product(pattern);
        } catch (const std::exception &e) {
            throw ConfigError("address: " + std::string(e.what()));
        }
    } else if (spec.rfind("file:", 0) == 0) {
        auto path = rest("file:");
        std::ifstream in(path);
        if (!in) throw ConfigError("address: cannot read '" + path + "'");
        a.layers = L;
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            line_no++;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            std::istringstream ls(line);
            std::string bits;
            if (!(ls >> bits)) continue;
            double re = 0, im = 0;
            if (!(ls >> re)) throw ConfigError(path + ":" + std::to_string(line_no) + ": expected '<bits> <re> [<im>]'");
            ls >> im;
            a.components.push_back(
                {Complex(re, im), detail::parse_address_bits(bits, L, path + ":" + std::to_string(line_no))});
        }
    } else {
        throw ConfigError("address: unknown form '" + spec + "' (basis:, uniform, bell:, product:, file:)");
    }
    try {
        a.validate();
    } catch (const std::exception &e) {
        throw ConfigError("address: " + std::string(e.what()));
    }
    return a;
}

/// Comma-separated numbers.
inline std::vector<double> parse_double_list(const std::string &s, const std::string &what) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(KeyValueConfig::parse_double(tok, what));
    if (out.empty()) throw ConfigError("'" + what + "': empty list");
    return out;
}

/// `a..b` (inclusive) or a comma-separated list of non-negative integers.
inline std::vector<uint32_t> parse_uint_range(const std::string &s, const std::string &what) {
    std::vector<uint32_t> out;
    auto dots = s.find("..");
    if (dots != std::string::npos) {
        uint64_t lo = KeyValueConfig::parse_uint(s.substr(0, dots), what);
        uint64_t hi = KeyValueConfig::parse_uint(s.substr(dots + 2), what);
        if (hi < lo) throw ConfigError("'" + what + "': empty range '" + s + "'");
        for (uint64_t v = lo; v <= hi; v++) out.push_back(static_cast<uint32_t>(v));
        return out;
    }
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(static_cast<uint32_t>(KeyValueConfig::parse_uint(tok, what)));
    if (out.empty()) throw ConfigError("'" + what + "': empty list");
    return out;
}

}  // namespace qram
