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

#include <cctype>
#include <charconv>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qram {

/// Raised for malformed or inconsistent configuration.
class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Flat `key = value` configuration.
///
/// Grammar: one entry per line; '#' starts a comment; blank lines ignored; keys are
/// [A-Za-z0-9_.-]+; values run to end of line with surrounding whitespace trimmed.
/// Duplicate keys are an error. Entries are kept sorted so dumps are canonical.
class KeyValueConfig {
   public:
    static KeyValueConfig parse(std::string_view text, std::string_view source = "config") {
        KeyValueConfig c;
        std::istringstream in{std::string(text)};
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            line_no++;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            auto t = trim(line);
            if (t.empty()) continue;
            auto fail = [&](const std::string &msg) {
                throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": " + msg);
            };
            auto eq = t.find('=');
            if (eq == std::string_view::npos) fail("expected 'key = value'");
            auto key = trim(t.substr(0, eq));
            auto value = trim(t.substr(eq + 1));
            if (key.empty()) fail("empty key");
            for (char ch : key) {
                if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.' || ch == '-')) {
                    fail("invalid character in key '" + std::string(key) + "'");
                }
            }
            if (!c.entries_.emplace(std::string(key), std::string(value)).second) {
                fail("duplicate key '" + std::string(key) + "'");
            }
        }
        return c;
    }

    bool has(const std::string &key) const { return entries_.count(key) != 0; }
    void set(const std::string &key, const std::string &value) { entries_[key] = value; }
    void set(const std::string &key, double value) {
        std::ostringstream o;
        o.precision(17);
        o << value;
        entries_[key] = o.str();
    }
    const std::map<std::string, std::string> &entries() const { return entries_; }

    std::string get_string(const std::string &key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) throw ConfigError("missing key '" + key + "'");
        return it->second;
    }
    std::string get_string(const std::string &key, const std::string &fallback) const {
        return has(key) ? get_string(key) : fallback;
    }

    double get_double(const std::string &key) const { return parse_double(get_string(key), key); }
    double get_double(const std::string &key, double fallback) const { return has(key) ? get_double(key) : fallback; }

    uint64_t get_uint(const std::string &key) const { return parse_uint(get_string(key), key); }
    uint64_t get_uint(const std::string &key, uint64_t fallback) const { return has(key) ? get_uint(key) : fallback; }

    std::string dump() const {
        std::ostringstream out;
        for (const auto &[k, v] : entries_) out << k << " = " << v << '\n';
        return out.str();
    }

    static double parse_double(const std::string &s, const std::string &what) {
        try {
            size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception &) {
            throw ConfigError("'" + what + "': expected a number, got '" + s + "'");
        }
    }

    static uint64_t parse_uint(const std::string &s, const std::string &what) {
        uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            throw ConfigError("'" + what + "': expected a non-negative integer, got '" + s + "'");
        }
        return v;
    }

   private:
    static std::string_view trim(std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    }

    std::map<std::string, std::string> entries_;
};

}  // namespace qram
