// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "deskdiff/csv.hpp"
#include "deskdiff/errors.hpp"

namespace deskdiff {

// Flat `key = value` file. '#' starts a comment; blank lines are ignored.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in) {
        KeyValueConfig cfg;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos) {
                throw DataError("config line " + std::to_string(line_no) + ": expected key = value");
            }
            const std::string key = trim(trimmed.substr(0, eq));
            if (key.empty()) throw DataError("config line " + std::to_string(line_no) + ": empty key");
            cfg.values_[key] = trim(trimmed.substr(eq + 1));
        }
        return cfg;
    }

    static KeyValueConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open config '" + path + "'");
        return parse(in);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get(const std::string& key, const std::string& fallback) const {
        used_.insert(key);
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        return number(key);
    }

    std::size_t get_size(const std::string& key, std::size_t fallback) const {
        if (!has(key)) return fallback;
        const double v = number(key);
        if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
            throw DataError("config: '" + key + "' must be a non-negative integer");
        }
        return static_cast<std::size_t>(v);
    }

    bool get_bool(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string v = get(key, "");
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw DataError("config: '" + key + "' must be a boolean");
    }

    std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const {
        if (!has(key)) return fallback;
        std::vector<double> out;
        for (const auto& cell : csv::split(get(key, ""))) out.push_back(csv::parse_double(cell));
        return out;
    }

    // Keys present in the file that no getter asked for.
    std::vector<std::string> unused_keys() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_) {
            if (!used_.count(k)) out.push_back(k);
        }
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    double number(const std::string& key) const {
        try {
            return csv::parse_double(get(key, ""));
        } catch (const DataError&) {
            throw DataError("config: '" + key + "' is not a number");
        }
    }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

}  // namespace deskdiff
