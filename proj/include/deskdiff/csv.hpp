// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "deskdiff/errors.hpp"

namespace deskdiff::csv {

// Floats are written with 9 significant digits everywhere.
inline std::string num(double v) { return fmt::format("{:.9g}", v); }

template <typename Range>
void write_row(std::ostream& out, const Range& cells) {
    bool first = true;
    for (const auto& cell : cells) {
        if (!first) out << ',';
        out << cell;
        first = false;
    }
    out << '\n';
}

inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view cell = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.remove_suffix(1);
        while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
        cells.emplace_back(cell);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::ptrdiff_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<std::ptrdiff_t>(i);
        }
        return -1;
    }
};

inline Table read(std::istream& in) {
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw DataError("csv: missing header row");
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = split(line);
        if (cells.size() != t.header.size()) throw DataError("csv: row width differs from header");
        t.rows.push_back(std::move(cells));
    }
    return t;
}

inline double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw DataError("csv: not a number: '" + s + "'");
    return v;
}

}  // namespace deskdiff::csv
