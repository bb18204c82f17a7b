// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deskdiff/errors.hpp"

namespace deskdiff {

// One JSONL line: {"id": str, "width": int, "height": int, "tags": {class: [tag, ...]}}
struct ManifestItem {
    std::string id;
    int width = 0;
    int height = 0;
    std::map<std::string, std::vector<std::string>> tags;
};

using Manifest = std::vector<ManifestItem>;

inline ManifestItem manifest_item_from_json(const nlohmann::json& j) {
    ManifestItem item;
    try {
        item.id = j.at("id").get<std::string>();
        item.width = j.at("width").get<int>();
        item.height = j.at("height").get<int>();
        if (auto it = j.find("tags"); it != j.end() && !it->is_null()) {
            item.tags = it->get<std::map<std::string, std::vector<std::string>>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("manifest: ") + e.what());
    }
    if (item.width <= 0 || item.height <= 0) throw DataError("manifest: item '" + item.id + "' has non-positive size");
    return item;
}

inline nlohmann::json to_json(const ManifestItem& item) {
    return {{"id", item.id}, {"width", item.width}, {"height", item.height}, {"tags", item.tags}};
}

inline Manifest read_manifest(std::istream& in) {
    Manifest out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(manifest_item_from_json(j));
    }
    return out;
}

inline void write_manifest(std::ostream& out, const Manifest& manifest) {
    for (const auto& item : manifest) out << to_json(item).dump() << '\n';
}

}  // namespace deskdiff
