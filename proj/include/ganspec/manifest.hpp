#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ganspec/error.hpp"

namespace ganspec {

/// One dataset entry: image path plus optional label (0 = real, 1 = fake).
struct ManifestEntry {
    std::string path;
    std::optional<int> label;
};

using Manifest = std::vector<ManifestEntry>;

/// Line-oriented JSON, one {"path": ..., "label": ...} object per line.
/// Corpora stay concatenable with plain `cat`.
inline void write_manifest(const Manifest& entries, const std::string& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw IoError("cannot write manifest " + file);
    for (const ManifestEntry& e : entries) {
        nlohmann::json j;
        j["path"] = e.path;
        if (e.label)
            j["label"] = *e.label;
        out << j.dump() << '\n';
    }
}

/// Relative entry paths are resolved against the manifest's directory so a
/// corpus directory can be moved as a unit.
inline Manifest read_manifest(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw IoError("cannot read manifest " + file);
    const std::filesystem::path base = std::filesystem::path(file).parent_path();

    Manifest entries;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(file + ":" + std::to_string(lineno) + ": bad manifest line: " + e.what());
        }
        if (!j.contains("path") || !j["path"].is_string())
            throw DataError(file + ":" + std::to_string(lineno) + ": manifest entry missing path");
        ManifestEntry entry;
        const std::string raw = j["path"].get<std::string>();
        if (!seen.insert(raw).second)
            throw DataError(file + ":" + std::to_string(lineno) + ": duplicate path " + raw);
        std::filesystem::path p(raw);
        entry.path = p.is_absolute() ? p.string() : (base / p).string();
        if (j.contains("label")) {
            if (!j["label"].is_number_integer())
                throw DataError(file + ":" + std::to_string(lineno) + ": label must be an integer");
            const int label = j["label"].get<int>();
            if (label != 0 && label != 1)
                throw DataError(file + ":" + std::to_string(lineno) + ": label must be 0 or 1, got " +
                                std::to_string(label));
            entry.label = label;
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

} // namespace ganspec
