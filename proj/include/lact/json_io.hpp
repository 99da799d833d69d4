#pragma once

#include "lact/geometry.hpp"
#include "lact/phantom.hpp"

#include <json.hpp>

#include <filesystem>
#include <initializer_list>
#include <string>

namespace lact {

using Json = nlohmann::json;

/// Throws UsageError naming the first key of `j` not in `allowed`.
void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& what);

/// Reads `key` into `out` when present.
template <class T>
void read_optional(const Json& j, const char* key, T& out)
{
    if (auto it = j.find(key); it != j.end())
        out = it->get<T>();
}

Json to_json(const FanBeamGeometry& g);
FanBeamGeometry geometry_from_json(const Json& j, FanBeamGeometry base = {});

Json to_json(const phantom::DatasetManifest& m);
phantom::DatasetManifest manifest_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
/// Stable key order (sorted), two-space indent, trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

} // namespace lact
