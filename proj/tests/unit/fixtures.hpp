#pragma once

#include <string>

#include "vaf/snapshot.hpp"

namespace vaf::test {

inline std::string fixture_path(const std::string& name) { return std::string(VAF_FIXTURES) + "/" + name; }

inline const LoadedSnapshot& fixture(const std::string& name) {
    static std::map<std::string, LoadedSnapshot> cache;
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, load_snapshot(fixture_path(name))).first;
    return it->second;
}

}  // namespace vaf::test
