#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "replan/semantic_map.hpp"

namespace replan {

/// Serializes the map to its versioned text form. Reals are written in
/// shortest round-trip decimal, so save -> load -> save is byte-identical.
/// With `write_cache` every candidate gets freshly computed uncertainty
/// values embedded; otherwise cache entries already present are re-emitted.
std::string map_to_string(const SemanticMap& map, bool write_cache = false);

/// Parses and fully validates a map. Cached uncertainty values are verified
/// against recomputation; a value off by more than kCacheTolerance is replaced
/// by the recomputed one. `origin` names the source in error messages.
SemanticMap map_from_string(std::string_view text, std::string_view origin = "<string>");

void save_map(const SemanticMap& map, const std::filesystem::path& path, bool write_cache = false);
SemanticMap load_map(const std::filesystem::path& path);

}  // namespace replan
