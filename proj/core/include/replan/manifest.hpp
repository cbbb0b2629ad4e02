#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace replan {

/// Record of one tool invocation, written next to every produced file so a
/// run can be reproduced. Re-running the recorded argv regenerates the
/// outputs bit-exactly; wall_clock_ms and created_utc are informational and
/// excluded from that guarantee.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> argv;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;
  double wall_clock_ms = 0.0;
  std::string created_utc;
};

std::string manifest_to_string(const RunManifest& m);
void save_manifest(const RunManifest& m, const std::filesystem::path& path);
RunManifest load_manifest(const std::filesystem::path& path);

}  // namespace replan
