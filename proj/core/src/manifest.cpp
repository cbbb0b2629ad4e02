#include "replan/manifest.hpp"

#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "replan/error.hpp"
#include "replan/version.hpp"

namespace replan {

namespace {
using json = nlohmann::ordered_json;
}

std::string manifest_to_string(const RunManifest& m) {
  json j = json::object();
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["subcommand"] = m.subcommand;
  j["argv"] = m.argv;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  if (m.seed) j["seed"] = *m.seed;
  j["wall_clock_ms"] = m.wall_clock_ms;
  j["created_utc"] = m.created_utc;
  return j.dump(2) + "\n";
}

void save_manifest(const RunManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << manifest_to_string(m);
  if (!out) throw Error("write failed: " + path.string());
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    json j = json::parse(buf.str());
    RunManifest m;
    m.subcommand = j.at("subcommand").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.inputs = j.at("inputs").get<std::vector<std::string>>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    if (j.contains("seed")) m.seed = j["seed"].get<std::uint64_t>();
    m.wall_clock_ms = j.at("wall_clock_ms").get<double>();
    m.created_utc = j.at("created_utc").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace replan
