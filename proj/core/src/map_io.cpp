#include "replan/map_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "replan/error.hpp"
#include "replan/uncertainty.hpp"

namespace replan {

namespace {

using json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kFormatVersion = 1;

json number_or_inf(double v) {
  if (v == kInf) return json("inf");
  return json(v);
}

double parse_number_or_inf(const json& j, const std::string& where) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInf;
    throw ParseError(where + ": expected a number or \"inf\"");
  }
  if (!j.is_number()) throw ParseError(where + ": expected a number");
  return j.get<double>();
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ParseError(where + ": unknown field \"" + item.key() + "\"");
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field \"" + std::string(key) + "\"");
  return *it;
}

std::vector<double> parse_real_vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw ParseError(where + ": expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

json extent_to_json(const SpatialExtent& extent) {
  json j = json::object();
  if (const auto* ps = std::get_if<PointSet>(&extent)) {
    json points = json::array();
    for (const auto& p : ps->points) points.push_back(json{p[0], p[1], p[2]});
    j["point_set"] = std::move(points);
  } else {
    const auto& cell = std::get<GridCell>(extent);
    json c = json::object();
    c["row"] = cell.row;
    c["col"] = cell.col;
    c["world"] = json{cell.world[0], cell.world[1]};
    j["grid_cell"] = std::move(c);
  }
  return j;
}

SpatialExtent parse_extent(const json& j, const std::string& where) {
  if (!j.is_object() || j.size() != 1) {
    throw ParseError(where + ": extent must hold exactly one of point_set / grid_cell");
  }
  if (j.contains("point_set")) {
    const json& arr = j["point_set"];
    if (!arr.is_array()) throw ParseError(where + ": point_set must be an array");
    PointSet ps;
    for (const auto& p : arr) {
      auto v = parse_real_vector(p, where + ".point_set");
      if (v.size() != 3) throw ParseError(where + ": points must have 3 coordinates");
      ps.points.push_back({v[0], v[1], v[2]});
    }
    return ps;
  }
  if (j.contains("grid_cell")) {
    const json& c = j["grid_cell"];
    if (!c.is_object()) throw ParseError(where + ": grid_cell must be an object");
    check_keys(c, {"row", "col", "world"}, where + ".grid_cell");
    GridCell cell;
    cell.row = require(c, "row", where).get<int>();
    cell.col = require(c, "col", where).get<int>();
    auto w = parse_real_vector(require(c, "world", where), where + ".world");
    if (w.size() != 2) throw ParseError(where + ": world must have 2 coordinates");
    cell.world = {w[0], w[1]};
    return cell;
  }
  throw ParseError(where + ": extent must hold point_set or grid_cell");
}

bool cache_value_ok(double cached, double fresh) {
  if (cached == kInf || fresh == kInf) return cached == fresh;
  return std::abs(cached - fresh) <= kCacheTolerance;
}

}  // namespace

std::string map_to_string(const SemanticMap& map, bool write_cache) {
  json j = json::object();
  j["version"] = kFormatVersion;
  j["kind"] = to_string(map.kind);
  j["feature_dim"] = map.feature_dim;
  j["vocabulary"] = map.vocabulary.labels;

  bool any_cache = write_cache;
  if (!any_cache) {
    for (const auto& c : map.candidates) {
      if (c.cache) {
        any_cache = true;
        break;
      }
    }
  }
  if (any_cache) {
    json meta = json::object();
    meta["sigma"] = "population";
    meta["stderr_weighted"] = map.cache_stderr_weighted;
    j["cache_meta"] = std::move(meta);
  }

  json candidates = json::array();
  for (const auto& c : map.candidates) {
    json jc = json::object();
    jc["id"] = c.id;
    if (c.gt_class) jc["gt_class"] = *c.gt_class;
    jc["extent"] = extent_to_json(c.extent);
    json views = json::array();
    for (const auto& v : c.views) {
      json jv = json::object();
      jv["weight"] = v.weight;
      jv["feature"] = v.feature;
      jv["dist"] = v.dist.probs;
      views.push_back(std::move(jv));
    }
    jc["views"] = std::move(views);

    std::optional<CachedMeasures> cache = c.cache;
    if (write_cache) {
      cache = CachedMeasures{candidate_entropy(c),
                             stderr_channel_avg(c, map.cache_stderr_weighted).value,
                             mean_pairwise_kl(c).value};
    }
    if (cache) {
      json jcache = json::object();
      jcache["entropy"] = number_or_inf(cache->entropy);
      jcache["stderr"] = number_or_inf(cache->std_error);
      jcache["pwkl"] = number_or_inf(cache->pairwise_kl);
      jc["cache"] = std::move(jcache);
    }
    candidates.push_back(std::move(jc));
  }
  j["candidates"] = std::move(candidates);
  return j.dump(2) + "\n";
}

SemanticMap map_from_string(std::string_view text, std::string_view origin) {
  const std::string where = std::string(origin);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
  try {
    if (!j.is_object()) throw ParseError(where + ": top level must be an object");
    check_keys(j, {"version", "kind", "feature_dim", "vocabulary", "cache_meta", "candidates"},
               where);
    int version = require(j, "version", where).get<int>();
    if (version != kFormatVersion) {
      throw ParseError(where + ": unsupported version " + std::to_string(version));
    }
    SemanticMap map;
    auto kind = map_kind_from_string(require(j, "kind", where).get<std::string>());
    if (!kind) throw ParseError(where + ": kind must be \"instance\" or \"grid\"");
    map.kind = *kind;
    map.feature_dim = require(j, "feature_dim", where).get<int>();
    for (const auto& label : require(j, "vocabulary", where)) {
      if (!label.is_string()) throw ParseError(where + ": vocabulary entries must be strings");
      map.vocabulary.labels.push_back(label.get<std::string>());
    }
    if (j.contains("cache_meta")) {
      const json& meta = j["cache_meta"];
      check_keys(meta, {"sigma", "stderr_weighted"}, where + ".cache_meta");
      if (require(meta, "sigma", where).get<std::string>() != "population") {
        throw ParseError(where + ": cache_meta.sigma must be \"population\"");
      }
      map.cache_stderr_weighted = require(meta, "stderr_weighted", where).get<bool>();
    }

    const json& cands = require(j, "candidates", where);
    if (!cands.is_array()) throw ParseError(where + ": candidates must be an array");
    for (const auto& jc : cands) {
      std::string cwhere = where + ": candidate";
      if (jc.contains("id") && jc["id"].is_number_integer()) {
        cwhere += " " + std::to_string(jc["id"].get<int>());
      }
      check_keys(jc, {"id", "gt_class", "extent", "views", "cache"}, cwhere);
      Candidate c;
      c.id = require(jc, "id", cwhere).get<int>();
      if (jc.contains("gt_class")) c.gt_class = jc["gt_class"].get<int>();
      c.extent = parse_extent(require(jc, "extent", cwhere), cwhere);
      const json& views = require(jc, "views", cwhere);
      if (!views.is_array()) throw ParseError(cwhere + ": views must be an array");
      for (const auto& jv : views) {
        check_keys(jv, {"weight", "feature", "dist"}, cwhere + ".view");
        ViewObservation v;
        const json& w = require(jv, "weight", cwhere);
        if (!w.is_number()) throw ParseError(cwhere + ": weight must be a number");
        v.weight = w.get<double>();
        v.feature = parse_real_vector(require(jv, "feature", cwhere), cwhere + ".feature");
        v.dist.probs = parse_real_vector(require(jv, "dist", cwhere), cwhere + ".dist");
        c.views.push_back(std::move(v));
      }
      if (jc.contains("cache")) {
        const json& jcache = jc["cache"];
        check_keys(jcache, {"entropy", "stderr", "pwkl"}, cwhere + ".cache");
        CachedMeasures cache;
        cache.entropy = parse_number_or_inf(require(jcache, "entropy", cwhere), cwhere);
        cache.std_error = parse_number_or_inf(require(jcache, "stderr", cwhere), cwhere);
        cache.pairwise_kl = parse_number_or_inf(require(jcache, "pwkl", cwhere), cwhere);
        c.cache = cache;
      }
      map.candidates.push_back(std::move(c));
    }

    try {
      map.validate();
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }

    // Cached values are advisory: recompute, and keep a stored value only
    // when it agrees with the recomputation.
    for (auto& c : map.candidates) {
      if (!c.cache) continue;
      CachedMeasures fresh{candidate_entropy(c),
                           stderr_channel_avg(c, map.cache_stderr_weighted).value,
                           mean_pairwise_kl(c).value};
      if (!cache_value_ok(c.cache->entropy, fresh.entropy)) c.cache->entropy = fresh.entropy;
      if (!cache_value_ok(c.cache->std_error, fresh.std_error)) {
        c.cache->std_error = fresh.std_error;
      }
      if (!cache_value_ok(c.cache->pairwise_kl, fresh.pairwise_kl)) {
        c.cache->pairwise_kl = fresh.pairwise_kl;
      }
    }
    return map;
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

void save_map(const SemanticMap& map, const std::filesystem::path& path, bool write_cache) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << map_to_string(map, write_cache);
  if (!out) throw Error("write failed: " + path.string());
}

SemanticMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return map_from_string(buf.str(), path.string());
}

}  // namespace replan
