#include "replan/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "replan/error.hpp"
#include "replan/map_io.hpp"
#include "replan/rng.hpp"

namespace replan {

namespace {

using json = nlohmann::ordered_json;

// Stream tags so each candidate draws from an independent substream.
constexpr std::uint64_t kCandidateStream = 0x11;
constexpr std::uint64_t kAnchorSeed = 0xa3c59ac2f1e1b7ull;

// Scene geometry floors: an instance needs a footprint of this size, a grid
// cell can be smaller.
constexpr double kMinInstanceCell = 0.5;
constexpr double kMinGridCell = 0.05;

// Biased-confusion profile. Source rows are peaked on their target with a
// thin tail over every filler class (wide support, low entropy); target rows
// spread over themselves and two fillers (narrow support, higher entropy).
constexpr double kBiasSelfTail = 0.048;
constexpr double kBiasTargetPeak = 0.46;
constexpr double kBiasTargetSpread = 0.27;
constexpr double kFillerPeak = 0.88;

}  // namespace

const char* to_string(WeightModel w) {
  return w == WeightModel::uniform ? "uniform" : "distance_decay";
}

std::optional<WeightModel> weight_model_from_string(std::string_view s) {
  if (s == "uniform") return WeightModel::uniform;
  if (s == "distance_decay") return WeightModel::distance_decay;
  return std::nullopt;
}

void GroundingModelSpec::validate() const {
  const int m = class_count();
  if (m < 2) throw GenerationError("confusion matrix needs at least 2 classes");
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(confusion[i].size()) != m) {
      throw GenerationError("confusion matrix must be square");
    }
    double sum = 0.0;
    for (double p : confusion[i]) {
      if (!(p >= 0.0)) throw GenerationError("confusion entries must be non-negative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kDistributionSumTolerance) {
      throw GenerationError("confusion row " + std::to_string(i) + " does not sum to 1");
    }
  }
  if (!(view_noise >= 0.0)) throw GenerationError("view_noise must be non-negative");
  if (!(feature_noise_sigma >= 0.0)) {
    throw GenerationError("feature_noise_sigma must be non-negative");
  }
  if (feature_dim < 1) throw GenerationError("feature_dim must be positive");
  if (max_views < 1) throw GenerationError("max_views must be positive");
}

void SceneSpec::validate(int class_count) const {
  if (n_candidates < 1) throw GenerationError("n_candidates must be positive");
  if (!class_counts.empty()) {
    if (static_cast<int>(class_counts.size()) != class_count) {
      throw GenerationError("class_counts size must match the class count");
    }
    int sum = 0;
    for (int c : class_counts) {
      if (c < 0) throw GenerationError("class_counts entries must be non-negative");
      sum += c;
    }
    if (sum != n_candidates) {
      throw GenerationError("class_counts must sum to n_candidates");
    }
  }
  if (views_min < 1 || views_max < views_min) {
    throw GenerationError("need 1 <= views_min <= views_max");
  }
  if (!(single_view_rate >= 0.0 && single_view_rate <= 1.0)) {
    throw GenerationError("single_view_rate must lie in [0, 1]");
  }
  if (!(room_size_m > 0.0)) throw GenerationError("room_size_m must be positive");
  if (points_per_instance < 1) throw GenerationError("points_per_instance must be positive");
}

namespace {

std::vector<double> class_anchor(int cls, int dim, int class_count) {
  std::vector<double> anchor(dim, 0.0);
  if (dim >= class_count) {
    anchor[cls] = 1.0;  // orthonormal basis
    return anchor;
  }
  Rng rng = Rng::derive(kAnchorSeed, {static_cast<std::uint64_t>(cls),
                                      static_cast<std::uint64_t>(dim)});
  double norm = 0.0;
  for (double& x : anchor) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    anchor[0] = 1.0;
    return anchor;
  }
  for (double& x : anchor) x /= norm;
  return anchor;
}

std::vector<int> spread_counts(int n, int m) {
  std::vector<int> counts(m, n / m);
  for (int i = 0; i < n % m; ++i) ++counts[i];
  return counts;
}

ClassDistribution draw_view_dist(Rng& rng, const std::vector<double>& row, double view_noise) {
  ClassDistribution dist;
  if (view_noise == 0.0) {
    dist.probs = row;
    return dist;
  }
  std::vector<double> alpha(row.size());
  for (std::size_t k = 0; k < row.size(); ++k) alpha[k] = row[k] / view_noise;
  dist.probs = rng.dirichlet(alpha);
  return dist;
}

PointSet draw_point_set(Rng& rng, double cx, double cy, double half, int count) {
  PointSet ps;
  std::set<Point3> seen;
  for (int i = 0; i < count; ++i) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      Point3 p{cx + (2.0 * rng.next_double() - 1.0) * half,
               cy + (2.0 * rng.next_double() - 1.0) * half, rng.next_double() * 1.5};
      if (seen.insert(p).second) {
        ps.points.push_back(p);
        break;
      }
    }
  }
  if (static_cast<int>(ps.points.size()) != count) {
    throw GenerationError("could not draw distinct instance points");
  }
  return ps;
}

}  // namespace

SemanticMap generate_map(const SceneSpec& scene, const GroundingModelSpec& model) {
  model.validate();
  const int m = model.class_count();
  scene.validate(m);

  const int n = scene.n_candidates;
  const int grid_dim = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const double cell = scene.room_size_m / static_cast<double>(grid_dim);
  const double min_cell = scene.kind == MapKind::instance ? kMinInstanceCell : kMinGridCell;
  if (cell < min_cell) {
    throw GenerationError("room of " + std::to_string(scene.room_size_m) +
                          " m cannot hold " + std::to_string(n) + " candidates");
  }

  std::vector<int> counts = scene.class_counts.empty() ? spread_counts(n, m) : scene.class_counts;

  SemanticMap map;
  map.kind = scene.kind;
  map.feature_dim = model.feature_dim;
  for (int c = 0; c < m; ++c) {
    char label[20];
    std::snprintf(label, sizeof(label), "class_%02d", c);
    map.vocabulary.labels.emplace_back(label);
  }

  std::vector<std::vector<double>> anchors;
  anchors.reserve(m);
  for (int c = 0; c < m; ++c) anchors.push_back(class_anchor(c, model.feature_dim, m));

  int gt = 0;
  int remaining = counts[0];
  for (int i = 0; i < n; ++i) {
    while (remaining == 0) remaining = counts[++gt];
    --remaining;

    Rng rng = Rng::derive(scene.seed, {kCandidateStream, static_cast<std::uint64_t>(i)});
    Candidate cand;
    cand.id = i;
    cand.gt_class = gt;

    int views = scene.views_min;
    if (scene.views_max > scene.views_min) {
      views += static_cast<int>(rng.pick_index(
          static_cast<std::size_t>(scene.views_max - scene.views_min + 1)));
    }
    if (rng.next_double() < scene.single_view_rate) views = 1;
    views = std::min(views, model.max_views);

    const std::vector<double>& row = model.confusion[gt];
    for (int v = 0; v < views; ++v) {
      ViewObservation view;
      view.dist = draw_view_dist(rng, row, model.view_noise);
      view.feature = anchors[gt];
      if (model.feature_noise_sigma > 0.0) {
        for (double& x : view.feature) x += model.feature_noise_sigma * rng.normal();
      }
      if (model.weight_model == WeightModel::uniform) {
        view.weight = 1.0;
      } else {
        double dist_m = 0.5 + 2.5 * rng.next_double();
        view.weight = 1.0 / dist_m;
      }
      cand.views.push_back(std::move(view));
    }

    const int r = i / grid_dim;
    const int col = i % grid_dim;
    const double cx = (static_cast<double>(col) + 0.5) * cell;
    const double cy = (static_cast<double>(r) + 0.5) * cell;
    if (scene.kind == MapKind::instance) {
      double jx = (2.0 * rng.next_double() - 1.0) * 0.1 * cell;
      double jy = (2.0 * rng.next_double() - 1.0) * 0.1 * cell;
      cand.extent = draw_point_set(rng, cx + jx, cy + jy, 0.3 * cell, scene.points_per_instance);
    } else {
      cand.extent = GridCell{r, col, {cx, cy}};
    }
    map.candidates.push_back(std::move(cand));
  }

  map.validate();
  return map;
}

BenchmarkInstance make_benchmark(const SceneSpec& scene, const GroundingModelSpec& model,
                                 int queries_per_class) {
  return make_benchmark(scene, model, queries_per_class, {});
}

BenchmarkInstance make_benchmark(const SceneSpec& scene, const GroundingModelSpec& model,
                                 int queries_per_class, const std::vector<int>& query_classes) {
  if (queries_per_class < 1) throw GenerationError("queries_per_class must be positive");
  BenchmarkInstance bench;
  bench.map = generate_map(scene, model);

  std::vector<std::vector<int>> by_class(bench.map.class_count());
  for (const auto& c : bench.map.candidates) {
    by_class[*c.gt_class].push_back(c.id);
  }

  std::vector<int> classes = query_classes;
  if (classes.empty()) {
    for (int c = 0; c < bench.map.class_count(); ++c) {
      if (!by_class[c].empty()) classes.push_back(c);
    }
  }
  for (int c : classes) {
    if (c < 0 || c >= bench.map.class_count() || by_class[c].empty()) {
      throw GenerationError("query class " + std::to_string(c) + " is absent from the map");
    }
    for (int q = 0; q < queries_per_class; ++q) {
      bench.queries.push_back({c, by_class[c]});
    }
  }
  return bench;
}

std::vector<std::vector<double>> identity_confusion(int m) {
  std::vector<std::vector<double>> c(m, std::vector<double>(m, 0.0));
  for (int i = 0; i < m; ++i) c[i][i] = 1.0;
  return c;
}

std::vector<std::vector<double>> make_biased_confusion(int m, const std::vector<BiasPair>& pairs,
                                                       double rate) {
  if (pairs.empty()) throw GenerationError("make_biased_confusion: no pairs given");
  std::unordered_set<int> paired;
  for (const auto& p : pairs) {
    if (p.src < 0 || p.src >= m || p.dst < 0 || p.dst >= m || p.src == p.dst) {
      throw GenerationError("make_biased_confusion: bad pair");
    }
    if (!paired.insert(p.src).second || !paired.insert(p.dst).second) {
      throw GenerationError("make_biased_confusion: classes reused across pairs");
    }
  }
  std::vector<int> fillers;
  for (int c = 0; c < m; ++c) {
    if (!paired.count(c)) fillers.push_back(c);
  }
  if (fillers.size() < 2) {
    throw GenerationError("make_biased_confusion: need at least 2 classes beyond the pairs");
  }
  if (!(rate > 0.5 && rate <= 1.0 - kBiasSelfTail)) {
    throw GenerationError("make_biased_confusion: rate must lie in (0.5, " +
                          std::to_string(1.0 - kBiasSelfTail) + "]");
  }

  const int nf = static_cast<int>(fillers.size());
  std::vector<std::vector<double>> conf(m, std::vector<double>(m, 0.0));

  for (int f = 0; f < nf; ++f) {
    int self = fillers[f];
    if (nf == 1) {
      conf[self][self] = 1.0;
      continue;
    }
    conf[self][self] = kFillerPeak;
    double spread = (1.0 - kFillerPeak) / static_cast<double>(nf - 1);
    for (int g = 0; g < nf; ++g) {
      if (g != f) conf[self][fillers[g]] = spread;
    }
  }

  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    const auto& p = pairs[pi];
    auto& src_row = conf[p.src];
    src_row[p.dst] = rate;
    src_row[p.src] = 1.0 - rate - kBiasSelfTail;
    double tail = kBiasSelfTail / static_cast<double>(nf);
    for (int f : fillers) src_row[f] = tail;

    auto& dst_row = conf[p.dst];
    std::fill(dst_row.begin(), dst_row.end(), 0.0);
    dst_row[p.dst] = kBiasTargetPeak;
    int f1 = fillers[(2 * pi) % fillers.size()];
    int f2 = fillers[(2 * pi + 1) % fillers.size()];
    dst_row[f1] += kBiasTargetSpread;
    dst_row[f2] += kBiasTargetSpread;
  }
  return conf;
}

void save_benchmark(const BenchmarkInstance& bench, const std::filesystem::path& map_path,
                    const std::filesystem::path& manifest_path, bool write_cache) {
  save_map(bench.map, map_path, write_cache);

  std::filesystem::path rel = map_path.filename();
  auto manifest_dir = manifest_path.parent_path();
  if (!manifest_dir.empty() && map_path.has_parent_path()) {
    std::error_code ec;
    auto r = std::filesystem::relative(map_path, manifest_dir, ec);
    if (!ec && !r.empty()) rel = r;
  }

  json j = json::object();
  j["version"] = 1;
  j["map"] = rel.generic_string();
  json queries = json::array();
  for (const auto& q : bench.queries) {
    json jq = json::object();
    jq["class"] = q.class_id;
    jq["gt"] = q.gt_ids;
    queries.push_back(std::move(jq));
  }
  j["queries"] = std::move(queries);

  std::ofstream out(manifest_path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + manifest_path.string());
  out << j.dump(2) << "\n";
  if (!out) throw Error("write failed: " + manifest_path.string());
}

BenchmarkInstance load_benchmark(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw Error("cannot open: " + manifest_path.string());
  std::ostringstream buf;
  buf << in.rdbuf();

  const std::string where = manifest_path.string();
  json j;
  try {
    j = json::parse(buf.str());
    if (!j.is_object() || !j.contains("map") || !j.contains("queries")) {
      throw ParseError(where + ": benchmark manifest needs map and queries");
    }
    BenchmarkInstance bench;
    std::filesystem::path map_path(j["map"].get<std::string>());
    if (map_path.is_relative()) map_path = manifest_path.parent_path() / map_path;
    bench.map = load_map(map_path);

    for (const auto& jq : j["queries"]) {
      Query q;
      q.class_id = jq.at("class").get<int>();
      if (q.class_id < 0 || q.class_id >= bench.map.class_count()) {
        throw ParseError(where + ": query class out of range");
      }
      for (const auto& id : jq.at("gt")) {
        int gid = id.get<int>();
        if (!bench.map.find(gid)) {
          throw ParseError(where + ": gt id " + std::to_string(gid) + " not in map");
        }
        q.gt_ids.push_back(gid);
      }
      bench.queries.push_back(std::move(q));
    }
    return bench;
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

}  // namespace replan
