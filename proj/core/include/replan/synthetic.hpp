#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "replan/semantic_map.hpp"

namespace replan {

enum class WeightModel { uniform, distance_decay };

const char* to_string(WeightModel w);
std::optional<WeightModel> weight_model_from_string(std::string_view s);

/// Simulated grounding model. Each candidate's per-view class distribution is
/// its true class's confusion row, perturbed by a Dirichlet draw with
/// concentration row/view_noise (view_noise 0 copies the row exactly, larger
/// values scatter the views more). Per-view features are the class anchor
/// plus isotropic Gaussian noise.
struct GroundingModelSpec {
  std::vector<std::vector<double>> confusion;  // row-stochastic, one row per class
  double view_noise = 0.0;
  double feature_noise_sigma = 0.0;
  int feature_dim = 8;
  int max_views = 5;  // views are capped here even if the scene asks for more
  WeightModel weight_model = WeightModel::uniform;

  int class_count() const { return static_cast<int>(confusion.size()); }
  void validate() const;
};

struct SceneSpec {
  int n_candidates = 0;
  /// Candidates per true class; empty spreads n_candidates round-robin.
  std::vector<int> class_counts;
  int views_min = 2;
  int views_max = 5;
  /// Fraction of candidates forced down to a single view.
  double single_view_rate = 0.1;
  MapKind kind = MapKind::instance;
  double room_size_m = 10.0;
  int points_per_instance = 16;
  std::uint64_t seed = 0;

  void validate(int class_count) const;
};

/// Deterministic in the scene seed; identical specs produce identical maps.
/// GenerationError when the room cannot hold the requested candidates.
SemanticMap generate_map(const SceneSpec& scene, const GroundingModelSpec& model);

struct Query {
  int class_id = -1;
  std::vector<int> gt_ids;
};

struct BenchmarkInstance {
  SemanticMap map;
  std::vector<Query> queries;
};

/// Map plus `queries_per_class` queries for every class present in it.
BenchmarkInstance make_benchmark(const SceneSpec& scene, const GroundingModelSpec& model,
                                 int queries_per_class);

/// Same, restricted to the given classes; GenerationError when a requested
/// class has no candidate in the map.
BenchmarkInstance make_benchmark(const SceneSpec& scene, const GroundingModelSpec& model,
                                 int queries_per_class, const std::vector<int>& query_classes);

std::vector<std::vector<double>> identity_confusion(int m);

struct BiasPair {
  int src = 0;  // true class whose predictions leak to dst
  int dst = 1;
};

/// Confusion matrix with systematic pairwise bias: each src row puts `rate`
/// mass on its dst plus a thin tail over filler classes (wide support, low
/// entropy peak), each dst row is a flatter profile over itself and two
/// filler classes (narrow support, higher entropy), fillers are near-diagonal.
/// Requires at least two classes beyond the pairs.
std::vector<std::vector<double>> make_biased_confusion(int m, const std::vector<BiasPair>& pairs,
                                                       double rate);

/// Benchmark manifest: {map path, queries with ground-truth ids}. The map is
/// saved next to the manifest and referenced by a relative path.
void save_benchmark(const BenchmarkInstance& bench, const std::filesystem::path& map_path,
                    const std::filesystem::path& manifest_path, bool write_cache = false);
BenchmarkInstance load_benchmark(const std::filesystem::path& manifest_path);

}  // namespace replan
