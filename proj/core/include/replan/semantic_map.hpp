#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace replan {

/// Distributions must sum to 1 within this tolerance to be considered valid.
inline constexpr double kDistributionSumTolerance = 1e-9;

struct ClassVocabulary {
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(labels.size()); }
  std::optional<int> index_of(const std::string& label) const;
  void validate() const;  // labels unique and non-empty
};

/// Probability vector over the vocabulary.
struct ClassDistribution {
  std::vector<double> probs;

  int size() const { return static_cast<int>(probs.size()); }
  void validate() const;
};

/// One observation of a candidate: a feature vector, the grounding model's
/// class distribution for that view, and a positive fusion weight.
struct ViewObservation {
  double weight = 1.0;
  std::vector<double> feature;
  ClassDistribution dist;
};

using Point3 = std::array<double, 3>;

struct PointSet {
  std::vector<Point3> points;
};

struct GridCell {
  int row = 0;
  int col = 0;
  std::array<double, 2> world{0.0, 0.0};  // meters
};

using SpatialExtent = std::variant<PointSet, GridCell>;

/// Uncertainty values optionally stored next to a candidate in the map file.
/// Values are advisory: loaders recompute and keep the cached number only when
/// it agrees within kCacheTolerance.
struct CachedMeasures {
  double entropy = 0.0;
  double std_error = 0.0;
  double pairwise_kl = 0.0;
};

inline constexpr double kCacheTolerance = 1e-6;

struct Candidate {
  int id = 0;
  std::vector<ViewObservation> views;
  SpatialExtent extent;
  std::optional<int> gt_class;
  std::optional<CachedMeasures> cache;

  int view_count() const { return static_cast<int>(views.size()); }
};

enum class MapKind { instance, grid };

const char* to_string(MapKind kind);
std::optional<MapKind> map_kind_from_string(std::string_view s);

/// A pre-explored scene: a class vocabulary plus candidates with their
/// per-view observations and spatial extents.
struct SemanticMap {
  ClassVocabulary vocabulary;
  std::vector<Candidate> candidates;
  MapKind kind = MapKind::instance;
  int feature_dim = 0;
  /// Convention used for any stored std_error cache values.
  bool cache_stderr_weighted = false;

  int class_count() const { return vocabulary.size(); }
  const Candidate* find(int id) const;

  /// Checks every invariant (unique ids, dimensions, normalized distributions,
  /// positive weights, extents matching kind). Throws ParseError naming the
  /// offending candidate.
  void validate() const;
};

/// Weighted mean of the candidate's per-view distributions:
/// fused[k] = sum_j w_j P_j[k] / sum_j w_j.
ClassDistribution fused_distribution(const Candidate& c);

/// Fused probability of class `cls`; throws DomainError if out of range.
double confidence(const Candidate& c, int cls);

}  // namespace replan
