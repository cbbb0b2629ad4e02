#include "replan/semantic_map.hpp"

#include <cmath>
#include <set>
#include <string>
#include <unordered_set>

#include "replan/error.hpp"

namespace replan {

std::optional<int> ClassVocabulary::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  return std::nullopt;
}

void ClassVocabulary::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& label : labels) {
    if (label.empty()) throw ParseError("vocabulary contains an empty label");
    if (!seen.insert(label).second) {
      throw ParseError("vocabulary label duplicated: " + label);
    }
  }
}

void ClassDistribution::validate() const {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw ParseError("distribution entry negative or NaN");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kDistributionSumTolerance) {
    throw ParseError("distribution does not sum to 1 (sum=" + std::to_string(sum) + ")");
  }
}

const char* to_string(MapKind kind) {
  return kind == MapKind::instance ? "instance" : "grid";
}

std::optional<MapKind> map_kind_from_string(std::string_view s) {
  if (s == "instance") return MapKind::instance;
  if (s == "grid") return MapKind::grid;
  return std::nullopt;
}

const Candidate* SemanticMap::find(int id) const {
  for (const auto& c : candidates) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

namespace {

void validate_candidate(const Candidate& c, const SemanticMap& map) {
  const std::string where = "candidate " + std::to_string(c.id);
  if (c.views.empty()) throw ParseError(where + ": no views");
  for (const auto& v : c.views) {
    if (!(v.weight > 0.0) || !std::isfinite(v.weight)) {
      throw ParseError(where + ": view weight must be positive and finite");
    }
    if (static_cast<int>(v.feature.size()) != map.feature_dim) {
      throw ParseError(where + ": feature length " + std::to_string(v.feature.size()) +
                       " != feature_dim " + std::to_string(map.feature_dim));
    }
    for (double x : v.feature) {
      if (!std::isfinite(x)) throw ParseError(where + ": feature entry not finite");
    }
    if (v.dist.size() != map.class_count()) {
      throw ParseError(where + ": distribution length " + std::to_string(v.dist.size()) +
                       " != vocabulary size " + std::to_string(map.class_count()));
    }
    try {
      v.dist.validate();
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  if (c.gt_class && (*c.gt_class < 0 || *c.gt_class >= map.class_count())) {
    throw ParseError(where + ": gt_class out of range");
  }
  if (map.kind == MapKind::instance) {
    const auto* ps = std::get_if<PointSet>(&c.extent);
    if (!ps) throw ParseError(where + ": instance map requires a point_set extent");
    if (ps->points.empty()) throw ParseError(where + ": point_set is empty");
    std::set<Point3> unique(ps->points.begin(), ps->points.end());
    if (unique.size() != ps->points.size()) {
      throw ParseError(where + ": point_set contains duplicate points");
    }
    for (const auto& p : ps->points) {
      for (double x : p) {
        if (!std::isfinite(x)) throw ParseError(where + ": point coordinate not finite");
      }
    }
  } else {
    if (!std::holds_alternative<GridCell>(c.extent)) {
      throw ParseError(where + ": grid map requires a grid_cell extent");
    }
  }
}

}  // namespace

void SemanticMap::validate() const {
  vocabulary.validate();
  if (class_count() == 0) throw ParseError("vocabulary is empty");
  if (feature_dim <= 0) throw ParseError("feature_dim must be positive");
  std::unordered_set<int> ids;
  for (const auto& c : candidates) {
    if (!ids.insert(c.id).second) {
      throw ParseError("candidate id duplicated: " + std::to_string(c.id));
    }
    validate_candidate(c, *this);
  }
}

ClassDistribution fused_distribution(const Candidate& c) {
  ClassDistribution out;
  if (c.views.empty()) throw DomainError("candidate has no views");
  out.probs.assign(c.views.front().dist.probs.size(), 0.0);
  double wsum = 0.0;
  for (const auto& v : c.views) {
    wsum += v.weight;
    for (std::size_t k = 0; k < out.probs.size(); ++k) {
      out.probs[k] += v.weight * v.dist.probs[k];
    }
  }
  for (double& p : out.probs) p /= wsum;
  return out;
}

double confidence(const Candidate& c, int cls) {
  ClassDistribution fused = fused_distribution(c);
  if (cls < 0 || cls >= fused.size()) {
    throw DomainError("class index " + std::to_string(cls) + " out of range");
  }
  return fused.probs[cls];
}

}  // namespace replan
