#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "replan/semantic_map.hpp"

namespace replan {

/// Success rule for a retrieval attempt. `iou` applies to instance maps
/// (point-set extents, strict threshold: IoU must exceed it); `distance`
/// applies to grid maps (success when the chosen cell's world position lies
/// within the threshold of the nearest ground-truth object, inclusive).
struct SuccessCriterion {
  enum class Kind { iou, distance };
  Kind kind = Kind::iou;
  double iou_threshold = 0.25;
  double distance_threshold_m = 1.0;
};

const char* to_string(SuccessCriterion::Kind kind);
std::optional<SuccessCriterion::Kind> success_kind_from_string(std::string_view s);

/// Intersection-over-union of two point sets by exact coordinate identity.
/// Two empty sets have IoU 0.
double point_iou(const PointSet& a, const PointSet& b);

/// True when the chosen candidate matches any ground-truth candidate under
/// the criterion. ConfigError when the criterion kind does not match the
/// extent kinds.
bool is_success(const Candidate& chosen, std::span<const Candidate* const> gt,
                const SuccessCriterion& crit);

}  // namespace replan
