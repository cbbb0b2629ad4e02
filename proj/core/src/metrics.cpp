#include "replan/metrics.hpp"

#include <cmath>
#include <set>

#include "replan/error.hpp"

namespace replan {

const char* to_string(SuccessCriterion::Kind kind) {
  return kind == SuccessCriterion::Kind::iou ? "iou" : "distance";
}

std::optional<SuccessCriterion::Kind> success_kind_from_string(std::string_view s) {
  if (s == "iou") return SuccessCriterion::Kind::iou;
  if (s == "distance") return SuccessCriterion::Kind::distance;
  return std::nullopt;
}

double point_iou(const PointSet& a, const PointSet& b) {
  std::set<Point3> sa(a.points.begin(), a.points.end());
  std::set<Point3> sb(b.points.begin(), b.points.end());
  std::size_t inter = 0;
  for (const auto& p : sa) {
    if (sb.count(p)) ++inter;
  }
  std::size_t uni = sa.size() + sb.size() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

double world_distance(const GridCell& a, const GridCell& b) {
  double dx = a.world[0] - b.world[0];
  double dy = a.world[1] - b.world[1];
  return std::hypot(dx, dy);
}

}  // namespace

bool is_success(const Candidate& chosen, std::span<const Candidate* const> gt,
                const SuccessCriterion& crit) {
  if (crit.kind == SuccessCriterion::Kind::iou) {
    const auto* cp = std::get_if<PointSet>(&chosen.extent);
    if (!cp) throw ConfigError("iou criterion requires point_set extents");
    for (const Candidate* g : gt) {
      const auto* gp = std::get_if<PointSet>(&g->extent);
      if (!gp) throw ConfigError("iou criterion requires point_set extents");
      if (point_iou(*cp, *gp) > crit.iou_threshold) return true;
    }
    return false;
  }
  const auto* cc = std::get_if<GridCell>(&chosen.extent);
  if (!cc) throw ConfigError("distance criterion requires grid_cell extents");
  for (const Candidate* g : gt) {
    const auto* gc = std::get_if<GridCell>(&g->extent);
    if (!gc) throw ConfigError("distance criterion requires grid_cell extents");
    if (world_distance(*cc, *gc) <= crit.distance_threshold_m) return true;
  }
  return false;
}

}  // namespace replan
