#include "navforge/geometry.hpp"

#include <algorithm>

namespace navforge {

bool valid_transform(const Transform& t, std::string* why) {
  if (!finite(t.location)) {
    if (why) *why = "location has a non-finite component";
    return false;
  }
  if (!std::isfinite(t.rotation.yaw) || !std::isfinite(t.rotation.pitch) ||
      !std::isfinite(t.rotation.roll)) {
    if (why) *why = "rotation has a non-finite component";
    return false;
  }
  if (!finite(t.scale)) {
    if (why) *why = "scale has a non-finite component";
    return false;
  }
  if (t.scale.x <= 0.0 || t.scale.y <= 0.0 || t.scale.z <= 0.0) {
    if (why) *why = "scale components must be positive";
    return false;
  }
  return true;
}

bool aabb_overlaps(const Aabb& a, const Aabb& b) {
  return a.min.x < b.max.x && b.min.x < a.max.x &&
         a.min.y < b.max.y && b.min.y < a.max.y &&
         a.min.z < b.max.z && b.min.z < a.max.z;
}

double aabb_xy_overlap_area(const Aabb& a, const Aabb& b) {
  double dx = std::min(a.max.x, b.max.x) - std::max(a.min.x, b.min.x);
  double dy = std::min(a.max.y, b.max.y) - std::max(a.min.y, b.min.y);
  if (dx <= 0.0 || dy <= 0.0) return 0.0;
  return dx * dy;
}

bool aabb_xy_overlaps(const Aabb& a, const Aabb& b) {
  return aabb_xy_overlap_area(a, b) > 0.0;
}

}  // namespace navforge
