#pragma once

#include <cmath>
#include <string>

namespace navforge {

// All linear quantities are centimeters unless a name says otherwise.

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double d) { return d * (kPi / 180.0); }
inline double rad_to_deg(double r) { return r * (180.0 / kPi); }

// Normalizes into [-180, 180).
inline double normalize_deg(double d) {
  double r = d - 360.0 * std::floor((d + 180.0) / 360.0);
  if (r >= 180.0) r -= 360.0;  // guards the floor rounding edge
  return r;
}

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  bool operator==(const Vec3& o) const = default;
};

inline bool finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Stored normalized to [-180, 180) on every axis.
struct Rotation {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  static Rotation make(double yaw, double pitch = 0.0, double roll = 0.0) {
    return {normalize_deg(yaw), normalize_deg(pitch), normalize_deg(roll)};
  }
  bool operator==(const Rotation& o) const = default;
};

struct Transform {
  Vec3 location;
  Rotation rotation;
  Vec3 scale{1.0, 1.0, 1.0};

  bool operator==(const Transform& o) const = default;
};

bool valid_transform(const Transform& t, std::string* why = nullptr);

struct Aabb {
  Vec3 min;
  Vec3 max;

  Vec3 center() const { return {(min.x + max.x) * 0.5, (min.y + max.y) * 0.5, (min.z + max.z) * 0.5}; }
  Vec3 half_extent() const { return {(max.x - min.x) * 0.5, (max.y - min.y) * 0.5, (max.z - min.z) * 0.5}; }
};

// Strict overlap on all three axes (touching faces do not collide).
bool aabb_overlaps(const Aabb& a, const Aabb& b);

// Positive XY overlap area, 0 when disjoint or merely touching.
double aabb_xy_overlap_area(const Aabb& a, const Aabb& b);

bool aabb_xy_overlaps(const Aabb& a, const Aabb& b);

}  // namespace navforge
