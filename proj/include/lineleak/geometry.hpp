#pragma once

#include <cmath>
#include <optional>

namespace lineleak {

/// Displacement / free vector in scene units.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
constexpr double squared_norm(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(squared_norm(v)); }

/// A position in scene units.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Point3 operator+(const Vec3& v) const { return {x + v.x, y + v.y, z + v.z}; }
  constexpr Point3 operator-(const Vec3& v) const { return {x - v.x, y - v.y, z - v.z}; }
  constexpr bool operator==(const Point3&) const = default;

  bool is_finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

/// Unit-length direction; every factory enforces |v| = 1 to within 1e-9.
class Direction3 {
 public:
  Direction3() = default;  // +x

  /// Normalizes v; throws Error(InvalidArgument) for zero or non-finite input.
  static Direction3 normalized(const Vec3& v);
  /// Keeps v bit-for-bit when it is already unit length (|1 - |v|| <= 1e-9),
  /// otherwise normalizes.
  static Direction3 from_unit(const Vec3& v);

  double x() const { return v_.x; }
  double y() const { return v_.y; }
  double z() const { return v_.z; }
  const Vec3& vec() const { return v_; }

  Direction3 operator-() const { return Direction3(-v_); }
  bool operator==(const Direction3&) const = default;

 private:
  explicit Direction3(const Vec3& unit) : v_(unit) {}
  Vec3 v_{1.0, 0.0, 0.0};
};

/// Infinite line anchor + beta * direction.
struct Line3 {
  Point3 anchor;
  Direction3 direction;

  Point3 at(double beta) const { return anchor + direction.vec() * beta; }
  bool operator==(const Line3&) const = default;
};

/// Closest points between two non-parallel lines, as parameters on each.
struct ClosestPair {
  double beta_a = 0.0;
  double beta_b = 0.0;
  double distance = 0.0;
};

struct PointLineProjection {
  double beta = 0.0;
  double distance = 0.0;
};

/// Cross-product norm of two unit directions below which lines count as
/// parallel.
inline constexpr double kParallelEps = 1e-9;

inline double point_point_distance(const Point3& a, const Point3& b) { return norm(a - b); }

/// Orthogonal projection of p onto l. The distance is evaluated as
/// |(p - anchor) x direction|, which every neighborhood ranking shares.
inline PointLineProjection point_line_distance(const Point3& p, const Line3& l) {
  const Vec3 w = p - l.anchor;
  return {dot(w, l.direction.vec()), norm(cross(w, l.direction.vec()))};
}

/// Feet of the common perpendicular. Returns nullopt when the lines are
/// parallel (|a.dir x b.dir| < kParallelEps).
std::optional<ClosestPair> closest_points(const Line3& a, const Line3& b);

/// Minimum Euclidean distance between two lines, including the parallel
/// case. Used as the ranking key of the line-line neighborhood.
inline double line_line_distance(const Line3& a, const Line3& b) {
  const Vec3& u = a.direction.vec();
  const Vec3 w = a.anchor - b.anchor;
  const Vec3 n = cross(u, b.direction.vec());
  const double nn = squared_norm(n);
  if (nn < kParallelEps * kParallelEps) return norm(cross(w, u));
  return std::abs(dot(w, n)) / std::sqrt(nn);
}

}  // namespace lineleak
