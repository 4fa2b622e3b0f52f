#include "lineleak/geometry.hpp"

#include "lineleak/error.hpp"

namespace lineleak {

Direction3 Direction3::normalized(const Vec3& v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::InvalidArgument, "direction must be finite and non-zero");
  }
  return Direction3(v * (1.0 / n));
}

Direction3 Direction3::from_unit(const Vec3& v) {
  if (std::abs(norm(v) - 1.0) <= 1e-9) return Direction3(v);
  return normalized(v);
}

std::optional<ClosestPair> closest_points(const Line3& a, const Line3& b) {
  const Vec3& u = a.direction.vec();
  const Vec3& v = b.direction.vec();
  const Vec3 n = cross(u, v);
  const double denom = squared_norm(n);  // 1 - (u.v)^2 for unit directions
  if (denom < kParallelEps * kParallelEps) return std::nullopt;

  const Vec3 w = a.anchor - b.anchor;
  const double uv = dot(u, v);
  const double d = dot(u, w);
  const double e = dot(v, w);
  ClosestPair out;
  out.beta_a = (uv * e - d) / denom;
  out.beta_b = (e - uv * d) / denom;
  out.distance = point_point_distance(a.at(out.beta_a), b.at(out.beta_b));
  return out;
}

}  // namespace lineleak
