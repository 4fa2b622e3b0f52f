#pragma once

#include "lineleak/geometry.hpp"
#include "lineleak/linecloud.hpp"
#include "lineleak/scene.hpp"

namespace testscene {

// A small textured room, a few thousand points.
inline lineleak::PointCloud small_room(std::uint64_t seed, double density = 30.0) {
  lineleak::SceneSpec spec;
  spec.points_per_unit_area = density;
  spec.seed = seed;
  return lineleak::synth_scene(spec);
}

struct Rigid {
  double r[3][3];
  lineleak::Vec3 t;

  lineleak::Vec3 rotate(const lineleak::Vec3& v) const {
    return {r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z, r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z};
  }
  lineleak::Point3 apply(const lineleak::Point3& p) const {
    const auto v = rotate(lineleak::Vec3{p.x, p.y, p.z}) + t;
    return {v.x, v.y, v.z};
  }
  lineleak::LineCloud apply(const lineleak::LineCloud& lc) const {
    lineleak::LineCloud out = lc;
    for (auto& l : out.lines) {
      l = {apply(l.anchor), lineleak::Direction3::normalized(rotate(l.direction.vec()))};
    }
    return out;
  }
};

// Rotation about a fixed oblique axis by angle a (Rodrigues), then a shift.
inline Rigid make_rigid(double a, lineleak::Vec3 t) {
  const lineleak::Vec3 k = lineleak::Direction3::normalized({1, 2, 3}).vec();
  const double c = std::cos(a), s = std::sin(a), v = 1 - c;
  return {{{c + k.x * k.x * v, k.x * k.y * v - k.z * s, k.x * k.z * v + k.y * s},
           {k.y * k.x * v + k.z * s, c + k.y * k.y * v, k.y * k.z * v - k.x * s},
           {k.z * k.x * v - k.y * s, k.z * k.y * v + k.x * s, c + k.z * k.z * v}},
          t};
}

}  // namespace testscene
