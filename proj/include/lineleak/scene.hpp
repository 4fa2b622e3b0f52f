#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lineleak/geometry.hpp"
#include "lineleak/linecloud.hpp"

namespace lineleak {

enum class SceneKind { Room, Facade, PlanesFromFile };

const char* to_string(SceneKind kind);
SceneKind scene_kind_from_string(const std::string& name);

struct SceneSpec {
  SceneKind kind = SceneKind::Room;
  double extent = 4.0;                 // scene units
  double points_per_unit_area = 2500;  // Poisson intensity on every surface
  double noise_sigma = 0.0;            // Gaussian offset along the surface normal
  std::uint64_t seed = 0;
  /// Share of points drawn from isotropic Gaussian texture blobs instead of
  /// uniformly over the surface. Reconstructed feature points cluster on
  /// textured regions; 0 gives a homogeneous Poisson surface.
  double texture_fraction = 0.8;
  double blob_sigma = 0.005;     // fraction of extent
  double blobs_per_area = 20.0;  // blob centers per extent^2 of surface
  std::string planes_path;  // PlanesFromFile only
};

/// Parameter-space rectangle [s0, s1] x [t0, t1] cut out of a surface.
struct Hole {
  double s0, s1, t0, t1;
};

/// Parallelogram origin + s * edge_u + t * edge_v, s, t in [0, 1].
struct Surface {
  Point3 origin;
  Vec3 edge_u;
  Vec3 edge_v;
  std::vector<Hole> holes;

  double area() const;
  Vec3 normal() const;  // unit
};

/// The generating surfaces of a scene (deterministic under spec.seed).
std::vector<Surface> scene_surfaces(const SceneSpec& spec);

/// Poisson-samples every surface of the scene at spec.points_per_unit_area.
PointCloud synth_scene(const SceneSpec& spec);

/// Planes file: one parallelogram per non-comment line,
/// `ox oy oz ux uy uz vx vy vz`; '#' starts a comment.
std::vector<Surface> read_surfaces(const std::string& path);

}  // namespace lineleak
