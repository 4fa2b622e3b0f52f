#include "lineleak/scene.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "lineleak/error.hpp"
#include "lineleak/random.hpp"

namespace lineleak {

const char* to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::Room: return "room";
    case SceneKind::Facade: return "facade";
    case SceneKind::PlanesFromFile: return "planes-from-file";
  }
  return "unknown";
}

SceneKind scene_kind_from_string(const std::string& name) {
  if (name == "room") return SceneKind::Room;
  if (name == "facade") return SceneKind::Facade;
  if (name == "planes-from-file" || name == "planes") return SceneKind::PlanesFromFile;
  throw Error(ErrorCode::InvalidSpec, "unknown scene kind '" + name + "'");
}

double Surface::area() const {
  const double full = norm(cross(edge_u, edge_v));
  double cut = 0.0;
  for (const Hole& h : holes) cut += (h.s1 - h.s0) * (h.t1 - h.t0);
  return full * (1.0 - cut);
}

Vec3 Surface::normal() const { return Direction3::normalized(cross(edge_u, edge_v)).vec(); }

namespace {

void validate(const SceneSpec& spec) {
  if (!(spec.extent > 0.0) || !std::isfinite(spec.extent)) {
    throw Error(ErrorCode::InvalidSpec, "extent must be positive");
  }
  if (!(spec.points_per_unit_area >= 0.0) || !std::isfinite(spec.points_per_unit_area)) {
    throw Error(ErrorCode::InvalidSpec, "density must be non-negative");
  }
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) {
    throw Error(ErrorCode::InvalidSpec, "noise_sigma must be non-negative");
  }
  if (!(spec.texture_fraction >= 0.0 && spec.texture_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "texture_fraction must lie in [0, 1]");
  }
  if (spec.texture_fraction > 0.0) {
    if (!(spec.blob_sigma > 0.0) || !std::isfinite(spec.blob_sigma)) {
      throw Error(ErrorCode::InvalidSpec, "blob_sigma must be positive");
    }
    if (!(spec.blobs_per_area > 0.0) || !std::isfinite(spec.blobs_per_area)) {
      throw Error(ErrorCode::InvalidSpec, "blobs_per_area must be positive");
    }
  }
}

// Axis-aligned box surfaces, bottom face omitted.
void add_box(std::vector<Surface>& out, Point3 lo, Point3 hi) {
  const double dx = hi.x - lo.x, dy = hi.y - lo.y, dz = hi.z - lo.z;
  out.push_back({{lo.x, lo.y, hi.z}, {dx, 0, 0}, {0, dy, 0}, {}});  // top
  out.push_back({{lo.x, lo.y, lo.z}, {dx, 0, 0}, {0, 0, dz}, {}});  // y = lo
  out.push_back({{lo.x, hi.y, lo.z}, {dx, 0, 0}, {0, 0, dz}, {}});  // y = hi
  out.push_back({{lo.x, lo.y, lo.z}, {0, dy, 0}, {0, 0, dz}, {}});  // x = lo
  out.push_back({{hi.x, lo.y, lo.z}, {0, dy, 0}, {0, 0, dz}, {}});  // x = hi
}

std::vector<Surface> room_surfaces(const SceneSpec& spec) {
  const double e = spec.extent;
  std::vector<Surface> out;
  out.push_back({{0, 0, 0}, {e, 0, 0}, {0, e, 0}, {}});  // floor
  out.push_back({{0, 0, 0}, {e, 0, 0}, {0, 0, e}, {}});  // y = 0
  out.push_back({{0, e, 0}, {e, 0, 0}, {0, 0, e}, {}});  // y = e
  out.push_back({{0, 0, 0}, {0, e, 0}, {0, 0, e}, {}});  // x = 0
  out.push_back({{e, 0, 0}, {0, e, 0}, {0, 0, e}, {}});  // x = e

  Rng rng = Rng::stream(spec.seed, 0);
  const auto furniture = 2 + rng.below(3);
  for (std::uint64_t f = 0; f < furniture; ++f) {
    const double w = rng.uniform(0.15, 0.35) * e;
    const double d = rng.uniform(0.15, 0.35) * e;
    const double h = rng.uniform(0.10, 0.45) * e;
    const double x = rng.uniform(0.05 * e, 0.95 * e - w);
    const double y = rng.uniform(0.05 * e, 0.95 * e - d);
    add_box(out, {x, y, 0.0}, {x + w, y + d, h});
  }
  return out;
}

std::vector<Surface> facade_surfaces(const SceneSpec& spec) {
  const double e = spec.extent;
  const double height = 0.6 * e;
  const double depth = 0.04 * e;
  Rng rng = Rng::stream(spec.seed, 0);

  // Wall in the plane y = 0 facing +y; openings recess towards +y.
  Surface wall{{0, 0, 0}, {e, 0, 0}, {0, 0, height}, {}};
  std::vector<Hole> openings;
  const int columns = 4 + static_cast<int>(rng.below(3));
  const double cell = 1.0 / columns;
  for (int c = 0; c < columns; ++c) {
    const double s0 = (c + 0.25) * cell;
    const double s1 = (c + 0.75) * cell;
    openings.push_back({s0, s1, 0.55, 0.85});  // upper-floor window
    if (c == columns / 2) {
      openings.push_back({s0, s1, 0.0, 0.35});  // door
    } else {
      openings.push_back({s0, s1, 0.12, 0.35});  // ground-floor window
    }
  }
  wall.holes = openings;

  std::vector<Surface> out{wall};
  for (const Hole& h : openings) {
    const double x0 = h.s0 * e, x1 = h.s1 * e;
    const double z0 = h.t0 * height, z1 = h.t1 * height;
    out.push_back({{x0, depth, z0}, {x1 - x0, 0, 0}, {0, 0, z1 - z0}, {}});  // recessed pane
    out.push_back({{x0, 0, z0}, {0, depth, 0}, {0, 0, z1 - z0}, {}});        // left reveal
    out.push_back({{x1, 0, z0}, {0, depth, 0}, {0, 0, z1 - z0}, {}});        // right reveal
    out.push_back({{x0, 0, z1}, {x1 - x0, 0, 0}, {0, depth, 0}, {}});        // lintel
    if (z0 > 0.0) out.push_back({{x0, 0, z0}, {x1 - x0, 0, 0}, {0, depth, 0}, {}});  // sill
  }
  return out;
}

bool in_hole(const Surface& s, double a, double b) {
  for (const Hole& h : s.holes) {
    if (a >= h.s0 && a <= h.s1 && b >= h.t0 && b <= h.t1) return true;
  }
  return false;
}

}  // namespace

std::vector<Surface> read_surfaces(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open planes file '" + path + "'");
  std::vector<Surface> out;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (const auto hash = text.find('#'); hash != std::string::npos) text.resize(hash);
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(text);
    double v[9];
    int got = 0;
    while (got < 9 && ls >> v[got]) ++got;
    std::string rest;
    if (got != 9 || (ls >> rest)) throw ParseError(path, line_no, "expected 9 numbers per plane");
    Surface s{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, {v[6], v[7], v[8]}, {}};
    if (!(norm(cross(s.edge_u, s.edge_v)) > 0.0)) throw ParseError(path, line_no, "degenerate plane");
    out.push_back(s);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidSpec, "planes file '" + path + "' has no planes");
  return out;
}

std::vector<Surface> scene_surfaces(const SceneSpec& spec) {
  validate(spec);
  switch (spec.kind) {
    case SceneKind::Room: return room_surfaces(spec);
    case SceneKind::Facade: return facade_surfaces(spec);
    case SceneKind::PlanesFromFile: return read_surfaces(spec.planes_path);
  }
  throw Error(ErrorCode::InvalidSpec, "unknown scene kind");
}

PointCloud synth_scene(const SceneSpec& spec) {
  const std::vector<Surface> surfaces = scene_surfaces(spec);
  PointCloud pc;
  for (std::size_t k = 0; k < surfaces.size(); ++k) {
    const Surface& s = surfaces[k];
    Rng rng = Rng::stream(spec.seed, k + 1);
    const double full_area = norm(cross(s.edge_u, s.edge_v));
    // Sample the full parallelogram and thin out holes; the result stays
    // Poisson with the requested intensity on the remaining area.
    const double mean = spec.points_per_unit_area * full_area;
    const auto count = mean > 0.0 ? std::poisson_distribution<long long>(mean)(rng.engine()) : 0LL;
    const Vec3 n = s.normal();

    // Blob centers in (a, b) parameter space; the blob sigma is converted
    // per edge so blobs stay round in scene units.
    std::vector<std::pair<double, double>> blobs;
    if (spec.texture_fraction > 0.0) {
      const double per_area = spec.blobs_per_area / (spec.extent * spec.extent);
      const auto nb = std::max<long long>(1, std::llround(per_area * full_area));
      for (long long b = 0; b < nb; ++b) {
        const double a0 = rng.uniform();
        blobs.emplace_back(a0, rng.uniform());
      }
    }
    const double su = spec.blob_sigma * spec.extent / norm(s.edge_u);
    const double sv = spec.blob_sigma * spec.extent / norm(s.edge_v);

    for (long long c = 0; c < count; ++c) {
      double a = rng.uniform();
      double b = rng.uniform();
      if (!blobs.empty() && rng.uniform() < spec.texture_fraction) {
        const auto [ca, cb] = blobs[rng.below(blobs.size())];
        do {
          a = ca + su * rng.normal();
          b = cb + sv * rng.normal();
        } while (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0);
      }
      if (in_hole(s, a, b)) continue;
      Point3 p = s.origin + s.edge_u * a + s.edge_v * b;
      if (spec.noise_sigma > 0.0) p = p + n * (spec.noise_sigma * rng.normal());
      pc.points.push_back(p);
    }
  }
  return pc;
}

}  // namespace lineleak
