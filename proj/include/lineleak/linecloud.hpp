#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lineleak/geometry.hpp"

namespace lineleak {

/// Opaque per-element blob (feature descriptors and the like). Carried
/// through every transformation, never interpreted.
using Payload = std::string;

struct PointCloud {
  std::vector<Point3> points;
  std::vector<Payload> payloads;  // empty, or aligned 1:1 with points

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_payloads() const { return !payloads.empty(); }
};

struct LineCloud {
  std::vector<Line3> lines;
  std::vector<Payload> payloads;  // empty, or aligned 1:1 with lines
  /// Index of each line's source point. Filled by lift/sparsify and by the
  /// readers (identity); consumed only by evaluation.
  std::vector<std::size_t> source_indices;

  std::size_t size() const { return lines.size(); }
  bool empty() const { return lines.empty(); }
  bool has_payloads() const { return !payloads.empty(); }
};

/// Replaces point i by a line through it with a uniformly random direction.
/// The anchor is the point itself; use obfuscate_anchors before export.
LineCloud lift(const PointCloud& pc, std::uint64_t seed);

/// Keeps round(fraction * N) lines drawn uniformly without replacement, in
/// source order.
LineCloud sparsify(const LineCloud& lc, double fraction, std::uint64_t seed);

/// Moves each anchor along its line by a uniform offset in [-spread, spread].
/// The lines are unchanged as sets; only the stored anchor moves.
LineCloud obfuscate_anchors(const LineCloud& lc, double spread, std::uint64_t seed);

/// Axis-aligned bounding box diagonal length; 0 for an empty cloud.
double bounding_diagonal(const PointCloud& pc);

/// Subset of pc selected by lc.source_indices, in line order.
PointCloud select_sources(const PointCloud& pc, const LineCloud& lc);

}  // namespace lineleak
