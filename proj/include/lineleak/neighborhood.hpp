#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "lineleak/kdtree.hpp"
#include "lineleak/linecloud.hpp"

namespace lineleak {

/// Neighbors of one element, nearest first. Never contains the center itself.
struct NeighborList {
  std::size_t center_index = 0;
  std::vector<std::uint32_t> indices;
  std::vector<double> keys;  // matching distances, non-decreasing

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

/// One point estimate per line; positions[i] is meaningful only if valid[i].
struct PointEstimates {
  std::vector<Point3> positions;
  std::vector<std::uint8_t> valid;

  std::size_t size() const { return positions.size(); }
  std::size_t valid_count() const;
  static PointEstimates invalid(std::size_t n);
};

/// Exhaustive line-line neighborhood: the K lines closest to line i by
/// line_line_distance. No spatial index applies to line-line distance.
class LineLineSearch {
 public:
  explicit LineLineSearch(const LineCloud& lc) : lc_(lc) {}
  NeighborList query(std::size_t i, std::size_t k) const;

 private:
  const LineCloud& lc_;
};

/// For line i, the K valid point estimates j != i closest to the line.
/// Backed by an exact kd-tree over the valid estimates.
class PointLineSearch {
 public:
  PointLineSearch(const LineCloud& lc, const PointEstimates& est);
  NeighborList query(std::size_t i, std::size_t k) const;

 private:
  const LineCloud& lc_;
  KdTree tree_;
};

/// For the estimate of line i, the K lines j != i closest to it. Exhaustive
/// over lines; an invalid estimate yields an empty list.
class LinePointSearch {
 public:
  LinePointSearch(const LineCloud& lc, const PointEstimates& est) : lc_(lc), est_(est) {}
  NeighborList query(std::size_t i, std::size_t k) const;

 private:
  const LineCloud& lc_;
  const PointEstimates& est_;
};

std::vector<NeighborList> knn_line_line(const LineCloud& lc, std::size_t k);
std::vector<NeighborList> knn_point_line(const LineCloud& lc, const PointEstimates& est, std::size_t k);
std::vector<NeighborList> knn_line_point(const LineCloud& lc, const PointEstimates& est, std::size_t k);

/// Indices present in both lists, keys from `npl`, ordered by (key, index).
NeighborList intersect(const NeighborList& npl, const NeighborList& nlp);

/// Exact k nearest points of every point (Euclidean).
std::vector<NeighborList> knn_points(const PointCloud& pc, std::size_t k);

/// True k nearest points, then round(outlier_fraction * k) of them replaced by
/// uniformly drawn indices outside the true neighborhood (no duplicates, no
/// self). Keys are the true distances of whatever ends up in the list.
std::vector<NeighborList> oracle_neighbors(const PointCloud& pc, std::size_t k, double outlier_fraction,
                                           std::uint64_t seed);

}  // namespace lineleak
