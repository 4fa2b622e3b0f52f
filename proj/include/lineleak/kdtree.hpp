#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lineleak/geometry.hpp"

namespace lineleak {

/// (key, index) pair ordered by key, then by index. The lower index wins
/// every exact tie, which keeps neighbor lists independent of traversal
/// order and thread count.
struct Ranked {
  double key;
  std::uint32_t index;

  friend bool operator<(const Ranked& a, const Ranked& b) {
    return a.key < b.key || (a.key == b.key && a.index < b.index);
  }
};

/// Bounded selection of the k smallest Ranked entries.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k + 1); }

  bool full() const { return heap_.size() >= k_; }
  /// Key of the current k-th best entry; +inf until full.
  double worst() const;
  void offer(double key, std::uint32_t index);
  /// Sorted ascending; leaves the selector empty.
  std::vector<Ranked> take_sorted();

 private:
  std::size_t k_;
  std::vector<Ranked> heap_;  // max-heap on Ranked order
};

/// Static kd-tree over a subset of points, with exact k-nearest queries by
/// point (Euclidean) and by line (point-line distance).
class KdTree {
 public:
  /// `ids` are the indices (into `points`) the tree is built over.
  KdTree(std::span<const Point3> points, std::vector<std::uint32_t> ids);

  /// k nearest to `q` by point_point_distance, skipping index `skip`.
  std::vector<Ranked> nearest(const Point3& q, std::size_t k, std::size_t skip) const;
  /// k nearest to line `l` by point_line_distance, skipping index `skip`.
  std::vector<Ranked> nearest_to_line(const Line3& l, std::size_t k, std::size_t skip) const;

  std::size_t size() const { return ids_.size(); }

 private:
  struct Node {
    Point3 lo, hi;        // bounding box
    Point3 center;        // bounding sphere
    double radius = 0.0;
    std::uint32_t begin = 0, end = 0;  // range in ids_
    std::int32_t left = -1, right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  template <class KeyFn, class BoundFn>
  void search(std::int32_t node, TopK& top, std::size_t skip, const KeyFn& key, const BoundFn& bound) const;

  std::span<const Point3> points_;
  std::vector<std::uint32_t> ids_;
  std::vector<Node> nodes_;
};

}  // namespace lineleak
