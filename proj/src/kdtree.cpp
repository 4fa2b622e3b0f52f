#include "lineleak/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lineleak {

double TopK::worst() const {
  return full() ? heap_.front().key : std::numeric_limits<double>::infinity();
}

void TopK::offer(double key, std::uint32_t index) {
  if (k_ == 0) return;
  const Ranked r{key, index};
  if (!full()) {
    heap_.push_back(r);
    std::push_heap(heap_.begin(), heap_.end());
  } else if (r < heap_.front()) {
    std::pop_heap(heap_.begin(), heap_.end());
    heap_.back() = r;
    std::push_heap(heap_.begin(), heap_.end());
  }
}

std::vector<Ranked> TopK::take_sorted() {
  std::sort_heap(heap_.begin(), heap_.end());
  std::vector<Ranked> out;
  out.swap(heap_);
  return out;
}

namespace {

constexpr std::uint32_t kLeafSize = 12;

// Slack subtracted from node bounds so rounding in the bound can never prune
// a node holding an entry that ties the current k-th key.
double slack(double radius) { return 1e-9 * (radius + 1.0); }

}  // namespace

KdTree::KdTree(std::span<const Point3> points, std::vector<std::uint32_t> ids)
    : points_(points), ids_(std::move(ids)) {
  if (!ids_.empty()) {
    nodes_.reserve(2 * ids_.size() / kLeafSize + 2);
    build(0, static_cast<std::uint32_t>(ids_.size()));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo = {inf, inf, inf};
  node.hi = {-inf, -inf, -inf};
  for (std::uint32_t i = begin; i < end; ++i) {
    const Point3& p = points_[ids_[i]];
    node.lo = {std::min(node.lo.x, p.x), std::min(node.lo.y, p.y), std::min(node.lo.z, p.z)};
    node.hi = {std::max(node.hi.x, p.x), std::max(node.hi.y, p.y), std::max(node.hi.z, p.z)};
  }
  node.center = node.lo + (node.hi - node.lo) * 0.5;
  for (std::uint32_t i = begin; i < end; ++i) {
    node.radius = std::max(node.radius, point_point_distance(node.center, points_[ids_[i]]));
  }

  const auto self = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return self;

  const Vec3 ext = node.hi - node.lo;
  const int axis = (ext.x >= ext.y && ext.x >= ext.z) ? 0 : (ext.y >= ext.z ? 1 : 2);
  auto coord = [&](std::uint32_t id) {
    const Point3& p = points_[id];
    return axis == 0 ? p.x : (axis == 1 ? p.y : p.z);
  };
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(ids_.begin() + begin, ids_.begin() + mid, ids_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return coord(a) < coord(b); });
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

template <class KeyFn, class BoundFn>
void KdTree::search(std::int32_t id, TopK& top, std::size_t skip, const KeyFn& key, const BoundFn& bound) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t pid = ids_[i];
      if (pid == skip) continue;
      top.offer(key(points_[pid]), pid);
    }
    return;
  }
  const double bl = bound(nodes_[node.left]);
  const double br = bound(nodes_[node.right]);
  const std::int32_t first = bl <= br ? node.left : node.right;
  const std::int32_t second = bl <= br ? node.right : node.left;
  const double b1 = std::min(bl, br);
  const double b2 = std::max(bl, br);
  if (b1 <= top.worst()) search(first, top, skip, key, bound);
  if (b2 <= top.worst()) search(second, top, skip, key, bound);
}

std::vector<Ranked> KdTree::nearest(const Point3& q, std::size_t k, std::size_t skip) const {
  TopK top(k);
  if (nodes_.empty()) return {};
  auto key = [&](const Point3& p) { return point_point_distance(q, p); };
  auto bound = [&](const Node& n) {
    const double dx = std::max({n.lo.x - q.x, 0.0, q.x - n.hi.x});
    const double dy = std::max({n.lo.y - q.y, 0.0, q.y - n.hi.y});
    const double dz = std::max({n.lo.z - q.z, 0.0, q.z - n.hi.z});
    return std::sqrt(dx * dx + dy * dy + dz * dz) - slack(n.radius);
  };
  search(0, top, skip, key, bound);
  return top.take_sorted();
}

std::vector<Ranked> KdTree::nearest_to_line(const Line3& l, std::size_t k, std::size_t skip) const {
  TopK top(k);
  if (nodes_.empty()) return {};
  auto key = [&](const Point3& p) { return point_line_distance(p, l).distance; };
  auto bound = [&](const Node& n) {
    return point_line_distance(n.center, l).distance - n.radius - slack(n.radius);
  };
  search(0, top, skip, key, bound);
  return top.take_sorted();
}

}  // namespace lineleak
