#include "lineleak/neighborhood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "lineleak/error.hpp"
#include "lineleak/random.hpp"

namespace lineleak {

namespace {

constexpr std::size_t kNoSkip = std::numeric_limits<std::size_t>::max();

NeighborList to_list(std::size_t center, const std::vector<Ranked>& ranked) {
  NeighborList out;
  out.center_index = center;
  out.indices.reserve(ranked.size());
  out.keys.reserve(ranked.size());
  for (const Ranked& r : ranked) {
    out.indices.push_back(r.index);
    out.keys.push_back(r.key);
  }
  return out;
}

std::vector<std::uint32_t> valid_ids(const PointEstimates& est) {
  std::vector<std::uint32_t> ids;
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (est.valid[i]) ids.push_back(static_cast<std::uint32_t>(i));
  }
  return ids;
}

void check_aligned(const LineCloud& lc, const PointEstimates& est) {
  if (est.positions.size() != lc.size() || est.valid.size() != lc.size()) {
    throw Error(ErrorCode::MisalignedInputs, "point estimates do not align with the line cloud");
  }
}

void check_estimate_k(const LineCloud& lc, const PointEstimates& est, std::size_t k) {
  check_aligned(lc, est);
  const std::size_t valid = est.valid_count();
  if (k >= valid) {
    throw Error(ErrorCode::TooFewValidEstimates,
                "K = " + std::to_string(k) + " needs more than " + std::to_string(valid) + " valid estimates");
  }
}

template <class Query>
std::vector<NeighborList> run_all(std::size_t n, const Query& query) {
  std::vector<NeighborList> out(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = query(static_cast<std::size_t>(i));
  return out;
}

}  // namespace

std::size_t PointEstimates::valid_count() const {
  return static_cast<std::size_t>(std::count_if(valid.begin(), valid.end(), [](std::uint8_t v) { return v != 0; }));
}

PointEstimates PointEstimates::invalid(std::size_t n) {
  PointEstimates e;
  e.positions.assign(n, Point3{});
  e.valid.assign(n, 0);
  return e;
}

NeighborList LineLineSearch::query(std::size_t i, std::size_t k) const {
  TopK top(k);
  const Line3& li = lc_.lines[i];
  const std::size_t n = lc_.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const double key = line_line_distance(li, lc_.lines[j]);
    if (key < top.worst()) top.offer(key, static_cast<std::uint32_t>(j));
  }
  return to_list(i, top.take_sorted());
}

PointLineSearch::PointLineSearch(const LineCloud& lc, const PointEstimates& est)
    : lc_(lc), tree_(est.positions, valid_ids(est)) {
  check_aligned(lc, est);
}

NeighborList PointLineSearch::query(std::size_t i, std::size_t k) const {
  return to_list(i, tree_.nearest_to_line(lc_.lines[i], k, i));
}

NeighborList LinePointSearch::query(std::size_t i, std::size_t k) const {
  if (!est_.valid[i]) return NeighborList{i, {}, {}};
  TopK top(k);
  const Point3& q = est_.positions[i];
  const std::size_t n = lc_.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    const double key = point_line_distance(q, lc_.lines[j]).distance;
    if (key < top.worst()) top.offer(key, static_cast<std::uint32_t>(j));
  }
  return to_list(i, top.take_sorted());
}

std::vector<NeighborList> knn_line_line(const LineCloud& lc, std::size_t k) {
  if (k >= lc.size()) {
    throw Error(ErrorCode::KTooLarge, "K = " + std::to_string(k) + " must be below N = " + std::to_string(lc.size()));
  }
  const LineLineSearch search(lc);
  return run_all(lc.size(), [&](std::size_t i) { return search.query(i, k); });
}

std::vector<NeighborList> knn_point_line(const LineCloud& lc, const PointEstimates& est, std::size_t k) {
  check_estimate_k(lc, est, k);
  const PointLineSearch search(lc, est);
  return run_all(lc.size(), [&](std::size_t i) { return search.query(i, k); });
}

std::vector<NeighborList> knn_line_point(const LineCloud& lc, const PointEstimates& est, std::size_t k) {
  check_estimate_k(lc, est, k);
  if (k >= lc.size()) throw Error(ErrorCode::KTooLarge, "K must be below the number of lines");
  const LinePointSearch search(lc, est);
  return run_all(lc.size(), [&](std::size_t i) { return search.query(i, k); });
}

NeighborList intersect(const NeighborList& npl, const NeighborList& nlp) {
  if (npl.center_index != nlp.center_index) {
    throw Error(ErrorCode::InvalidArgument, "intersect requires lists with the same center");
  }
  std::vector<std::uint32_t> other(nlp.indices);
  std::sort(other.begin(), other.end());
  std::vector<Ranked> kept;
  for (std::size_t a = 0; a < npl.size(); ++a) {
    if (std::binary_search(other.begin(), other.end(), npl.indices[a])) kept.push_back({npl.keys[a], npl.indices[a]});
  }
  std::sort(kept.begin(), kept.end());
  return to_list(npl.center_index, kept);
}

std::vector<NeighborList> knn_points(const PointCloud& pc, std::size_t k) {
  if (k >= pc.size()) {
    throw Error(ErrorCode::KTooLarge, "K = " + std::to_string(k) + " must be below N = " + std::to_string(pc.size()));
  }
  std::vector<std::uint32_t> ids(pc.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::uint32_t>(i);
  const KdTree tree(pc.points, std::move(ids));
  return run_all(pc.size(), [&](std::size_t i) { return to_list(i, tree.nearest(pc.points[i], k, i)); });
}

std::vector<NeighborList> oracle_neighbors(const PointCloud& pc, std::size_t k, double outlier_fraction,
                                           std::uint64_t seed) {
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "outlier_fraction must lie in [0, 1)");
  }
  std::vector<NeighborList> lists = knn_points(pc, k);
  const auto replace = static_cast<std::size_t>(std::llround(outlier_fraction * static_cast<double>(k)));
  if (replace == 0) return lists;
  const std::size_t n = pc.size();
  if (n < 1 + k + replace) {
    throw Error(ErrorCode::KTooLarge, "not enough non-neighbors to draw outliers from");
  }

  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t s = 0; s < count; ++s) {
    const auto i = static_cast<std::size_t>(s);
    NeighborList& list = lists[i];
    Rng rng = Rng::stream(seed, i);
    std::unordered_set<std::uint32_t> taken(list.indices.begin(), list.indices.end());
    taken.insert(static_cast<std::uint32_t>(i));

    // choose which slots to corrupt
    std::vector<std::size_t> slots(list.size());
    for (std::size_t a = 0; a < slots.size(); ++a) slots[a] = a;
    for (std::size_t a = 0; a < replace; ++a) std::swap(slots[a], slots[a + rng.below(slots.size() - a)]);

    std::vector<Ranked> merged;
    merged.reserve(k);
    std::vector<std::uint8_t> corrupt(list.size(), 0);
    for (std::size_t a = 0; a < replace; ++a) corrupt[slots[a]] = 1;
    for (std::size_t a = 0; a < list.size(); ++a) {
      if (!corrupt[a]) merged.push_back({list.keys[a], list.indices[a]});
    }
    for (std::size_t a = 0; a < replace; ++a) {
      std::uint32_t j;
      do {
        j = static_cast<std::uint32_t>(rng.below(n));
      } while (taken.count(j) != 0);
      taken.insert(j);
      merged.push_back({point_point_distance(pc.points[i], pc.points[j]), j});
    }
    std::sort(merged.begin(), merged.end());
    list = to_list(i, merged);
  }
  return lists;
}

}  // namespace lineleak
