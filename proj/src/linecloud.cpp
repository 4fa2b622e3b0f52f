#include "lineleak/linecloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lineleak/error.hpp"
#include "lineleak/random.hpp"

namespace lineleak {

LineCloud lift(const PointCloud& pc, std::uint64_t seed) {
  if (pc.empty()) throw Error(ErrorCode::EmptyInput, "cannot lift an empty point cloud");
  Rng rng(seed);
  LineCloud lc;
  lc.lines.reserve(pc.size());
  for (const Point3& p : pc.points) lc.lines.push_back({p, sample_uniform_direction(rng)});
  lc.payloads = pc.payloads;
  lc.source_indices.resize(pc.size());
  std::iota(lc.source_indices.begin(), lc.source_indices.end(), std::size_t{0});
  return lc;
}

LineCloud sparsify(const LineCloud& lc, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "fraction must lie in (0, 1]");
  }
  const std::size_t n = lc.size();
  const auto keep = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (keep == 0) throw Error(ErrorCode::ZeroSurvivors, "sparsification keeps no lines");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (keep < n) {
    // partial Fisher-Yates
    Rng rng(seed);
    for (std::size_t i = 0; i < keep; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(order[i], order[j]);
    }
    order.resize(keep);
    std::sort(order.begin(), order.end());
  }

  LineCloud out;
  out.lines.reserve(keep);
  out.source_indices.reserve(keep);
  for (std::size_t i : order) {
    out.lines.push_back(lc.lines[i]);
    out.source_indices.push_back(lc.source_indices.empty() ? i : lc.source_indices[i]);
    if (lc.has_payloads()) out.payloads.push_back(lc.payloads[i]);
  }
  return out;
}

LineCloud obfuscate_anchors(const LineCloud& lc, double spread, std::uint64_t seed) {
  Rng rng(seed);
  LineCloud out = lc;
  for (Line3& l : out.lines) l.anchor = l.at(rng.uniform(-spread, spread));
  return out;
}

double bounding_diagonal(const PointCloud& pc) {
  if (pc.empty()) return 0.0;
  constexpr double inf = std::numeric_limits<double>::infinity();
  Point3 lo{inf, inf, inf};
  Point3 hi{-inf, -inf, -inf};
  for (const Point3& p : pc.points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  return norm(hi - lo);
}

PointCloud select_sources(const PointCloud& pc, const LineCloud& lc) {
  PointCloud out;
  out.points.reserve(lc.size());
  for (std::size_t i = 0; i < lc.size(); ++i) {
    const std::size_t src = lc.source_indices.empty() ? i : lc.source_indices[i];
    if (src >= pc.size()) throw Error(ErrorCode::MisalignedInputs, "line source index out of range");
    out.points.push_back(pc.points[src]);
    if (pc.has_payloads()) out.payloads.push_back(pc.payloads[src]);
  }
  return out;
}

}  // namespace lineleak
