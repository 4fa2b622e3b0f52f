#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "lineleak/error.hpp"
#include "lineleak/linecloud.hpp"
#include "lineleak/random.hpp"
#include "lineleak/scene.hpp"

using namespace lineleak;

namespace {

PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PointCloud pc;
  for (std::size_t i = 0; i < n; ++i) {
    pc.points.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)});
    pc.payloads.push_back("p" + std::to_string(i));
  }
  return pc;
}

double plane_residual(const Point3& p, const std::vector<Surface>& surfaces) {
  double best = INFINITY;
  for (const auto& s : surfaces) best = std::min(best, std::abs(dot(p - s.origin, s.normal())));
  return best;
}

}  // namespace

TEST(Lift, SinglePoint) {
  PointCloud pc;
  pc.points.push_back({0, 0, 0});
  const auto lc = lift(pc, 9);
  ASSERT_EQ(lc.size(), 1u);
  EXPECT_EQ(lc.lines[0].anchor, (Point3{0, 0, 0}));
  EXPECT_EQ(lc.source_indices, std::vector<std::size_t>{0});
}

TEST(Lift, MembershipAndPayloads) {
  const auto pc = random_cloud(1000, 3);
  const auto lc = lift(pc, 4);
  ASSERT_EQ(lc.size(), pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    EXPECT_LE(point_line_distance(pc.points[i], lc.lines[i]).distance, 1e-12);
    EXPECT_EQ(lc.payloads[i], pc.payloads[i]);
    EXPECT_EQ(lc.source_indices[i], i);
  }
}

TEST(Lift, SeedSensitivityAndDeterminism) {
  const auto pc = random_cloud(50, 3);
  const auto a = lift(pc, 1), b = lift(pc, 2), c = lift(pc, 1);
  EXPECT_EQ(a.lines, c.lines);
  std::size_t same = 0;
  for (std::size_t i = 0; i < pc.size(); ++i) same += a.lines[i].direction == b.lines[i].direction;
  EXPECT_EQ(same, 0u);
}

TEST(Lift, EmptyInput) {
  try {
    lift(PointCloud{}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
}

TEST(Sparsify, IdentityAtFullFraction) {
  const auto lc = lift(random_cloud(100, 1), 2);
  const auto s = sparsify(lc, 1.0, 5);
  EXPECT_EQ(s.lines, lc.lines);
  EXPECT_EQ(s.source_indices, lc.source_indices);
}

TEST(Sparsify, CountAndMembership) {
  const auto lc = lift(random_cloud(1000, 1), 2);
  const auto s = sparsify(lc, 0.05, 5);
  ASSERT_EQ(s.size(), 50u);
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t src = s.source_indices[i];
    EXPECT_EQ(s.lines[i], lc.lines[src]);
    EXPECT_EQ(s.payloads[i], lc.payloads[src]);
    EXPECT_TRUE(seen.insert(src).second);
    if (i > 0) EXPECT_LT(s.source_indices[i - 1], src);
  }
}

TEST(Sparsify, IsAProjection) {
  const auto lc = lift(random_cloud(500, 1), 2);
  const auto s = sparsify(lc, 0.3, 7);
  const auto t = sparsify(s, 1.0, 8);
  EXPECT_EQ(s.lines, t.lines);
  EXPECT_EQ(s.source_indices, t.source_indices);
}

TEST(Sparsify, Errors) {
  const auto lc = lift(random_cloud(10, 1), 2);
  try {
    sparsify(lc, 0.01, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroSurvivors);
  }
  EXPECT_THROW(sparsify(lc, 0.0, 1), Error);
  EXPECT_THROW(sparsify(lc, 1.5, 1), Error);
}

TEST(ObfuscateAnchors, SameLines) {
  const auto pc = random_cloud(200, 1);
  const auto lc = lift(pc, 2);
  const auto moved = obfuscate_anchors(lc, 10.0, 3);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    EXPECT_LE(point_line_distance(pc.points[i], moved.lines[i]).distance, 1e-12);
    changed += !(moved.lines[i].anchor == lc.lines[i].anchor);
  }
  EXPECT_EQ(changed, pc.size());
}

TEST(SynthScene, RoomOnPlanesAndInsideBox) {
  SceneSpec spec;
  spec.extent = 4.0;
  spec.points_per_unit_area = 2500;
  spec.seed = 1;
  const auto pc = synth_scene(spec);
  const auto surfaces = scene_surfaces(spec);
  ASSERT_GT(pc.size(), 100000u);
  EXPECT_GE(surfaces.size(), 7u);
  EXPECT_LE(surfaces.size(), 5u + 4 * 5);
  for (const auto& p : pc.points) {
    ASSERT_LE(plane_residual(p, surfaces), 1e-12);
    ASSERT_TRUE(p.x >= 0 && p.x <= 4 && p.y >= 0 && p.y <= 4 && p.z >= 0 && p.z <= 4);
  }
}

TEST(SynthScene, HomogeneousFacadeOnPlanes) {
  SceneSpec spec;
  spec.kind = SceneKind::Facade;
  spec.texture_fraction = 0.0;
  spec.points_per_unit_area = 200;
  spec.seed = 4;
  const auto pc = synth_scene(spec);
  const auto surfaces = scene_surfaces(spec);
  ASSERT_GT(pc.size(), 0u);
  for (const auto& p : pc.points) ASSERT_LE(plane_residual(p, surfaces), 1e-12);
}

TEST(SynthScene, CountScalesWithDensity) {
  for (double texture : {0.0, 0.8}) {
    SceneSpec spec;
    spec.texture_fraction = texture;
    spec.points_per_unit_area = 500;
    spec.seed = 2;
    const double n1 = static_cast<double>(synth_scene(spec).size());
    spec.points_per_unit_area = 1000;
    const double n2 = static_cast<double>(synth_scene(spec).size());
    EXPECT_NEAR(n2 / (2 * n1), 1.0, 0.05);
  }
}

TEST(SynthScene, DeterministicUnderSeed) {
  SceneSpec spec;
  spec.points_per_unit_area = 100;
  spec.seed = 8;
  EXPECT_EQ(synth_scene(spec).points, synth_scene(spec).points);
  auto other = spec;
  other.seed = 9;
  EXPECT_NE(synth_scene(spec).points, synth_scene(other).points);
}

TEST(SynthScene, InvalidSpec) {
  SceneSpec spec;
  spec.extent = 0.0;
  EXPECT_THROW(synth_scene(spec), Error);
  spec.extent = 4.0;
  spec.points_per_unit_area = -1;
  EXPECT_THROW(synth_scene(spec), Error);
  spec.points_per_unit_area = 100;
  spec.texture_fraction = 1.5;
  EXPECT_THROW(synth_scene(spec), Error);
}

TEST(BoundingDiagonal, Values) {
  PointCloud pc;
  EXPECT_EQ(bounding_diagonal(pc), 0.0);
  pc.points = {{0, 0, 0}, {1, 2, 2}};
  EXPECT_DOUBLE_EQ(bounding_diagonal(pc), 3.0);
}
