#include <gtest/gtest.h>
#include <omp.h>

#include <algorithm>
#include <cstring>

#include "lineleak/error.hpp"
#include "lineleak/eval.hpp"
#include "lineleak/random.hpp"
#include "lineleak/recover.hpp"
#include "scenes.hpp"

using namespace lineleak;

namespace {

RecoveryConfig small_config() {
  RecoveryConfig cfg;
  cfg.k_coarse = 120;
  cfg.k_refine = 50;
  return cfg;
}

bool same_bits(const RecoveryOutput& a, const RecoveryOutput& b) {
  if (a.estimates.valid != b.estimates.valid || a.estimates.size() != b.estimates.size()) return false;
  if (std::memcmp(a.estimates.positions.data(), b.estimates.positions.data(),
                  a.estimates.size() * sizeof(Point3)) != 0) {
    return false;
  }
  if (a.per_iteration_stats.size() != b.per_iteration_stats.size()) return false;
  for (std::size_t i = 0; i < a.per_iteration_stats.size(); ++i) {
    const auto& x = a.per_iteration_stats[i];
    const auto& y = b.per_iteration_stats[i];
    if (x.valid_count != y.valid_count || x.mean_candidate_count != y.mean_candidate_count ||
        x.mean_ks != y.mean_ks || x.rejected != y.rejected || x.intersection_fallbacks != y.intersection_fallbacks) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST(RecoveryConfig, Validation) {
  auto expect_config_error = [](RecoveryConfig cfg) {
    try {
      cfg.validate();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    }
  };
  RecoveryConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.k_coarse = 50;
  expect_config_error(cfg);
  cfg = {};
  cfg.iterations = 0;
  expect_config_error(cfg);
  cfg = {};
  cfg.k_refine = 3;
  expect_config_error(cfg);
  cfg = {};
  cfg.ks_stop = -0.1;
  expect_config_error(cfg);
}

TEST(RecoveryConfig, Presets) {
  EXPECT_EQ(preset("indoor-dense").k_coarse, 250u);
  EXPECT_EQ(preset("indoor-dense").k_refine, 100u);
  EXPECT_EQ(preset("indoor-sparse").k_coarse, 50u);
  EXPECT_EQ(preset("indoor-sparse").k_refine, 25u);
  EXPECT_EQ(preset("outdoor-dense").k_coarse, 500u);
  EXPECT_EQ(preset("outdoor-dense").k_refine, 200u);
  EXPECT_EQ(preset("outdoor-sparse").k_coarse, 100u);
  EXPECT_EQ(preset("outdoor-sparse").k_refine, 50u);
  for (const auto& name : preset_names()) EXPECT_NO_THROW(preset(name).validate());
  EXPECT_THROW(preset("attic"), Error);
  EXPECT_EQ(preset_for_density(false, 0.05), "indoor-sparse");
  EXPECT_EQ(preset_for_density(false, 0.10), "indoor-dense");
  EXPECT_EQ(preset_for_density(true, 0.01), "outdoor-sparse");
}

TEST(Recover, Errors) {
  EXPECT_THROW(recover(LineCloud{}, small_config()), Error);
  const auto lc = lift(testscene::small_room(1, 1.0), 2);
  try {
    RecoveryConfig cfg;
    cfg.k_refine = 5;
    cfg.k_coarse = lc.size();
    recover(lc, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::KTooLarge);
  }
}

TEST(MedianBeta, Values) {
  EXPECT_EQ(median_beta({3, 1, 2}), 2.0);
  EXPECT_EQ(median_beta({4, 1, 2, 3}), 2.5);
  EXPECT_TRUE(std::isnan(median_beta({})));
}

TEST(Recover, EstimatesStayOnTheirLines) {
  const auto pc = testscene::small_room(3);
  const auto lc = obfuscate_anchors(lift(pc, 4), 7.0, 5);
  int seen = 0;
  const auto out = recover(lc, small_config(), [&](int iteration, const PointEstimates& est) {
    EXPECT_EQ(iteration, ++seen);
    EXPECT_LE(max_line_residual(lc, est), 1e-9);
  });
  EXPECT_EQ(seen, 3);
  EXPECT_EQ(out.estimates.size(), lc.size());
  EXPECT_LE(out.max_line_residual, 1e-9);
  EXPECT_EQ(out.per_iteration_stats.size(), 3u);
  EXPECT_GT(out.estimates.valid_count(), lc.size() * 9 / 10);
}

TEST(Recover, RefinementDoesNotIncreaseMedianError) {
  const auto pc = testscene::small_room(6);
  const auto lc = lift(pc, 7);
  std::vector<double> medians;
  recover(lc, small_config(), [&](int, const PointEstimates& est) { medians.push_back(error_report(pc, est).median); });
  ASSERT_EQ(medians.size(), 3u);
  EXPECT_LE(medians[2], medians[0]);
}

TEST(Recover, ThreadCountDoesNotChangeResult) {
  const auto lc = lift(testscene::small_room(8), 9);
  const int all = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = recover(lc, small_config());
  omp_set_num_threads(4);
  const auto four = recover(lc, small_config());
  omp_set_num_threads(all);
  const auto many = recover(lc, small_config());
  EXPECT_TRUE(same_bits(one, four));
  EXPECT_TRUE(same_bits(one, many));
}

TEST(Recover, RigidMotionEquivariance) {
  const auto lc = lift(testscene::small_room(10), 11);
  const auto motion = testscene::make_rigid(0.7, {3.0, -2.0, 11.0});
  const auto base = recover(lc, small_config());
  const auto moved = recover(motion.apply(lc), small_config());
  ASSERT_EQ(base.estimates.valid, moved.estimates.valid);
  double worst = 0;
  for (std::size_t i = 0; i < lc.size(); ++i) {
    if (!base.estimates.valid[i]) continue;
    worst = std::max(worst, point_point_distance(motion.apply(base.estimates.positions[i]), moved.estimates.positions[i]));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Recover, ConcurrentLinesCollapseToTheirCommonPoint) {
  Rng rng(12);
  const Point3 q{1.5, -2.0, 0.25};
  LineCloud lc;
  for (int i = 0; i < 400; ++i) {
    const auto d = sample_uniform_direction(rng);
    lc.lines.push_back({q + d.vec() * rng.uniform(-5, 5), d});
  }
  const auto out = recover(lc, small_config());
  ASSERT_EQ(out.estimates.valid_count(), lc.size());
  for (const auto& p : out.estimates.positions) EXPECT_LE(point_point_distance(p, q), 1e-9);
}

TEST(Recover, ScaleEquivariance) {
  const auto pc = testscene::small_room(13);
  const auto lc = lift(pc, 14);
  PointCloud big = pc;
  for (auto& p : big.points) p = {p.x * 4.0, p.y * 4.0, p.z * 4.0};
  LineCloud big_lc = lc;
  for (auto& l : big_lc.lines) l.anchor = {l.anchor.x * 4.0, l.anchor.y * 4.0, l.anchor.z * 4.0};
  const auto a = error_report(pc, recover(lc, small_config()));
  const auto b = error_report(big, recover(big_lc, small_config()));
  EXPECT_NEAR(b.median, 4.0 * a.median, 1e-9);
}

TEST(Recover, InvalidateFallbackNeverKeepsStaleEstimates) {
  const auto lc = lift(testscene::small_room(15), 16);
  auto cfg = small_config();
  cfg.fallback = Fallback::Invalidate;
  const auto out = recover(lc, cfg);
  EXPECT_EQ(out.per_iteration_stats.back().valid_count, out.estimates.valid_count());
  EXPECT_EQ(out.per_iteration_stats.back().valid_count + out.per_iteration_stats.back().rejected, lc.size());
}

TEST(Recover, LineLineEveryIterationStaysOnLines) {
  const auto lc = lift(testscene::small_room(17), 18);
  auto cfg = small_config();
  cfg.line_line_every_iteration = true;
  EXPECT_LE(recover(lc, cfg).max_line_residual, 1e-9);
}

TEST(RecoverWithOracle, OutliersDegradeTheMedian) {
  const auto pc = testscene::small_room(19, 60);
  const auto lc = lift(pc, 20);
  double previous = 0;
  for (double f : {0.0, 0.5, 0.9}) {
    const auto out = recover_with_oracle(lc, pc, 50, f, small_config());
    EXPECT_LE(out.max_line_residual, 1e-9);
    const double m = error_report(pc, out).median;
    EXPECT_GT(m, previous);
    previous = m;
  }
  EXPECT_THROW(recover_with_oracle(lc, testscene::small_room(1, 1.0), 50, 0.0, small_config()), Error);
}

TEST(Recover, PipelineWithinTwiceTheOracleOnARoom) {
  lineleak::SceneSpec spec;
  spec.points_per_unit_area = 250;
  spec.seed = 1;
  const auto pc = synth_scene(spec);
  ASSERT_GE(pc.size(), 20000u);
  const auto lc = lift(pc, 101);
  RecoveryConfig oracle_cfg;
  oracle_cfg.iterations = 1;
  const double pipeline = error_report(pc, recover(lc, RecoveryConfig{})).median;
  const double oracle_median = error_report(pc, recover_with_oracle(lc, pc, 50, 0.0, oracle_cfg)).median;
  EXPECT_LE(pipeline, 2.0 * oracle_median) << "ratio " << pipeline / oracle_median;
}
