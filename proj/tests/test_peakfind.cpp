#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "lineleak/error.hpp"
#include "lineleak/peakfind.hpp"
#include "lineleak/random.hpp"
#include "oracles.hpp"

using namespace lineleak;

namespace {

// Kuiper statistic straight from the definitions: sup of F_i - F_U and of
// F_U - F_i over both one-sided limits of the step CDF, evaluated on a dense
// grid plus every sample point. Only the in-window samples count.
double kuiper_oracle(std::vector<double> b, Window w) {
  std::vector<double> in;
  for (double v : b) {
    if (w.contains(v)) in.push_back(v);
  }
  const double n = static_cast<double>(in.size());
  auto below = [&](double x) { return std::count_if(in.begin(), in.end(), [&](double v) { return v < x; }) / n; };
  auto upto = [&](double x) { return std::count_if(in.begin(), in.end(), [&](double v) { return v <= x; }) / n; };
  auto fu = [&](double x) { return std::clamp((x - w.lo) / w.width(), 0.0, 1.0); };
  double dp = 0, dm = 0;
  for (double x : in) {
    dp = std::max({dp, upto(x) - fu(x), below(x) - fu(x)});
    dm = std::max({dm, fu(x) - below(x), fu(x) - upto(x)});
  }
  return dp + dm;
}

CandidateSet mixture(std::uint64_t seed) {
  Rng rng(seed);
  CandidateSet cs;
  for (int i = 0; i < 40; ++i) cs.betas.push_back(3.7 + 0.05 * rng.normal());
  for (int i = 0; i < 10; ++i) cs.betas.push_back(rng.uniform(0, 10));
  return cs;
}

CandidateSet random_set(Rng& rng) {
  CandidateSet cs;
  const int kind = static_cast<int>(rng.below(3));
  const int n = 5 + static_cast<int>(rng.below(200));
  const double center = rng.uniform(-5, 5);
  for (int i = 0; i < n; ++i) {
    if (kind == 0 || rng.uniform() < 0.3) {
      cs.betas.push_back(rng.uniform(-10, 10));
    } else if (kind == 1) {
      cs.betas.push_back(center + 0.1 * rng.normal());
    } else {
      cs.betas.push_back((i % 2 ? center : -center) + 0.05 * rng.normal());
    }
  }
  return cs;
}

}  // namespace

TEST(Candidates, IntersectingNeighbor) {
  LineCloud lc;
  lc.lines.push_back({{0, 0, 0}, Direction3::normalized({1, 0, 0})});
  lc.lines.push_back({{2.5, -1, 0}, Direction3::normalized({0, 1, 0})});
  lc.lines.push_back({{0, 3, 0}, Direction3::normalized({1, 0, 0})});  // parallel, skipped
  const auto cs = candidates(lc, 0, NeighborList{0, {1, 2}, {0, 3}});
  ASSERT_EQ(cs.betas.size(), 1u);
  EXPECT_DOUBLE_EQ(cs.betas[0], 2.5);
  EXPECT_THROW(candidates(lc, 0, NeighborList{0, {2}, {3}}), Error);
  EXPECT_THROW(candidates(lc, 0, NeighborList{1, {2}, {3}}), Error);
}

TEST(Candidates, ReproduceClosestPoints) {
  Rng rng(4);
  LineCloud lc;
  for (int i = 0; i < 30; ++i) {
    lc.lines.push_back({{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}, sample_uniform_direction(rng)});
  }
  NeighborList nl{0, {}, {}};
  for (std::uint32_t j = 1; j < 30; ++j) nl.indices.push_back(j);
  const auto cs = candidates(lc, 0, nl);
  ASSERT_EQ(cs.betas.size(), 29u);
  for (std::size_t a = 0; a < cs.betas.size(); ++a) {
    const auto o = oracle::closest_points(lc.lines[0], lc.lines[nl.indices[a]], 30.0);
    EXPECT_LE(oracle::dist(lc.lines[0].at(cs.betas[a]), oracle::at(lc.lines[0], o.a)), 1e-6);
  }
}

TEST(EmpiricalCdf, Examples) {
  const std::vector<double> b{1, 2, 3};
  EXPECT_DOUBLE_EQ(empirical_cdf(b, 2), 1.0 / 3.0);
  EXPECT_EQ(empirical_cdf(b, 0.5), 0.0);
  EXPECT_EQ(empirical_cdf(b, 3.5), 1.0);
  EXPECT_DOUBLE_EQ(empirical_cdf(std::vector<double>{0, 0.5, 1}, 0.75), 2.0 / 3.0);
}

TEST(Kuiper, HandCase) {
  const auto k = kuiper(std::vector<double>{0, 0.5, 1}, {0, 1});
  EXPECT_DOUBLE_EQ(k.d_plus, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(k.d_minus, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(k.ks, 2.0 / 3.0);
  EXPECT_EQ(k.count, 3u);
}

TEST(Kuiper, UniformGrid) {
  std::vector<double> b;
  for (int i = 1; i <= 1000; ++i) b.push_back(i / 1001.0);
  EXPECT_LE(kuiper(b, {0, 1}).ks, 0.01);
}

TEST(Kuiper, PointMass) {
  Rng rng(3);
  std::vector<double> b;
  for (int i = 0; i < 200; ++i) b.push_back(0.3 + rng.uniform(-1e-4, 1e-4));
  EXPECT_GE(kuiper(b, {-1, 1}).ks, 0.99);
}

TEST(Kuiper, MatchesDefinitionOracle) {
  Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    const auto cs = random_set(rng);
    const Window w{rng.uniform(-12, -2), rng.uniform(2, 12)};
    std::size_t inside = 0;
    for (double v : cs.betas) inside += w.contains(v);
    if (inside < 2) continue;
    const auto k = kuiper(cs.betas, w);
    EXPECT_NEAR(k.ks, kuiper_oracle(cs.betas, w), 1e-12);
    EXPECT_GE(k.d_plus, 0.0);
    EXPECT_LE(k.d_plus, 1.0);
    EXPECT_GE(k.d_minus, 0.0);
    EXPECT_LE(k.d_minus, 1.0);
    EXPECT_EQ(k.count, inside);
  }
}

TEST(Kuiper, Errors) {
  try {
    kuiper(std::vector<double>{1, 1, 1}, {1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateWindow);
  }
  try {
    kuiper(std::vector<double>{0.5, 7}, {0, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewCandidates);
  }
}

TEST(SplitPeaks, UnimodalIsOneWindow) {
  Rng rng(6);
  std::vector<double> b;
  for (int i = 0; i < 200; ++i) b.push_back(0.5 + 0.05 * rng.normal());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(split_peaks(b, {b.front(), b.back()}).size(), 1u);
}

TEST(SplitPeaks, TwoClustersSplitBetweenThem) {
  Rng rng(7);
  std::vector<double> b;
  for (int i = 0; i < 100; ++i) b.push_back(0.2 + 0.01 * rng.normal());
  for (int i = 0; i < 100; ++i) b.push_back(0.8 + 0.01 * rng.normal());
  const auto ws = split_peaks(b, {0, 1});
  ASSERT_EQ(ws.size(), 2u);
  EXPECT_EQ(ws.front().lo, 0.0);
  EXPECT_EQ(ws.back().hi, 1.0);
  EXPECT_EQ(ws[0].hi, ws[1].lo);
  EXPECT_GT(ws[0].hi, 0.25);
  EXPECT_LT(ws[0].hi, 0.75);
}

TEST(SplitPeaks, UniformGridHasNoConfidentPeak) {
  std::vector<double> b;
  for (int i = 1; i <= 1000; ++i) b.push_back(i / 1001.0);
  const Window all{0, 1};
  const double global = kuiper(b, all).ks;
  for (const auto& w : split_peaks(b, all)) {
    std::size_t inside = 0;
    for (double v : b) inside += w.contains(v);
    if (inside >= 2 && w.width() > 0) EXPECT_LE(kuiper(b, w).ks, global + 0.05);
  }
}

TEST(FindPeak, NormalMixtureMatchesKdeMode) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto cs = mixture(seed);
    const auto r = find_peak(cs);
    ASSERT_EQ(r.status, PeakStatus::Found);
    const double mode = oracle::kde_mode(cs.betas, 0.05, 0, 10);
    EXPECT_NEAR(r.beta_hat, 3.7, 0.05) << "seed " << seed;
    EXPECT_NEAR(r.beta_hat, mode, 0.05) << "seed " << seed;
    EXPECT_LE(r.interval.lo, r.beta_hat);
    EXPECT_GE(r.interval.hi, r.beta_hat);
    EXPECT_LT(r.ks_final, 0.4);
  }
}

TEST(FindPeak, AllEqualIsDegenerate) {
  CandidateSet cs{0, std::vector<double>(12, 1.25)};
  const auto r = find_peak(cs);
  EXPECT_EQ(r.status, PeakStatus::Degenerate);
  EXPECT_EQ(r.beta_hat, 1.25);
}

TEST(FindPeak, TooFewIsRejected) {
  CandidateSet cs{0, {1, 2, 3, 4}};
  const auto r = find_peak(cs);
  EXPECT_EQ(r.status, PeakStatus::Rejected);
  EXPECT_TRUE(std::isnan(r.beta_hat));
}

TEST(FindPeak, UniformCandidatesStayCentral) {
  int central = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    CandidateSet cs;
    for (int i = 0; i < 50; ++i) cs.betas.push_back(rng.uniform());
    const auto r = find_peak(cs);
    ASSERT_NE(r.status, PeakStatus::Rejected);
    const auto [lo, hi] = std::minmax_element(cs.betas.begin(), cs.betas.end());
    const double q = (*hi - *lo) / 4;
    central += r.beta_hat >= *lo + q && r.beta_hat <= *hi - q;
  }
  EXPECT_GE(central, 900);
}

TEST(FindPeak, AffineInvariance) {
  Rng rng(8);
  for (int t = 0; t < 1000; ++t) {
    const auto cs = random_set(rng);
    const double a = std::exp(rng.uniform(-3, 3));
    const double b = rng.uniform(-100, 100);
    CandidateSet moved = cs;
    for (double& v : moved.betas) v = a * v + b;
    const auto r = find_peak(cs);
    const auto m = find_peak(moved);
    ASSERT_EQ(r.status, m.status);
    const double scale = a * 20 + std::abs(b);
    EXPECT_NEAR(m.beta_hat, a * r.beta_hat + b, 1e-9 * scale) << t;
    EXPECT_NEAR(m.ks_final, r.ks_final, 1e-9) << t;
  }
}

TEST(FindPeak, PowerOfTwoScalingIsExact) {
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    const auto cs = random_set(rng);
    CandidateSet moved = cs;
    for (double& v : moved.betas) v *= 8.0;
    const auto r = find_peak(cs);
    const auto m = find_peak(moved);
    EXPECT_EQ(m.beta_hat, 8.0 * r.beta_hat);
    EXPECT_EQ(m.ks_final, r.ks_final);
  }
}

TEST(FindPeak, ReversalInvariance) {
  Rng rng(10);
  for (int t = 0; t < 1000; ++t) {
    const auto cs = random_set(rng);
    CandidateSet flipped = cs;
    for (double& v : flipped.betas) v = -v;
    const auto r = find_peak(cs);
    const auto f = find_peak(flipped);
    ASSERT_EQ(r.status, f.status);
    EXPECT_NEAR(f.beta_hat, -r.beta_hat, 1e-9) << t;
    EXPECT_NEAR(f.ks_final, r.ks_final, 1e-9) << t;
  }
}

TEST(FindPeak, OrderInvariance) {
  Rng rng(11);
  for (int t = 0; t < 300; ++t) {
    const auto cs = random_set(rng);
    CandidateSet shuffled = cs;
    std::shuffle(shuffled.betas.begin(), shuffled.betas.end(), rng.engine());
    const auto r = find_peak(cs);
    const auto s = find_peak(shuffled);
    EXPECT_EQ(r.beta_hat, s.beta_hat);
    EXPECT_EQ(r.ks_final, s.ks_final);
    EXPECT_EQ(r.interval, s.interval);
  }
}

TEST(FindPeak, RecursionStrictlyShrinks) {
  Rng rng(12);
  for (int t = 0; t < 300; ++t) {
    const auto cs = random_set(rng);
    PeakTrace trace;
    const auto r = find_peak(cs, {}, &trace);
    ASSERT_FALSE(trace.windows.empty());
    for (std::size_t a = 1; a < trace.windows.size(); ++a) {
      EXPECT_LT(trace.windows[a].width(), trace.windows[a - 1].width());
      EXPECT_GE(trace.windows[a].lo, trace.windows[a - 1].lo);
      EXPECT_LE(trace.windows[a].hi, trace.windows[a - 1].hi);
    }
    EXPECT_LE(r.n_recursions, 20);
    EXPECT_GE(r.ks_final, 0.0);
    EXPECT_LE(r.ks_final, 2.0);
  }
}

TEST(FindPeak, MaxDepthBoundsRecursion) {
  const auto cs = mixture(3);
  PeakConfig cfg;
  cfg.ks_stop = 0.0;
  cfg.max_depth = 2;
  EXPECT_LE(find_peak(cs, cfg).n_recursions, 2);
}

TEST(PeakTraceCsv, LevelsPerCandidate) {
  const auto cs = mixture(1);
  PeakTrace trace;
  find_peak(cs, {}, &trace);
  const auto path = (std::filesystem::temp_directory_path() / "lineleak_trace.csv").string();
  write_peak_trace_csv(cs, trace, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "beta,window_level");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, cs.betas.size());
}
