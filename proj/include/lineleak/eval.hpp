#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "lineleak/linecloud.hpp"
#include "lineleak/recover.hpp"

namespace lineleak {

struct CdfPoint {
  double x = 0.0;
  double fraction = 0.0;
};

/// Recovery error against ground truth, over valid estimates only.
struct ErrorReport {
  std::vector<double> per_point_errors;  // NaN where the estimate is invalid
  std::vector<CdfPoint> cdf;             // fraction of valid errors <= threshold
  double median = 0.0;
  double mean = 0.0;
  double p90 = 0.0;
  double valid_fraction = 0.0;
  std::size_t valid_count = 0;
  std::size_t total = 0;
};

inline constexpr std::size_t kCdfThresholds = 200;
inline constexpr double kCdfMinThreshold = 1e-4;

/// truth[i] is the true position behind estimate i. The CDF uses 200
/// log-spaced thresholds from 1e-4 to the truth's bounding diagonal, plus a
/// closing point at the largest error if that lies beyond.
ErrorReport error_report(const PointCloud& truth, const PointEstimates& est);
ErrorReport error_report(const PointCloud& truth, const RecoveryOutput& output);

/// Linear-interpolation quantile of a sorted sample, q in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double q);

/// Two lines through p = origin and p1 with independent uniform directions;
/// X = d(p, p_hat) / d(p, p1) where p_hat is the point of the first line
/// closest to the second.
struct MonteCarloReport {
  std::size_t samples = 0;
  std::vector<CdfPoint> cdf;  // P(X < x) on x = 0, 0.025, ..., 5
  double p_closer = 0.0;      // P(X < 1)
  double cdf_at(double x) const;
};

MonteCarloReport montecarlo_two_point(std::size_t samples, std::uint64_t seed, const Point3& p1 = {1.0, 0.0, 0.0});

/// Mean over points of the fraction of candidates from the lines of the true
/// k nearest neighbors that fall within d_max (distance to the k-th
/// neighbor) of the true point. lc must be lifted from pc.
struct CandidateSpread {
  double mean_within_dmax = 0.0;
  double median_dmax = 0.0;
};

CandidateSpread candidate_spread(const PointCloud& pc, const LineCloud& lc, std::size_t k);

struct SweepOptions {
  std::uint64_t seed = 0;
  bool outdoor = false;      // outdoor presets instead of indoor
  int iterations = 3;
  double ks_stop = 0.4;
  bool oracle = false;       // true neighborhoods instead of recover()
  std::size_t oracle_k = 50;
};

struct SweepRow {
  double fraction = 0.0;
  std::string preset;
  std::size_t lines = 0;
  ErrorReport report;
  double max_line_residual = 0.0;
};

/// lift once, then for every fraction sparsify, recover with the preset for
/// that density, and compare against the surviving points.
std::vector<SweepRow> sparsity_sweep(const PointCloud& pc, const std::vector<double>& fractions,
                                     const SweepOptions& options = {});

/// Drops points whose mean distance to their k_nn nearest neighbors exceeds
/// the global mean by more than alpha standard deviations. `kept` receives
/// the surviving source indices.
PointCloud remove_statistical_outliers(const PointCloud& pc, std::size_t k_nn = 20, double alpha = 2.0,
                                       std::vector<std::size_t>* kept = nullptr);

void write_cdf_csv(const std::vector<CdfPoint>& cdf, const std::string& header, const std::string& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

nlohmann::json to_json(const ErrorReport& r);
nlohmann::json to_json(const MonteCarloReport& r);
nlohmann::json to_json(const RecoveryConfig& cfg);
nlohmann::json to_json(const RecoveryOutput& out);

}  // namespace lineleak
