#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lineleak/linecloud.hpp"
#include "lineleak/neighborhood.hpp"
#include "lineleak/peakfind.hpp"

namespace lineleak {

/// What happens to a line whose peak search is rejected.
enum class Fallback { KeepPrevious, Invalidate };

/// How a candidate set becomes one line parameter.
enum class Estimator { Median, Peak };

const char* to_string(Fallback f);
const char* to_string(Estimator e);
Fallback fallback_from_string(const std::string& name);
Estimator estimator_from_string(const std::string& name);

struct RecoveryConfig {
  std::size_t k_coarse = 250;  // line-line neighborhood, first iteration
  std::size_t k_refine = 100;  // point-line and line-point neighborhoods
  int iterations = 3;
  double ks_stop = 0.4;
  std::size_t min_candidates = 5;
  int max_depth = 20;
  std::uint64_t seed = 0;
  /// In the first iteration there is nothing to keep, so a rejected line is
  /// invalid under either policy.
  Fallback fallback = Fallback::KeepPrevious;
  /// Also feed the first iteration's line-line neighbors (truncated to
  /// k_refine) into every refinement iteration.
  bool line_line_every_iteration = false;

  PeakConfig peak_config() const;
  /// Throws ConfigError naming the violated constraint.
  void validate() const;
};

/// Neighbor counts per scene type and density: indoor-dense, indoor-sparse,
/// outdoor-dense, outdoor-sparse. Throws ConfigError for unknown names.
RecoveryConfig preset(const std::string& name);
const std::vector<std::string>& preset_names();
/// indoor-sparse / outdoor-sparse at or below 5% of the full density.
std::string preset_for_density(bool outdoor, double fraction);

struct IterationStats {
  std::size_t valid_count = 0;
  double mean_candidate_count = 0.0;
  double mean_ks = 0.0;                 // over lines with a found or degenerate peak
  std::size_t rejected = 0;             // lines whose peak search was rejected this iteration
  std::size_t intersection_fallbacks = 0;  // empty N_pl ∩ N_lp, N_pl used alone
};

struct RecoveryOutput {
  PointEstimates estimates;
  std::vector<IterationStats> per_iteration_stats;
  RecoveryConfig config;
  /// Largest distance of a valid estimate from its own line.
  double max_line_residual = 0.0;
};

/// Largest point_line_distance of a valid estimate from its line.
double max_line_residual(const LineCloud& lc, const PointEstimates& est);

/// Called after every iteration with its 1-based number and estimates.
using IterationObserver = std::function<void(int, const PointEstimates&)>;

/// Iteration 1 uses line-line neighborhoods; later iterations use the
/// intersection of point-line and line-point neighborhoods around the
/// previous estimates. Every estimate is anchor + beta_hat * direction.
RecoveryOutput recover(const LineCloud& lc, const RecoveryConfig& cfg, const IterationObserver& observer = {});

/// Single pass with true point neighborhoods of pc_true (index-aligned with
/// lc), a fraction of them replaced by random outliers.
RecoveryOutput recover_with_oracle(const LineCloud& lc, const PointCloud& pc_true, std::size_t k,
                                   double outlier_fraction, const RecoveryConfig& cfg,
                                   Estimator estimator = Estimator::Median);

/// Median of the candidate parameters, even counts averaging the middle two.
/// NaN for an empty set.
double median_beta(std::vector<double> betas);

}  // namespace lineleak
