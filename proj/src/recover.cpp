#include "lineleak/recover.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "lineleak/error.hpp"

namespace lineleak {

const char* to_string(Fallback f) {
  return f == Fallback::KeepPrevious ? "keep-previous" : "invalidate";
}

const char* to_string(Estimator e) { return e == Estimator::Median ? "median" : "peak"; }

Fallback fallback_from_string(const std::string& name) {
  if (name == "keep-previous") return Fallback::KeepPrevious;
  if (name == "invalidate") return Fallback::Invalidate;
  throw Error(ErrorCode::ConfigError, "unknown fallback '" + name + "' (keep-previous | invalidate)");
}

Estimator estimator_from_string(const std::string& name) {
  if (name == "median") return Estimator::Median;
  if (name == "peak") return Estimator::Peak;
  throw Error(ErrorCode::ConfigError, "unknown estimator '" + name + "' (median | peak)");
}

PeakConfig RecoveryConfig::peak_config() const {
  PeakConfig pc;
  pc.ks_stop = ks_stop;
  pc.min_candidates = min_candidates;
  pc.max_depth = max_depth;
  return pc;
}

void RecoveryConfig::validate() const {
  if (iterations < 1) throw Error(ErrorCode::ConfigError, "iterations must be >= 1");
  if (k_coarse < k_refine) {
    throw Error(ErrorCode::ConfigError, "k_coarse (" + std::to_string(k_coarse) + ") must be >= k_refine (" +
                                            std::to_string(k_refine) + ")");
  }
  if (k_refine < min_candidates) {
    throw Error(ErrorCode::ConfigError, "k_refine (" + std::to_string(k_refine) + ") must be >= min_candidates (" +
                                            std::to_string(min_candidates) + ")");
  }
  if (min_candidates < 2) throw Error(ErrorCode::ConfigError, "min_candidates must be >= 2");
  if (!(ks_stop >= 0.0 && ks_stop <= 2.0)) throw Error(ErrorCode::ConfigError, "ks_stop must lie in [0, 2]");
  if (max_depth < 0) throw Error(ErrorCode::ConfigError, "max_depth must be >= 0");
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"indoor-dense", "indoor-sparse", "outdoor-dense", "outdoor-sparse"};
  return names;
}

RecoveryConfig preset(const std::string& name) {
  RecoveryConfig cfg;
  if (name == "indoor-dense") {
    cfg.k_coarse = 250;
    cfg.k_refine = 100;
  } else if (name == "indoor-sparse") {
    cfg.k_coarse = 50;
    cfg.k_refine = 25;
  } else if (name == "outdoor-dense") {
    cfg.k_coarse = 500;
    cfg.k_refine = 200;
  } else if (name == "outdoor-sparse") {
    cfg.k_coarse = 100;
    cfg.k_refine = 50;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown preset '" + name + "'");
  }
  return cfg;
}

std::string preset_for_density(bool outdoor, double fraction) {
  const bool sparse = fraction <= 0.05;
  return std::string(outdoor ? "outdoor" : "indoor") + (sparse ? "-sparse" : "-dense");
}

double median_beta(std::vector<double> betas) {
  const std::size_t n = betas.size();
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = betas.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(betas.begin(), mid, betas.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(betas.begin(), mid);
  return 0.5 * (lower + upper);
}

double max_line_residual(const LineCloud& lc, const PointEstimates& est) {
  double worst = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (est.valid[i]) worst = std::max(worst, point_line_distance(est.positions[i], lc.lines[i]).distance);
  }
  return worst;
}

namespace {

struct LineOutcome {
  Point3 position;
  PeakStatus status = PeakStatus::Rejected;
  double ks = 0.0;
  std::uint32_t candidate_count = 0;
  bool intersection_fallback = false;
};

template <class Body>
std::vector<LineOutcome> for_each_line(std::size_t n, const Body& body) {
  std::vector<LineOutcome> out(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel
  {
    std::vector<double> betas;
#pragma omp for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < count; ++i) {
      out[static_cast<std::size_t>(i)] = body(static_cast<std::size_t>(i), betas);
    }
  }
  return out;
}

LineOutcome estimate(const Line3& line, std::vector<double>& betas, Estimator estimator, const PeakConfig& pc) {
  LineOutcome o;
  o.candidate_count = static_cast<std::uint32_t>(betas.size());
  double beta_hat = std::numeric_limits<double>::quiet_NaN();
  if (estimator == Estimator::Median) {
    if (!betas.empty()) {
      beta_hat = median_beta(betas);
      o.status = PeakStatus::Found;
    }
  } else {
    CandidateSet cs;
    cs.betas.swap(betas);
    const PeakResult r = find_peak(cs, pc);
    cs.betas.swap(betas);
    o.status = r.status;
    o.ks = r.ks_final;
    beta_hat = r.beta_hat;
  }
  if (o.status != PeakStatus::Rejected) o.position = line.at(beta_hat);
  return o;
}

// Folds per-line outcomes into the next estimate buffer.
IterationStats commit(const std::vector<LineOutcome>& outcomes, const PointEstimates& previous, Fallback fallback,
                      PointEstimates& next) {
  IterationStats stats;
  double candidate_sum = 0.0;
  double ks_sum = 0.0;
  std::size_t peaks = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const LineOutcome& o = outcomes[i];
    candidate_sum += o.candidate_count;
    if (o.intersection_fallback) ++stats.intersection_fallbacks;
    if (o.status == PeakStatus::Rejected) {
      ++stats.rejected;
      if (fallback == Fallback::KeepPrevious && previous.valid[i]) {
        next.positions[i] = previous.positions[i];
        next.valid[i] = 1;
      } else {
        next.positions[i] = Point3{};
        next.valid[i] = 0;
      }
      continue;
    }
    next.positions[i] = o.position;
    next.valid[i] = 1;
    ks_sum += o.ks;
    ++peaks;
  }
  const double n = static_cast<double>(outcomes.size());
  stats.valid_count = next.valid_count();
  stats.mean_candidate_count = outcomes.empty() ? 0.0 : candidate_sum / n;
  stats.mean_ks = peaks == 0 ? 0.0 : ks_sum / static_cast<double>(peaks);
  return stats;
}

void merge_unique(std::vector<std::uint32_t>& into, const std::vector<std::uint32_t>& extra) {
  for (std::uint32_t j : extra) {
    if (std::find(into.begin(), into.end(), j) == into.end()) into.push_back(j);
  }
}

}  // namespace

RecoveryOutput recover(const LineCloud& lc, const RecoveryConfig& cfg, const IterationObserver& observer) {
  cfg.validate();
  const std::size_t n = lc.size();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "line cloud is empty");
  if (cfg.k_coarse >= n) {
    throw Error(ErrorCode::KTooLarge,
                "k_coarse = " + std::to_string(cfg.k_coarse) + " needs more than " + std::to_string(n) + " lines");
  }
  const PeakConfig pc = cfg.peak_config();

  RecoveryOutput out;
  out.config = cfg;
  PointEstimates previous = PointEstimates::invalid(n);
  PointEstimates next = PointEstimates::invalid(n);

  std::vector<std::vector<std::uint32_t>> line_line_cache;
  if (cfg.line_line_every_iteration) line_line_cache.resize(n);

  {
    const LineLineSearch search(lc);
    const auto outcomes = for_each_line(n, [&](std::size_t i, std::vector<double>& betas) {
      NeighborList nl = search.query(i, cfg.k_coarse);
      collect_candidates(lc, i, nl.indices, betas);
      if (cfg.line_line_every_iteration) {
        nl.indices.resize(std::min(nl.indices.size(), cfg.k_refine));
        line_line_cache[i] = std::move(nl.indices);
      }
      return estimate(lc.lines[i], betas, Estimator::Peak, pc);
    });
    out.per_iteration_stats.push_back(commit(outcomes, previous, Fallback::Invalidate, next));
    std::swap(previous, next);
    if (observer) observer(1, previous);
  }

  for (int it = 2; it <= cfg.iterations; ++it) {
    const std::size_t valid = previous.valid_count();
    if (valid < 2) break;
    const std::size_t k = std::min(cfg.k_refine, valid - 1);
    const PointLineSearch point_line(lc, previous);
    const LinePointSearch line_point(lc, previous);
    const auto outcomes = for_each_line(n, [&](std::size_t i, std::vector<double>& betas) {
      NeighborList npl = point_line.query(i, k);
      const NeighborList nlp = line_point.query(i, k);
      NeighborList both = intersect(npl, nlp);
      const bool fell_back = both.empty();
      std::vector<std::uint32_t>& ids = fell_back ? npl.indices : both.indices;
      if (cfg.line_line_every_iteration) merge_unique(ids, line_line_cache[i]);
      collect_candidates(lc, i, ids, betas);
      LineOutcome o = estimate(lc.lines[i], betas, Estimator::Peak, pc);
      o.intersection_fallback = fell_back;
      return o;
    });
    out.per_iteration_stats.push_back(commit(outcomes, previous, cfg.fallback, next));
    std::swap(previous, next);
    if (observer) observer(it, previous);
  }

  out.estimates = std::move(previous);
  out.max_line_residual = max_line_residual(lc, out.estimates);
  return out;
}

RecoveryOutput recover_with_oracle(const LineCloud& lc, const PointCloud& pc_true, std::size_t k,
                                   double outlier_fraction, const RecoveryConfig& cfg, Estimator estimator) {
  if (lc.size() != pc_true.size()) {
    throw Error(ErrorCode::MisalignedInputs, "line cloud has " + std::to_string(lc.size()) + " lines but the truth has " +
                                                 std::to_string(pc_true.size()) + " points");
  }
  const std::size_t n = lc.size();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "line cloud is empty");
  const PeakConfig pc = cfg.peak_config();
  const auto neighbors = oracle_neighbors(pc_true, k, outlier_fraction, cfg.seed);

  RecoveryOutput out;
  out.config = cfg;
  out.config.iterations = 1;
  const PointEstimates none = PointEstimates::invalid(n);
  PointEstimates next = PointEstimates::invalid(n);
  const auto outcomes = for_each_line(n, [&](std::size_t i, std::vector<double>& betas) {
    collect_candidates(lc, i, neighbors[i].indices, betas);
    return estimate(lc.lines[i], betas, estimator, pc);
  });
  out.per_iteration_stats.push_back(commit(outcomes, none, Fallback::Invalidate, next));
  out.estimates = std::move(next);
  out.max_line_residual = max_line_residual(lc, out.estimates);
  return out;
}

}  // namespace lineleak
