#include "lineleak/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "lineleak/error.hpp"
#include "lineleak/neighborhood.hpp"
#include "lineleak/random.hpp"

namespace lineleak {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out.precision(17);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return kNaN;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double t = pos - static_cast<double>(lo);
  if (t == 0.0) return sorted[lo];
  return sorted[lo] + t * (sorted[hi] - sorted[lo]);
}

ErrorReport error_report(const PointCloud& truth, const PointEstimates& est) {
  if (truth.size() != est.size() || est.valid.size() != est.size()) {
    throw Error(ErrorCode::MisalignedInputs, "truth has " + std::to_string(truth.size()) + " points but there are " +
                                                 std::to_string(est.size()) + " estimates");
  }
  ErrorReport r;
  r.total = truth.size();
  r.per_point_errors.assign(r.total, kNaN);
  const auto n = static_cast<std::int64_t>(r.total);
#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < n; ++s) {
    const auto i = static_cast<std::size_t>(s);
    if (est.valid[i]) r.per_point_errors[i] = point_point_distance(truth.points[i], est.positions[i]);
  }

  std::vector<double> sorted;
  sorted.reserve(r.total);
  for (double e : r.per_point_errors) {
    if (!std::isnan(e)) sorted.push_back(e);
  }
  std::sort(sorted.begin(), sorted.end());
  r.valid_count = sorted.size();
  r.valid_fraction = r.total == 0 ? 0.0 : static_cast<double>(r.valid_count) / static_cast<double>(r.total);
  r.median = quantile_sorted(sorted, 0.5);
  r.p90 = quantile_sorted(sorted, 0.9);
  r.mean = sorted.empty() ? kNaN : std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());

  const double top = std::max(bounding_diagonal(truth), kCdfMinThreshold);
  const double step = std::log(top / kCdfMinThreshold) / static_cast<double>(kCdfThresholds - 1);
  auto fraction_upto = [&](double x) {
    if (sorted.empty()) return 0.0;
    const auto k = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
    return static_cast<double>(k) / static_cast<double>(sorted.size());
  };
  for (std::size_t t = 0; t < kCdfThresholds; ++t) {
    const double x = t + 1 == kCdfThresholds ? top : kCdfMinThreshold * std::exp(step * static_cast<double>(t));
    r.cdf.push_back({x, fraction_upto(x)});
  }
  if (!sorted.empty() && sorted.back() > top) r.cdf.push_back({sorted.back(), 1.0});
  return r;
}

ErrorReport error_report(const PointCloud& truth, const RecoveryOutput& output) {
  return error_report(truth, output.estimates);
}

double MonteCarloReport::cdf_at(double x) const {
  if (cdf.empty()) return kNaN;
  auto it = std::lower_bound(cdf.begin(), cdf.end(), x, [](const CdfPoint& p, double v) { return p.x < v; });
  if (it == cdf.end()) return cdf.back().fraction;
  if (it->x == x || it == cdf.begin()) return it->fraction;
  const CdfPoint& a = *(it - 1);
  const CdfPoint& b = *it;
  return a.fraction + (x - a.x) / (b.x - a.x) * (b.fraction - a.fraction);
}

MonteCarloReport montecarlo_two_point(std::size_t samples, std::uint64_t seed, const Point3& p1) {
  if (samples == 0) throw Error(ErrorCode::InvalidSamples, "Monte Carlo needs at least one sample");
  const Point3 p{0.0, 0.0, 0.0};
  const double baseline = point_point_distance(p, p1);
  if (!(baseline > 0.0) || !p1.is_finite()) {
    throw Error(ErrorCode::InvalidArgument, "p1 must be a finite point away from the origin");
  }

  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<double> xs(samples);
  const auto nchunks = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t c = 0; c < nchunks; ++c) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(c));
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
    const std::size_t end = std::min(samples, begin + kChunk);
    for (std::size_t s = begin; s < end; ++s) {
      for (;;) {
        const Line3 a{p, sample_uniform_direction(rng)};
        const Line3 b{p1, sample_uniform_direction(rng)};
        if (const auto cp = closest_points(a, b)) {
          xs[s] = point_point_distance(p, a.at(cp->beta_a)) / baseline;
          break;
        }
      }
    }
  }

  std::sort(xs.begin(), xs.end());
  MonteCarloReport r;
  r.samples = samples;
  auto below = [&](double x) {
    const auto k = std::lower_bound(xs.begin(), xs.end(), x) - xs.begin();
    return static_cast<double>(k) / static_cast<double>(samples);
  };
  for (int t = 0; t <= 200; ++t) {
    const double x = 0.025 * t;
    r.cdf.push_back({x, below(x)});
  }
  r.p_closer = below(1.0);
  return r;
}

CandidateSpread candidate_spread(const PointCloud& pc, const LineCloud& lc, std::size_t k) {
  if (pc.size() != lc.size()) throw Error(ErrorCode::MisalignedInputs, "line cloud and points differ in size");
  const auto truth = knn_points(pc, k);
  const std::size_t n = pc.size();
  std::vector<double> within(n, 0.0);
  std::vector<double> dmax(n, 0.0);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel
  {
    std::vector<double> betas;
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t s = 0; s < count; ++s) {
      const auto i = static_cast<std::size_t>(s);
      dmax[i] = truth[i].keys.back();
      collect_candidates(lc, i, truth[i].indices, betas);
      std::size_t close = 0;
      for (double b : betas) {
        if (point_point_distance(pc.points[i], lc.lines[i].at(b)) <= dmax[i]) ++close;
      }
      within[i] = betas.empty() ? 0.0 : static_cast<double>(close) / static_cast<double>(betas.size());
    }
  }
  CandidateSpread out;
  out.mean_within_dmax = std::accumulate(within.begin(), within.end(), 0.0) / static_cast<double>(n);
  std::sort(dmax.begin(), dmax.end());
  out.median_dmax = quantile_sorted(dmax, 0.5);
  return out;
}

std::vector<SweepRow> sparsity_sweep(const PointCloud& pc, const std::vector<double>& fractions,
                                     const SweepOptions& options) {
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw Error(ErrorCode::InvalidArgument, "sweep fractions must lie in (0, 1]");
  }
  const LineCloud lifted = lift(pc, options.seed);
  std::vector<SweepRow> rows;
  for (double f : fractions) {
    const LineCloud lc = sparsify(lifted, f, options.seed + 1);
    const PointCloud truth = select_sources(pc, lc);
    SweepRow row;
    row.fraction = f;
    row.preset = preset_for_density(options.outdoor, f);
    row.lines = lc.size();
    RecoveryConfig cfg = preset(row.preset);
    cfg.iterations = options.iterations;
    cfg.ks_stop = options.ks_stop;
    cfg.seed = options.seed;
    const RecoveryOutput out =
        options.oracle ? recover_with_oracle(lc, truth, std::min(options.oracle_k, lc.size() - 1), 0.0, cfg)
                       : recover(lc, cfg);
    row.report = error_report(truth, out);
    row.max_line_residual = out.max_line_residual;
    rows.push_back(std::move(row));
  }
  return rows;
}

PointCloud remove_statistical_outliers(const PointCloud& pc, std::size_t k_nn, double alpha,
                                       std::vector<std::size_t>* kept) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  if (k_nn == 0) throw Error(ErrorCode::InvalidArgument, "k_nn must be positive");
  const auto lists = knn_points(pc, k_nn);
  const std::size_t n = pc.size();
  std::vector<double> mean_dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    mean_dist[i] = std::accumulate(lists[i].keys.begin(), lists[i].keys.end(), 0.0) / static_cast<double>(k_nn);
  }
  const double mu = std::accumulate(mean_dist.begin(), mean_dist.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double d : mean_dist) var += (d - mu) * (d - mu);
  const double sigma = std::sqrt(var / static_cast<double>(n));
  const double limit = mu + alpha * sigma;

  PointCloud out;
  if (kept != nullptr) kept->clear();
  for (std::size_t i = 0; i < n; ++i) {
    if (mean_dist[i] > limit) continue;
    out.points.push_back(pc.points[i]);
    if (pc.has_payloads()) out.payloads.push_back(pc.payloads[i]);
    if (kept != nullptr) kept->push_back(i);
  }
  return out;
}

void write_cdf_csv(const std::vector<CdfPoint>& cdf, const std::string& header, const std::string& path) {
  std::ofstream out = open_out(path);
  out << header << '\n';
  for (const CdfPoint& p : cdf) out << p.x << ',' << p.fraction << '\n';
  finish(out, path);
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "fraction,median,mean,p90,valid_fraction\n";
  for (const SweepRow& r : rows) {
    out << r.fraction << ',' << r.report.median << ',' << r.report.mean << ',' << r.report.p90 << ','
        << r.report.valid_fraction << '\n';
  }
  finish(out, path);
}

nlohmann::json to_json(const ErrorReport& r) {
  return {{"median", number(r.median)},         {"mean", number(r.mean)},
          {"p90", number(r.p90)},               {"valid_fraction", r.valid_fraction},
          {"valid_count", r.valid_count},       {"total", r.total}};
}

nlohmann::json to_json(const MonteCarloReport& r) {
  return {{"samples", r.samples}, {"p_closer", r.p_closer}, {"cdf_at_0_5", r.cdf_at(0.5)}};
}

nlohmann::json to_json(const RecoveryConfig& cfg) {
  return {{"k_coarse", cfg.k_coarse},
          {"k_refine", cfg.k_refine},
          {"iterations", cfg.iterations},
          {"ks_stop", cfg.ks_stop},
          {"min_candidates", cfg.min_candidates},
          {"max_depth", cfg.max_depth},
          {"seed", cfg.seed},
          {"fallback", to_string(cfg.fallback)},
          {"line_line_every_iteration", cfg.line_line_every_iteration}};
}

nlohmann::json to_json(const RecoveryOutput& out) {
  nlohmann::json its = nlohmann::json::array();
  for (const IterationStats& s : out.per_iteration_stats) {
    its.push_back({{"valid_count", s.valid_count},
                   {"mean_candidate_count", s.mean_candidate_count},
                   {"mean_ks", s.mean_ks},
                   {"rejected", s.rejected},
                   {"intersection_fallbacks", s.intersection_fallbacks}});
  }
  return {{"config", to_json(out.config)},
          {"lines", out.estimates.size()},
          {"valid_count", out.estimates.valid_count()},
          {"max_line_residual", out.max_line_residual},
          {"iterations", its}};
}

}  // namespace lineleak
