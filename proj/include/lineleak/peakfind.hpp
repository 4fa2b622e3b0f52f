#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lineleak/linecloud.hpp"
#include "lineleak/neighborhood.hpp"

namespace lineleak {

/// Closed parameter interval [lo, hi] along a line.
struct Window {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double b) const { return b >= lo && b <= hi; }
  bool operator==(const Window&) const = default;
};

/// Line parameters of the point-position candidates of one line.
struct CandidateSet {
  std::size_t line_index = 0;
  std::vector<double> betas;
};

struct KuiperResult {
  double d_minus = 0.0;  // max (F_U - F_i), left limits of the step CDF
  double d_plus = 0.0;   // max (F_i - F_U), right limits
  double x_minus = 0.0;
  double x_plus = 0.0;
  double ks = 0.0;       // d_minus + d_plus
  std::size_t count = 0; // candidates inside the window
};

enum class PeakStatus { Found, Degenerate, Rejected };

const char* to_string(PeakStatus status);

struct PeakResult {
  double beta_hat = 0.0;  // NaN when rejected
  double ks_final = 0.0;
  Window interval;
  int n_recursions = 0;
  PeakStatus status = PeakStatus::Rejected;
};

struct PeakConfig {
  double ks_stop = 0.4;
  std::size_t min_candidates = 5;
  int max_depth = 20;
  /// A raw segment between two upward crossings only separates peaks when
  /// its largest rise of F_i - F_U reaches split_significance / sqrt(n).
  /// 1.747 is the asymptotic 5% critical value of Kuiper's statistic.
  double split_significance = 1.747;
};

/// Windows visited by find_peak, outermost first (for plotting).
struct PeakTrace {
  std::vector<Window> windows;
};

/// Closest-point parameters on line i towards each neighbor line; parallel
/// neighbors are skipped. Throws NoCandidates when nothing is left.
CandidateSet candidates(const LineCloud& lc, std::size_t i, const NeighborList& neighbors);

/// Non-throwing form used by the recovery loop; clears and fills `betas`.
void collect_candidates(const LineCloud& lc, std::size_t i, std::span<const std::uint32_t> neighbors,
                        std::vector<double>& betas);

/// Fraction of betas strictly below x.
double empirical_cdf(std::span<const double> betas, double x);

/// Kuiper statistic of the candidates inside `window` against the uniform
/// CDF on that window. Throws DegenerateWindow when the window is narrower
/// than 1e-9 * (width + 1), TooFewCandidates below two candidates.
KuiperResult kuiper(std::span<const double> betas, Window window);

/// Sub-windows separated at upward crossings of the uniform CDF through the
/// empirical one, keeping only crossings that close a significant rise.
std::vector<Window> split_peaks(std::span<const double> betas, Window window, const PeakConfig& cfg = {});

/// Recursive Kuiper peak search; beta_hat is the median of the candidates
/// left in the final window.
PeakResult find_peak(const CandidateSet& cs, const PeakConfig& cfg = {}, PeakTrace* trace = nullptr);

/// CSV rows `beta,window_level`: the deepest trace level containing each
/// candidate.
void write_peak_trace_csv(const CandidateSet& cs, const PeakTrace& trace, const std::string& path);

}  // namespace lineleak
