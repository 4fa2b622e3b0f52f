#include "lineleak/peakfind.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "lineleak/error.hpp"

namespace lineleak {

const char* to_string(PeakStatus status) {
  switch (status) {
    case PeakStatus::Found: return "found";
    case PeakStatus::Degenerate: return "degenerate";
    case PeakStatus::Rejected: return "rejected";
  }
  return "unknown";
}

namespace {

double degenerate_eps(const Window& w) { return 1e-9 * (w.width() + 1.0); }

// Half-open index range into a sorted candidate array.
struct Range {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t size() const { return last - first; }
};

Range in_window(std::span<const double> sorted, const Window& w) {
  const auto lo = std::lower_bound(sorted.begin(), sorted.end(), w.lo);
  const auto hi = std::upper_bound(lo, sorted.end(), w.hi);
  return {static_cast<std::size_t>(lo - sorted.begin()), static_cast<std::size_t>(hi - sorted.begin())};
}

// `s` sorted, all inside w, w non-degenerate, s.size() >= 1.
KuiperResult kuiper_sorted(std::span<const double> s, const Window& w) {
  const std::size_t n = s.size();
  const double dn = static_cast<double>(n);
  const double inv = 1.0 / w.width();
  KuiperResult r;
  r.count = n;
  r.d_plus = -std::numeric_limits<double>::infinity();
  r.d_minus = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double fu = (s[i] - w.lo) * inv;
    const double plus = static_cast<double>(i + 1) / dn - fu;
    const double minus = fu - static_cast<double>(i) / dn;
    if (plus > r.d_plus) {
      r.d_plus = plus;
      r.x_plus = s[i];
    }
    if (minus > r.d_minus) {
      r.d_minus = minus;
      r.x_minus = s[i];
    }
  }
  r.d_plus = std::clamp(r.d_plus, 0.0, 1.0);
  r.d_minus = std::clamp(r.d_minus, 0.0, 1.0);
  r.ks = r.d_minus + r.d_plus;
  return r;
}

// Interval [s[first], s[last - 1]] over which F_i - F_U rises the most,
// measured from a left limit to a right limit. When x_minus <= x_plus this
// is exactly [x_minus, x_plus] with rise D- + D+; otherwise it is the
// larger one-sided rise at the window edge.
Range max_rise(std::span<const double> s, const Window& w) {
  const std::size_t n = s.size();
  const double dn = static_cast<double>(n);
  const double inv = 1.0 / w.width();
  double min_left = std::numeric_limits<double>::infinity();
  std::size_t arg_min = 0;
  double best = -std::numeric_limits<double>::infinity();
  Range out{0, n};
  for (std::size_t b = 0; b < n; ++b) {
    const double fu = (s[b] - w.lo) * inv;
    const double left = static_cast<double>(b) / dn - fu;
    if (left < min_left) {
      min_left = left;
      arg_min = b;
    }
    const double rise = static_cast<double>(b + 1) / dn - fu - min_left;
    if (rise > best) {
      best = rise;
      out = {arg_min, b + 1};
    }
  }
  return out;
}

struct SplitWindow {
  Window window;
  Range range;
};

// `s` sorted and inside w (non-degenerate).
std::vector<SplitWindow> split_sorted(std::span<const double> s, const Window& w, const PeakConfig& cfg) {
  const std::size_t n = s.size();
  if (n < 2) return {{w, {0, n}}};
  const double dn = static_cast<double>(n);
  const double inv = 1.0 / w.width();
  const double threshold = cfg.split_significance / std::sqrt(dn);

  struct Segment {
    double end_x;
    std::size_t end;  // one past the last candidate
    double rise;
  };
  std::vector<Segment> segments;
  double seg_min = 0.0;  // F_i - F_U is zero where a segment starts
  double seg_rise = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double fu = (s[i] - w.lo) * inv;
    seg_min = std::min(seg_min, static_cast<double>(i) / dn - fu);
    const double right = static_cast<double>(i + 1) / dn - fu;
    seg_rise = std::max(seg_rise, right - seg_min);
    if (i + 1 == n) break;
    const double next_left = static_cast<double>(i + 1) / dn - (s[i + 1] - w.lo) * inv;
    if (right > 0.0 && next_left <= 0.0) {
      // F_U climbs to F_i = (i+1)/n inside the gap (s[i], s[i+1]]
      const double x = std::clamp(w.lo + static_cast<double>(i + 1) / dn * w.width(), s[i], s[i + 1]);
      segments.push_back({x, i + 1, seg_rise});
      seg_min = 0.0;
      seg_rise = 0.0;
    }
  }
  segments.push_back({w.hi, n, seg_rise});

  // Crossings strictly between the first and last significant segment are
  // kept; insignificant segments outside that span join it. The rule reads
  // the same from either end, so mirrored candidates split alike.
  std::size_t first_sig = segments.size(), last_sig = 0;
  for (std::size_t j = 0; j < segments.size(); ++j) {
    if (segments[j].rise < threshold) continue;
    first_sig = std::min(first_sig, j);
    last_sig = j;
  }

  std::vector<SplitWindow> out;
  double start_x = w.lo;
  std::size_t start = 0;
  for (std::size_t j = first_sig; j < last_sig; ++j) {
    out.push_back({{start_x, segments[j].end_x}, {start, segments[j].end}});
    start_x = segments[j].end_x;
    start = segments[j].end;
  }
  out.push_back({{start_x, w.hi}, {start, n}});
  return out;
}

double median_sorted(std::span<const double> s) {
  const std::size_t n = s.size();
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  if (n % 2 == 1) return s[n / 2];
  return 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

}  // namespace

void collect_candidates(const LineCloud& lc, std::size_t i, std::span<const std::uint32_t> neighbors,
                        std::vector<double>& betas) {
  betas.clear();
  const Line3& li = lc.lines[i];
  for (std::uint32_t j : neighbors) {
    if (j == i) continue;
    if (const auto cp = closest_points(li, lc.lines[j])) betas.push_back(cp->beta_a);
  }
}

CandidateSet candidates(const LineCloud& lc, std::size_t i, const NeighborList& neighbors) {
  if (neighbors.center_index != i) {
    throw Error(ErrorCode::InvalidArgument, "neighbor list belongs to a different line");
  }
  CandidateSet cs;
  cs.line_index = i;
  collect_candidates(lc, i, neighbors.indices, cs.betas);
  if (cs.betas.empty()) {
    throw Error(ErrorCode::NoCandidates, "line " + std::to_string(i) + " has no usable neighbor");
  }
  return cs;
}

double empirical_cdf(std::span<const double> betas, double x) {
  if (betas.empty()) throw Error(ErrorCode::TooFewCandidates, "empirical CDF of an empty set");
  const auto below = std::count_if(betas.begin(), betas.end(), [x](double b) { return b < x; });
  return static_cast<double>(below) / static_cast<double>(betas.size());
}

KuiperResult kuiper(std::span<const double> betas, Window window) {
  if (!(window.width() > degenerate_eps(window))) {
    throw Error(ErrorCode::DegenerateWindow, "window collapses to a point");
  }
  std::vector<double> s(betas.begin(), betas.end());
  std::sort(s.begin(), s.end());
  const Range r = in_window(s, window);
  if (r.size() < 2) throw Error(ErrorCode::TooFewCandidates, "Kuiper statistic needs two candidates in the window");
  return kuiper_sorted(std::span<const double>(s).subspan(r.first, r.size()), window);
}

std::vector<Window> split_peaks(std::span<const double> betas, Window window, const PeakConfig& cfg) {
  if (!(window.width() > degenerate_eps(window))) {
    throw Error(ErrorCode::DegenerateWindow, "window collapses to a point");
  }
  std::vector<double> s(betas.begin(), betas.end());
  std::sort(s.begin(), s.end());
  const Range r = in_window(s, window);
  std::vector<Window> out;
  for (const SplitWindow& sw : split_sorted(std::span<const double>(s).subspan(r.first, r.size()), window, cfg)) {
    out.push_back(sw.window);
  }
  return out;
}

PeakResult find_peak(const CandidateSet& cs, const PeakConfig& cfg, PeakTrace* trace) {
  PeakResult result;
  const std::size_t min_count = std::max<std::size_t>(cfg.min_candidates, 2);
  if (cs.betas.size() < min_count) {
    result.status = PeakStatus::Rejected;
    result.beta_hat = std::numeric_limits<double>::quiet_NaN();
    return result;
  }

  std::vector<double> sorted(cs.betas);
  std::sort(sorted.begin(), sorted.end());
  const std::span<const double> all(sorted);
  const Window initial{sorted.front(), sorted.back()};
  const double eps = degenerate_eps(initial);
  if (trace != nullptr) trace->windows.assign(1, initial);

  auto degenerate = [&](std::span<const double> s, const Window& w, int depth) {
    result.status = PeakStatus::Degenerate;
    result.beta_hat = median_sorted(s);
    result.interval = w;
    result.ks_final = 0.0;
    result.n_recursions = depth;
    return result;
  };
  if (initial.width() <= eps) return degenerate(all, initial, 0);

  // Top level: pick the peak window with the largest statistic.
  std::span<const double> current = all;
  Window window = initial;
  KuiperResult stat;
  bool have = false;
  for (const SplitWindow& sw : split_sorted(all, initial, cfg)) {
    if (sw.range.size() < min_count) continue;
    const auto sub = all.subspan(sw.range.first, sw.range.size());
    const Window tight{sub.front(), sub.back()};
    if (tight.width() <= eps) {
      if (trace != nullptr) trace->windows.push_back(tight);
      return degenerate(sub, tight, 0);
    }
    const KuiperResult k = kuiper_sorted(sub, tight);
    if (!have || k.ks > stat.ks) {
      have = true;
      stat = k;
      current = sub;
      window = tight;
    }
  }
  if (!have) stat = kuiper_sorted(all, initial);
  if (trace != nullptr && window != initial) trace->windows.push_back(window);

  int depth = 0;
  while (stat.ks >= cfg.ks_stop && depth < cfg.max_depth) {
    const Range r = max_rise(current, window);
    if (r.size() < min_count) break;
    const auto sub = current.subspan(r.first, r.size());
    const Window next{sub.front(), sub.back()};
    if (next.width() <= eps) {
      if (trace != nullptr) trace->windows.push_back(next);
      return degenerate(sub, next, depth + 1);
    }
    if (next == window) break;
    current = sub;
    window = next;
    stat = kuiper_sorted(current, window);
    ++depth;
    if (trace != nullptr) trace->windows.push_back(window);
  }

  result.status = PeakStatus::Found;
  result.beta_hat = median_sorted(current);
  result.interval = window;
  result.ks_final = stat.ks;
  result.n_recursions = depth;
  return result;
}

void write_peak_trace_csv(const CandidateSet& cs, const PeakTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out.precision(17);
  out << "beta,window_level\n";
  for (double b : cs.betas) {
    int level = -1;
    for (std::size_t l = 0; l < trace.windows.size(); ++l) {
      if (trace.windows[l].contains(b)) level = static_cast<int>(l);
    }
    out << b << ',' << level << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

}  // namespace lineleak
