#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sog/graph.hpp"
#include "sog/heaviest_path.hpp"

namespace sog {

// gamma(p) = prod_{k>=1} (1 - (1-p)^k)^2, truncated so that the omitted tail is below tol.
double skeleton_density(double p, double tol = 1e-12);
// Number of factors skeleton_density(p, tol) multiplies.
std::int64_t skeleton_truncation_depth(double p, double tol);

// Upper bound on P(detected in a window with `margin` free vertices on each side,
// yet not a skeleton point of the infinite graph): 2 (1-p)^(margin+1) / p.
double skeleton_censoring_bias_bound(double p, std::int64_t margin);

enum class RegenerationKind { skeleton, renewal };
std::string to_string(RegenerationKind k);

struct RegenerationReport {
  std::string window_id;
  RegenerationKind kind = RegenerationKind::skeleton;
  std::vector<std::int64_t> points;
  std::int64_t margin = 0;
  // Every detection is a window-truncated approximation; the flag is set on all points.
  std::vector<bool> censored;
  double c = 0.0;  // renewal only
};

nlohmann::json to_json(const RegenerationReport& r);

RegenerationReport detect_skeleton(const GraphWindow& w, std::int64_t margin);
RegenerationReport detect_renewal(const GraphWindow& w, double c, std::int64_t margin);

struct SplitViolation {
  std::int64_t x;
  std::int64_t i;
  std::int64_t y;
  double whole;  // w_{x,y}
  double split;  // w_{x,i} + w_{i,y}, NaN when a leg is unreachable
};

struct SplittingCheck {
  bool ok = true;
  std::vector<SplitViolation> violations;
  std::size_t triples_checked = 0;
};

// Skeleton reports are checked in edge counts, exactly; renewal reports with
// the full weights up to a relative rounding tolerance of 1e-9.
SplittingCheck verify_splitting(const GraphWindow& w, const RegenerationReport& report);

struct DensityEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  double bias_bound = 0.0;  // one-sided, upward
  std::int64_t reps = 0;
};

// Fraction of vertices in [margin, n - margin] detected as skeleton points,
// averaged over independent windows.
DensityEstimate estimate_skeleton_density(std::int64_t n, double p, std::int64_t margin, std::int64_t reps,
                                          std::uint64_t seed, unsigned threads = 0);

// Frequency of c-renewal detection at the window centre n/2.
DensityEstimate estimate_lambda(std::int64_t n, const ModelParams& params, double c, std::int64_t reps,
                                unsigned threads = 0);

// 0.5 x pilot estimate of the growth of the edge-only optimum.
double suggest_c(std::int64_t n, const ModelParams& params, unsigned threads = 0);

void check_margin(std::int64_t n, std::int64_t margin);

// ---------------------------------------------------------------------------
// Detection primitives over any graph with n(), has_edge(i, j) and for_each_out_edge.

// Skeleton points in [lo, hi] from nearest in/out neighbours, one pass over the edges.
template <class G>
std::vector<std::int64_t> skeleton_points(const G& g, std::int64_t lo, std::int64_t hi) {
  const std::int64_t n = g.n();
  std::vector<std::int64_t> nearest_in(static_cast<std::size_t>(n) + 1, -1);
  std::vector<std::int64_t> nearest_out(static_cast<std::size_t>(n) + 1, n + 1);
  for (std::int64_t x = 0; x < n; ++x) {
    bool first = true;
    g.for_each_out_edge(x, n, [&](std::int64_t y, double) {
      if (first) nearest_out[static_cast<std::size_t>(x)] = y;
      first = false;
      nearest_in[static_cast<std::size_t>(y)] = x;
    });
  }
  // right[i]: every j in (i, n] has an in-neighbour in [i, j)
  std::vector<char> right(static_cast<std::size_t>(n) + 1, 0);
  std::int64_t suffix_min = n + 1;
  for (std::int64_t i = n; i >= 0; --i) {
    right[static_cast<std::size_t>(i)] = suffix_min >= i;
    if (i >= 1) suffix_min = std::min(suffix_min, nearest_in[static_cast<std::size_t>(i)]);
  }
  std::vector<std::int64_t> out;
  std::int64_t prefix_max = -1;
  for (std::int64_t i = 0; i <= n; ++i) {
    if (i >= lo && i <= hi && prefix_max <= i && right[static_cast<std::size_t>(i)]) out.push_back(i);
    if (i < n) prefix_max = std::max(prefix_max, nearest_out[static_cast<std::size_t>(i)]);
  }
  return out;
}

// Same points as skeleton_points, found by single-pair lookups: the nearest
// in-neighbour of each j > lo (searched down to lo) and nearest out-neighbour of
// each x < hi (searched up to hi). Expected O(n / p) lookups.
template <class G>
std::vector<std::int64_t> skeleton_points_lookup(const G& g, std::int64_t lo, std::int64_t hi) {
  const std::int64_t n = g.n();
  std::vector<std::int64_t> nearest_in(static_cast<std::size_t>(n) + 1, -1);
  for (std::int64_t j = lo + 1; j <= n; ++j) {
    for (std::int64_t x = j - 1; x >= lo; --x) {
      if (g.has_edge(x, j)) {
        nearest_in[static_cast<std::size_t>(j)] = x;
        break;
      }
    }
  }
  std::vector<std::int64_t> nearest_out(static_cast<std::size_t>(n) + 1, n + 1);
  for (std::int64_t x = 0; x < hi; ++x) {
    for (std::int64_t y = x + 1; y <= hi; ++y) {
      if (g.has_edge(x, y)) {
        nearest_out[static_cast<std::size_t>(x)] = y;
        break;
      }
    }
  }
  std::vector<char> right(static_cast<std::size_t>(n) + 1, 0);
  std::int64_t suffix_min = n + 1;
  for (std::int64_t i = n; i >= lo; --i) {
    right[static_cast<std::size_t>(i)] = suffix_min >= i;
    suffix_min = std::min(suffix_min, nearest_in[static_cast<std::size_t>(i)]);
  }
  std::vector<std::int64_t> out;
  std::int64_t prefix_max = -1;
  for (std::int64_t i = 0; i <= hi; ++i) {
    if (i >= lo && prefix_max <= i && right[static_cast<std::size_t>(i)]) out.push_back(i);
    prefix_max = std::max(prefix_max, nearest_out[static_cast<std::size_t>(i)]);
  }
  return out;
}

// A_i^+ in the window: the edge-only optimum from i exceeds c m at every i + m <= n.
template <class G>
bool renewal_plus(const G& g, std::int64_t i, double c) {
  const std::int64_t n = g.n();
  std::vector<double> best(static_cast<std::size_t>(n - i) + 1, kUnreached);
  best[0] = 0.0;
  for (std::int64_t x = i; x <= n; ++x) {
    const double bx = best[static_cast<std::size_t>(x - i)];
    if (x > i && !(bx > c * static_cast<double>(x - i))) return false;
    g.for_each_out_edge(x, n, [&](std::int64_t y, double u) {
      double& by = best[static_cast<std::size_t>(y - i)];
      if (bx + u > by) by = bx + u;
    });
  }
  return true;
}

// A_i^- in the window: the edge-only optimum into i exceeds c m from every i - m >= 0.
template <class G>
bool renewal_minus(const G& g, std::int64_t i, double c) {
  std::vector<double> best(static_cast<std::size_t>(i) + 1, kUnreached);
  best[static_cast<std::size_t>(i)] = 0.0;
  for (std::int64_t x = i - 1; x >= 0; --x) {
    double bx = kUnreached;
    g.for_each_out_edge(x, i, [&](std::int64_t y, double u) {
      const double by = best[static_cast<std::size_t>(y)];
      if (by != kUnreached && u + by > bx) bx = u + by;
    });
    if (!(bx > c * static_cast<double>(i - x))) return false;
    best[static_cast<std::size_t>(x)] = bx;
  }
  return true;
}

// A_i^{-+} in the window: every edge (a, b) with a < i < b has u_ab < c (b - a).
template <class G>
bool renewal_straddle(const G& g, std::int64_t i, double c) {
  bool ok = true;
  for (std::int64_t a = 0; a < i && ok; ++a) {
    g.for_each_out_edge(a, g.n(), [&](std::int64_t b, double u) {
      if (b > i && !(u < c * static_cast<double>(b - a))) ok = false;
    });
  }
  return ok;
}

template <class G>
bool is_renewal_point(const G& g, std::int64_t i, double c) {
  return renewal_straddle(g, i, c) && renewal_minus(g, i, c) && renewal_plus(g, i, c);
}

// c-renewal points in [lo, hi]: skeleton prefilter (implied by A^+ and A^-),
// straddle test for all vertices at once, then the two sweeps.
template <class G>
std::vector<std::int64_t> renewal_points(const G& g, double c, std::int64_t lo, std::int64_t hi) {
  const std::int64_t n = g.n();
  std::vector<std::int64_t> blocked(static_cast<std::size_t>(n) + 2, 0);
  for (std::int64_t a = 0; a < n; ++a) {
    g.for_each_out_edge(a, n, [&](std::int64_t b, double u) {
      if (b - a >= 2 && !(u < c * static_cast<double>(b - a))) {
        ++blocked[static_cast<std::size_t>(a) + 1];
        --blocked[static_cast<std::size_t>(b)];
      }
    });
  }
  for (std::size_t k = 1; k < blocked.size(); ++k) blocked[k] += blocked[k - 1];
  std::vector<std::int64_t> out;
  for (std::int64_t i : skeleton_points(g, lo, hi)) {
    if (blocked[static_cast<std::size_t>(i)] != 0) continue;
    if (renewal_minus(g, i, c) && renewal_plus(g, i, c)) out.push_back(i);
  }
  return out;
}

}  // namespace sog
