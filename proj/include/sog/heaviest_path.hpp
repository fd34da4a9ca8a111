#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "sog/graph.hpp"

namespace sog {

// full: each traversed edge (x, y) contributes v_x + u_xy.
// edge_only: v is replaced by 0 (the auxiliary graph SOG(Z, p, u, 0)).
enum class Variant { full, edge_only };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

struct PathValue {
  bool reachable = false;
  double w = 0.0;  // meaningful only when reachable
  double W = 0.0;  // max(w, 0), or 0 when unreachable
  std::vector<std::int64_t> path;
  Variant variant = Variant::full;
};

nlohmann::json to_json(const PathValue& pv);

// Throws InvalidPathError naming the first pair that is not an edge.
double path_weight(const GraphWindow& g, const std::vector<std::int64_t>& path, Variant variant);

// Exact optimum over all paths i -> j; the returned path is the lexicographically
// smallest among optimal vertex sequences.
PathValue heaviest_between(const GraphWindow& g, std::int64_t i, std::int64_t j, Variant variant);

// max over i <= x < y <= j of W_{x,y}; always >= 0.
double window_max(const GraphWindow& g, std::int64_t i, std::int64_t j, Variant variant);

// Exhaustive oracle, j - i <= 20.
PathValue brute_force_heaviest(const GraphWindow& g, std::int64_t i, std::int64_t j, Variant variant);
inline constexpr std::int64_t kBruteForceSpan = 20;

// ---------------------------------------------------------------------------
// Streaming sweeps over any graph exposing n(), vertex_weight(i) and
// for_each_out_edge(i, jmax, f(j, u)).

inline constexpr double kUnreached = -std::numeric_limits<double>::infinity();

template <class G>
inline double edge_term(const G& g, std::int64_t x, double u, Variant variant) {
  return variant == Variant::full ? g.vertex_weight(x) + u : u;
}

// best[k] = w_{i, i+k} for k in [0, jmax - i] (best[0] = 0, kUnreached when no path).
template <class G>
void forward_sweep(const G& g, std::int64_t i, std::int64_t jmax, Variant variant, std::vector<double>& best) {
  const auto span = static_cast<std::size_t>(jmax - i);
  best.assign(span + 1, kUnreached);
  best[0] = 0.0;
  for (std::int64_t x = i; x < jmax; ++x) {
    const double bx = best[static_cast<std::size_t>(x - i)];
    if (bx == kUnreached) continue;
    const double vx = variant == Variant::full ? g.vertex_weight(x) : 0.0;
    g.for_each_out_edge(x, jmax, [&](std::int64_t y, double u) {
      const double cand = bx + (variant == Variant::full ? vx + u : u);
      double& by = best[static_cast<std::size_t>(y - i)];
      if (cand > by) by = cand;
    });
  }
}

// Longest path from i in edge count; hops[k] = -1 when i + k is unreachable.
template <class G>
void hop_sweep(const G& g, std::int64_t i, std::int64_t jmax, std::vector<std::int32_t>& hops) {
  const auto span = static_cast<std::size_t>(jmax - i);
  hops.assign(span + 1, -1);
  hops[0] = 0;
  for (std::int64_t x = i; x < jmax; ++x) {
    const std::int32_t hx = hops[static_cast<std::size_t>(x - i)];
    if (hx < 0) continue;
    g.for_each_out_edge(x, jmax, [&](std::int64_t y, double) {
      auto& hy = hops[static_cast<std::size_t>(y - i)];
      if (hx + 1 > hy) hy = hx + 1;
    });
  }
}

// Same result as hop_sweep using only single-pair lookups g.has_edge(x, y):
// vertices are bucketed by their hop count, and y scans the buckets from the
// highest count down until it finds an in-neighbour. For moderate p this
// inspects O(1/p) pairs per vertex instead of all of them.
template <class G>
void hop_sweep_lookup(const G& g, std::int64_t i, std::int64_t jmax, std::vector<std::int32_t>& hops) {
  const auto span = static_cast<std::size_t>(jmax - i);
  hops.assign(span + 1, -1);
  hops[0] = 0;
  std::vector<std::vector<std::int64_t>> buckets{{i}};
  for (std::int64_t y = i + 1; y <= jmax; ++y) {
    std::int32_t h = -1;
    for (auto level = static_cast<std::int64_t>(buckets.size()) - 1; level >= 0 && h < 0; --level) {
      const auto& b = buckets[static_cast<std::size_t>(level)];
      for (auto it = b.rbegin(); it != b.rend(); ++it) {
        if (g.has_edge(*it, y)) {
          h = static_cast<std::int32_t>(level) + 1;
          break;
        }
      }
    }
    hops[static_cast<std::size_t>(y - i)] = h;
    if (h < 0) continue;
    if (static_cast<std::size_t>(h) == buckets.size()) buckets.emplace_back();
    buckets[static_cast<std::size_t>(h)].push_back(y);
  }
}

template <class G>
double heaviest_value(const G& g, std::int64_t i, std::int64_t j, Variant variant, bool* reachable = nullptr) {
  std::vector<double> best;
  forward_sweep(g, i, j, variant, best);
  const double w = best.back();
  if (reachable) *reachable = w != kUnreached;
  return w;
}

template <class G>
double window_max_sweep(const G& g, std::int64_t i, std::int64_t j, Variant variant) {
  std::vector<double> m(static_cast<std::size_t>(j - i) + 1, kUnreached);
  double result = 0.0;
  for (std::int64_t x = i; x < j; ++x) {
    const double start = std::max(m[static_cast<std::size_t>(x - i)], 0.0);
    const double vx = variant == Variant::full ? g.vertex_weight(x) : 0.0;
    g.for_each_out_edge(x, j, [&](std::int64_t y, double u) {
      const double cand = start + (variant == Variant::full ? vx + u : u);
      double& my = m[static_cast<std::size_t>(y - i)];
      if (cand > my) my = cand;
    });
  }
  for (double v : m) result = std::max(result, v);
  return result;
}

}  // namespace sog
