#pragma once

// Reference implementations used only by the tests. They share no code with the
// library beyond the GraphWindow accessors.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "sog/graph.hpp"
#include "sog/heaviest_path.hpp"

namespace oracle {

inline constexpr double kNone = -std::numeric_limits<double>::infinity();

using Matrix = std::vector<std::vector<double>>;

// adj[i][j] = u_ij, or NaN when (i, j) is not an edge.
inline Matrix adjacency(const sog::GraphWindow& w) {
  const auto n = static_cast<std::size_t>(w.n());
  Matrix adj(n + 1, std::vector<double>(n + 1, std::nan("")));
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = i + 1; j <= n; ++j) {
      if (w.has_edge(static_cast<std::int64_t>(i), static_cast<std::int64_t>(j))) {
        adj[i][j] = w.edge_weight(static_cast<std::int64_t>(i), static_cast<std::int64_t>(j));
      }
    }
  }
  return adj;
}

// Warshall closure: reach[i][j] iff a directed path i -> j exists (reach[i][i] = true).
inline std::vector<std::vector<bool>> closure(const sog::GraphWindow& w) {
  const auto n = static_cast<std::size_t>(w.n());
  std::vector<std::vector<bool>> reach(n + 1, std::vector<bool>(n + 1, false));
  for (std::size_t i = 0; i <= n; ++i) {
    reach[i][i] = true;
    for (std::size_t j = i + 1; j <= n; ++j) {
      reach[i][j] = w.has_edge(static_cast<std::int64_t>(i), static_cast<std::int64_t>(j));
    }
  }
  for (std::size_t k = 0; k <= n; ++k) {
    for (std::size_t i = 0; i <= n; ++i) {
      if (!reach[i][k]) continue;
      for (std::size_t j = 0; j <= n; ++j) {
        if (reach[k][j]) reach[i][j] = true;
      }
    }
  }
  return reach;
}

// Every path i -> j enumerated by DFS; the heaviest weight or nullopt.
inline std::optional<double> heaviest_by_enumeration(const sog::GraphWindow& w, std::int64_t i, std::int64_t j,
                                                     sog::Variant variant) {
  if (i == j) return 0.0;
  std::optional<double> best;
  auto dfs = [&](auto&& self, std::int64_t x, double acc) -> void {
    if (x == j) {
      if (!best || acc > *best) best = acc;
      return;
    }
    const double vx = variant == sog::Variant::full ? w.vertex_weight(x) : 0.0;
    for (std::int64_t y = x + 1; y <= j; ++y) {
      if (w.has_edge(x, y)) self(self, y, acc + (vx + w.edge_weight(x, y)));
    }
  };
  dfs(dfs, i, 0.0);
  return best;
}

// All-pairs longest paths (edge weights only) by relaxation in topological order.
inline Matrix edge_only_optimum(const sog::GraphWindow& w) {
  const auto n = static_cast<std::size_t>(w.n());
  const Matrix adj = adjacency(w);
  Matrix best(n + 1, std::vector<double>(n + 1, kNone));
  for (std::size_t i = 0; i <= n; ++i) {
    best[i][i] = 0.0;
    for (std::size_t j = i + 1; j <= n; ++j) {
      for (std::size_t k = i; k < j; ++k) {
        if (best[i][k] == kNone || std::isnan(adj[k][j])) continue;
        best[i][j] = std::max(best[i][j], best[i][k] + adj[k][j]);
      }
    }
  }
  return best;
}

// Skeleton points of the window by definition: i reaches every later vertex and
// is reached from every earlier one.
inline std::vector<std::int64_t> skeleton_by_closure(const sog::GraphWindow& w, std::int64_t lo, std::int64_t hi) {
  const auto reach = closure(w);
  std::vector<std::int64_t> out;
  for (std::int64_t i = lo; i <= hi; ++i) {
    bool ok = true;
    for (std::int64_t x = 0; x <= w.n() && ok; ++x) {
      ok = x < i ? reach[static_cast<std::size_t>(x)][static_cast<std::size_t>(i)]
                 : reach[static_cast<std::size_t>(i)][static_cast<std::size_t>(x)];
    }
    if (ok) out.push_back(i);
  }
  return out;
}

// c-renewal points of the window by definition of the three events.
inline std::vector<std::int64_t> renewal_by_definition(const sog::GraphWindow& w, double c, std::int64_t lo,
                                                       std::int64_t hi) {
  const auto n = w.n();
  const Matrix best = edge_only_optimum(w);
  const Matrix adj = adjacency(w);
  std::vector<std::int64_t> out;
  for (std::int64_t i = lo; i <= hi; ++i) {
    const auto si = static_cast<std::size_t>(i);
    bool ok = true;
    for (std::int64_t m = 1; i + m <= n && ok; ++m) ok = best[si][si + static_cast<std::size_t>(m)] > c * m;
    for (std::int64_t m = 1; i - m >= 0 && ok; ++m) ok = best[si - static_cast<std::size_t>(m)][si] > c * m;
    for (std::int64_t a = 0; a < i && ok; ++a) {
      for (std::int64_t b = i + 1; b <= n && ok; ++b) {
        const double u = adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        if (!std::isnan(u)) ok = u < c * static_cast<double>(b - a);
      }
    }
    if (ok) out.push_back(i);
  }
  return out;
}

// Longest path in edge count between i and j (-1 when unreachable), O(n^2).
inline std::int64_t longest_hops(const sog::GraphWindow& w, std::int64_t i, std::int64_t j) {
  std::vector<std::int64_t> h(static_cast<std::size_t>(j - i) + 1, -1);
  h[0] = 0;
  for (std::int64_t y = i + 1; y <= j; ++y) {
    for (std::int64_t x = i; x < y; ++x) {
      const auto hx = h[static_cast<std::size_t>(x - i)];
      if (hx >= 0 && w.has_edge(x, y)) h[static_cast<std::size_t>(y - i)] = std::max(h[static_cast<std::size_t>(y - i)], hx + 1);
    }
  }
  return h.back();
}

}  // namespace oracle
