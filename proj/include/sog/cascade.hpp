#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sog/distribution.hpp"
#include "sog/graph.hpp"

namespace sog {

enum class TreeFlavor { pwit, discrete };
std::string to_string(TreeFlavor f);

// One node of a truncated Harris-Ulam tree. The node's address is the address of
// its parent followed by k.
struct TreeNode {
  std::int32_t parent = -1;  // -1 for the root
  std::int32_t k = 0;        // child index within the parent, 1-based
  std::int32_t depth = 0;
  double length = 0.0;       // l(parent, node): cumulative gaps of the parent's children
  double dist = 0.0;         // distance to the root
  std::int64_t lattice = 0;  // discrete flavor: n * dist as an exact integer
  double u = 0.0;            // weight of the edge (parent, node)
  double v = 0.0;
  std::uint64_t key = 0;     // stream key derived from the address
  std::vector<std::int32_t> children;
};

struct CascadeTree {
  TreeFlavor flavor = TreeFlavor::pwit;
  std::int64_t n = 0;  // discrete only
  double p_n = 0.0;    // discrete only
  double horizon = 0.0;
  std::uint64_t seed = 0;
  Distribution du = Distribution::constant(1.0);
  Distribution dv = Distribution::constant(0.0);
  std::vector<TreeNode> nodes;  // breadth-first; nodes[0] is the root

  [[nodiscard]] std::vector<std::int32_t> address(std::int32_t node) const;
};

nlohmann::json to_json(const CascadeTree& t);

// Children of every node within the horizon, gaps exponential(1); streams keyed by address.
CascadeTree build_pwit(const Distribution& du, const Distribution& dv, double horizon, std::uint64_t seed);

// Same construction with gaps g / n, P(g > k) = (1 - p_n)^k.
CascadeTree build_discrete_tree(std::int64_t n, double p_n, const Distribution& du, const Distribution& dv,
                                double horizon, std::uint64_t seed);

// Root distance of the first child of `node` that was cut by the horizon,
// recomputed from the node's gap stream.
double first_omitted_child_distance(const CascadeTree& t, std::int32_t node);

// Rooted weighted geometric graph on [0, inf). Vertices sorted by position, root
// at index 0; edge lengths are position differences.
struct RootedWgg {
  struct Edge {
    std::int32_t to;
    double u;
  };
  std::vector<double> position;
  std::vector<double> v;
  std::vector<std::vector<Edge>> out;  // targets ascending

  [[nodiscard]] std::size_t size() const { return position.size(); }
  [[nodiscard]] std::size_t edge_count() const;
};

nlohmann::json to_json(const RootedWgg& g);

// Projection by root distance. Each distance s is represented by its
// lexicographically least preimage x, which supplies v_s and the out-edges of s
// (one per child of x). Only vertices reachable from 0 through these edges are
// kept.
RootedWgg collapse(const CascadeTree& t);

// Unfolds a wgg into the tree of its root paths (tree of a tree-like wgg is itself).
CascadeTree unfold(const RootedWgg& g, double horizon);

// Max over root paths of sum (v_source + u_edge); 0 for the empty path.
double heaviest_root_path(const RootedWgg& g);
// Same quantity computed on the tree before collapsing.
double heaviest_root_path(const CascadeTree& t);

struct CcmSample {
  RootedWgg wgg;
  double w_tilde = 0.0;
};

CcmSample simulate_ccm0(const Distribution& du, const Distribution& dv, double horizon, std::uint64_t seed);

// G_n^0 read off a window: vertices reachable from 0 at positions i / scale.
RootedWgg wgg_from_window(const GraphWindow& w, double scale);

// Brute-force matching distance between two finite rooted wggs (root fixed), or
// +inf when no edge-preserving bijection exists. Guarded at 8 vertices.
double wgg_matching_distance(const RootedWgg& a, const RootedWgg& b);
RootedWgg restrict_ball(const RootedWgg& g, double r);

inline constexpr std::size_t kMaxBallVertices = 8;

// int_0^r_max (1 ^ d(G^(r), G'^(r))) e^{-r} dr. The integrand is piecewise
// constant between vertex positions, so each panel (no wider than
// quadrature_step) is integrated exactly; the omitted tail is at most e^{-r_max}.
double wgg_distance(const RootedWgg& a, const RootedWgg& b, double r_max, double quadrature_step);

struct ConvergenceRow {
  std::int64_t n = 0;
  std::string functional;  // "vertex_count" | "w_tilde"
  double ks_stat = 0.0;
  std::int64_t reps = 0;
  double critical_5pct = 0.0;
};

// For each n: reps samples of collapse(build_discrete_tree(n, 1/n, ...)) against
// reps samples of simulate_ccm0 (one reference sample shared by all n).
std::vector<ConvergenceRow> convergence_test(const std::vector<std::int64_t>& n_list, const Distribution& du,
                                             const Distribution& dv, double horizon, std::int64_t reps,
                                             std::uint64_t seed, unsigned threads = 0);

}  // namespace sog
