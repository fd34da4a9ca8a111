#include "sog/cascade.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>

#include "sog/errors.hpp"
#include "sog/parallel.hpp"
#include "sog/stats.hpp"

namespace sog {

namespace {

constexpr std::size_t kMaxTreeNodes = 5'000'000;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct GapSource {
  TreeFlavor flavor;
  double log_miss;  // log(1 - p_n), discrete only

  // pwit: exponential(1) gap; discrete: geometric g >= 1 on the lattice.
  double next(RandomStream& s) const {
    const double u = s.uniform();
    if (flavor == TreeFlavor::pwit) return -std::log1p(-u);
    if (log_miss == -kInf) return 1.0;
    return std::floor(std::log1p(-u) / log_miss) + 1.0;
  }
};

double sample_weight(const Distribution& d, StreamKey key, Role role) {
  RandomStream s(key.child(role));
  return d.sample(s);
}

CascadeTree build_tree(TreeFlavor flavor, std::int64_t n, double p_n, const Distribution& du, const Distribution& dv,
                       double horizon, std::uint64_t seed) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ParameterError("horizon must be a finite positive number");
  CascadeTree t;
  t.flavor = flavor;
  t.n = n;
  t.p_n = p_n;
  t.horizon = horizon;
  t.seed = seed;
  t.du = du;
  t.dv = dv;
  const GapSource gaps{flavor, flavor == TreeFlavor::discrete ? std::log1p(-p_n) : 0.0};
  const std::int64_t lattice_bound =
      flavor == TreeFlavor::discrete ? static_cast<std::int64_t>(std::floor(horizon * static_cast<double>(n) + 1e-9)) : 0;

  const StreamKey root_key = StreamKey(seed).child(Role::tree);
  TreeNode root;
  root.key = root_key.value();
  root.v = sample_weight(dv, root_key, Role::tree_vertex_weight);
  t.nodes.push_back(root);

  for (std::size_t x = 0; x < t.nodes.size(); ++x) {
    const StreamKey key = StreamKey::from_value(t.nodes[x].key);
    RandomStream gap_stream(key.child(Role::tree_gap));
    double cum = 0.0;
    for (std::int32_t k = 1;; ++k) {
      cum += gaps.next(gap_stream);
      TreeNode c;
      if (flavor == TreeFlavor::discrete) {
        c.lattice = t.nodes[x].lattice + static_cast<std::int64_t>(cum);
        if (c.lattice > lattice_bound) break;
        c.length = cum / static_cast<double>(n);
        c.dist = static_cast<double>(c.lattice) / static_cast<double>(n);
      } else {
        c.dist = t.nodes[x].dist + cum;
        if (c.dist > horizon) break;
        c.length = cum;
      }
      if (t.nodes.size() >= kMaxTreeNodes) throw GuardError("cascade tree exceeds the node limit; reduce the horizon");
      const StreamKey child_key = key.child(static_cast<std::uint64_t>(k));
      c.parent = static_cast<std::int32_t>(x);
      c.k = k;
      c.depth = t.nodes[x].depth + 1;
      c.key = child_key.value();
      c.u = sample_weight(du, child_key, Role::tree_edge_weight);
      c.v = sample_weight(dv, child_key, Role::tree_vertex_weight);
      t.nodes[x].children.push_back(static_cast<std::int32_t>(t.nodes.size()));
      t.nodes.push_back(std::move(c));
    }
  }
  return t;
}

// Identity of a root distance: the exact lattice point for discrete trees, the
// bit pattern of the double otherwise.
std::uint64_t distance_key(const CascadeTree& t, const TreeNode& x) {
  return t.flavor == TreeFlavor::discrete ? static_cast<std::uint64_t>(x.lattice) : std::bit_cast<std::uint64_t>(x.dist);
}

double position_of(const CascadeTree& t, const TreeNode& x) {
  return t.flavor == TreeFlavor::discrete ? static_cast<double>(x.lattice) / static_cast<double>(t.n) : x.dist;
}

}  // namespace

std::string to_string(TreeFlavor f) { return f == TreeFlavor::pwit ? "pwit" : "discrete"; }

std::vector<std::int32_t> CascadeTree::address(std::int32_t node) const {
  std::vector<std::int32_t> a;
  for (auto x = node; x > 0; x = nodes[static_cast<std::size_t>(x)].parent) a.push_back(nodes[static_cast<std::size_t>(x)].k);
  std::reverse(a.begin(), a.end());
  return a;
}

nlohmann::json to_json(const CascadeTree& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const auto& x = t.nodes[i];
    nlohmann::json j{{"address", t.address(static_cast<std::int32_t>(i))}, {"dist", x.dist}, {"v", x.v}};
    if (x.parent >= 0) {
      j["length"] = x.length;
      j["u"] = x.u;
    }
    nodes.push_back(std::move(j));
  }
  nlohmann::json doc{{"flavor", to_string(t.flavor)}, {"horizon", t.horizon}, {"seed", t.seed},
                     {"du", t.du.to_string()},       {"dv", t.dv.to_string()},   {"nodes", std::move(nodes)}};
  if (t.flavor == TreeFlavor::discrete) {
    doc["n"] = t.n;
    doc["p_n"] = t.p_n;
  }
  return doc;
}

CascadeTree build_pwit(const Distribution& du, const Distribution& dv, double horizon, std::uint64_t seed) {
  return build_tree(TreeFlavor::pwit, 0, 0.0, du, dv, horizon, seed);
}

CascadeTree build_discrete_tree(std::int64_t n, double p_n, const Distribution& du, const Distribution& dv,
                                double horizon, std::uint64_t seed) {
  if (n < 1) throw ParameterError("n must be >= 1");
  if (!(p_n > 0.0 && p_n <= 1.0)) throw ParameterError("p_n must lie in (0, 1]");
  return build_tree(TreeFlavor::discrete, n, p_n, du, dv, horizon, seed);
}

double first_omitted_child_distance(const CascadeTree& t, std::int32_t node) {
  const auto& x = t.nodes[static_cast<std::size_t>(node)];
  const GapSource gaps{t.flavor, t.flavor == TreeFlavor::discrete ? std::log1p(-t.p_n) : 0.0};
  RandomStream s(StreamKey::from_value(x.key).child(Role::tree_gap));
  double cum = 0.0;
  for (std::size_t k = 0; k <= x.children.size(); ++k) cum += gaps.next(s);
  if (t.flavor == TreeFlavor::discrete) {
    return static_cast<double>(x.lattice + static_cast<std::int64_t>(cum)) / static_cast<double>(t.n);
  }
  return x.dist + cum;
}

std::size_t RootedWgg::edge_count() const {
  std::size_t e = 0;
  for (const auto& o : out) e += o.size();
  return e;
}

nlohmann::json to_json(const RootedWgg& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t s = 0; s < g.size(); ++s) {
    for (const auto& e : g.out[s]) edges.push_back({g.position[s], g.position[static_cast<std::size_t>(e.to)], e.u});
  }
  return {{"vertices", g.position}, {"vertex_weights", g.v}, {"edges", std::move(edges)}};
}

RootedWgg collapse(const CascadeTree& t) {
  // Preorder with children in k order visits addresses lexicographically.
  std::map<std::uint64_t, std::int32_t> rep;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const auto x = stack.back();
    stack.pop_back();
    const auto& node = t.nodes[static_cast<std::size_t>(x)];
    rep.emplace(distance_key(t, node), x);
    for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) stack.push_back(*it);
  }

  // Vertices reachable from the root along representative out-edges.
  std::map<double, std::int32_t> reached;  // position -> representative node
  std::deque<std::int32_t> queue{0};
  reached.emplace(position_of(t, t.nodes[0]), 0);
  while (!queue.empty()) {
    const auto x = queue.front();
    queue.pop_front();
    for (auto c : t.nodes[static_cast<std::size_t>(x)].children) {
      const auto& child = t.nodes[static_cast<std::size_t>(c)];
      const auto r = rep.at(distance_key(t, child));
      if (reached.emplace(position_of(t, child), r).second) queue.push_back(r);
    }
  }

  RootedWgg g;
  std::map<double, std::int32_t> index;
  for (const auto& [pos, x] : reached) {
    index.emplace(pos, static_cast<std::int32_t>(g.position.size()));
    g.position.push_back(pos);
    g.v.push_back(t.nodes[static_cast<std::size_t>(x)].v);
  }
  g.out.resize(g.position.size());
  std::size_t s = 0;
  for (const auto& [pos, x] : reached) {
    for (auto c : t.nodes[static_cast<std::size_t>(x)].children) {
      const auto& child = t.nodes[static_cast<std::size_t>(c)];
      g.out[s].push_back({index.at(position_of(t, child)), child.u});
    }
    ++s;
  }
  return g;
}

CascadeTree unfold(const RootedWgg& g, double horizon) {
  CascadeTree t;
  t.flavor = TreeFlavor::pwit;
  t.horizon = horizon;
  TreeNode root;
  root.v = g.v.empty() ? 0.0 : g.v[0];
  t.nodes.push_back(root);
  std::vector<std::int32_t> vertex_of{0};
  for (std::size_t x = 0; x < t.nodes.size(); ++x) {
    const auto s = static_cast<std::size_t>(vertex_of[x]);
    std::int32_t k = 0;
    for (const auto& e : g.out[s]) {
      if (t.nodes.size() >= kMaxTreeNodes) throw GuardError("unfolded tree exceeds the node limit");
      TreeNode c;
      c.parent = static_cast<std::int32_t>(x);
      c.k = ++k;
      c.depth = t.nodes[x].depth + 1;
      c.dist = g.position[static_cast<std::size_t>(e.to)];
      c.length = c.dist - g.position[s];
      c.u = e.u;
      c.v = g.v[static_cast<std::size_t>(e.to)];
      t.nodes[x].children.push_back(static_cast<std::int32_t>(t.nodes.size()));
      t.nodes.push_back(c);
      vertex_of.push_back(e.to);
    }
  }
  return t;
}

double heaviest_root_path(const RootedWgg& g) {
  if (g.size() == 0) return 0.0;
  std::vector<double> best(g.size(), -kInf);
  best[0] = 0.0;
  double result = 0.0;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (best[s] == -kInf) continue;
    result = std::max(result, best[s]);
    for (const auto& e : g.out[s]) {
      const double cand = best[s] + (g.v[s] + e.u);
      auto& b = best[static_cast<std::size_t>(e.to)];
      if (cand > b) b = cand;
    }
  }
  return result;
}

double heaviest_root_path(const CascadeTree& t) {
  std::vector<double> best(t.nodes.size(), 0.0);
  double result = 0.0;
  for (std::size_t x = 1; x < t.nodes.size(); ++x) {
    const auto& node = t.nodes[x];
    const auto& parent = t.nodes[static_cast<std::size_t>(node.parent)];
    best[x] = best[static_cast<std::size_t>(node.parent)] + (parent.v + node.u);
    result = std::max(result, best[x]);
  }
  return result;
}

CcmSample simulate_ccm0(const Distribution& du, const Distribution& dv, double horizon, std::uint64_t seed) {
  CcmSample s;
  s.wgg = collapse(build_pwit(du, dv, horizon, seed));
  s.w_tilde = heaviest_root_path(s.wgg);
  return s;
}

RootedWgg wgg_from_window(const GraphWindow& w, double scale) {
  const auto n = w.n();
  std::vector<char> reached(static_cast<std::size_t>(n) + 1, 0);
  reached[0] = 1;
  for (std::int64_t i = 0; i < n; ++i) {
    if (!reached[static_cast<std::size_t>(i)]) continue;
    w.for_each_out_edge(i, n, [&](std::int64_t j, double) { reached[static_cast<std::size_t>(j)] = 1; });
  }
  std::vector<std::int32_t> index(static_cast<std::size_t>(n) + 1, -1);
  RootedWgg g;
  for (std::int64_t i = 0; i <= n; ++i) {
    if (!reached[static_cast<std::size_t>(i)]) continue;
    index[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(g.position.size());
    g.position.push_back(static_cast<double>(i) / scale);
    g.v.push_back(w.vertex_weight(i));
  }
  g.out.resize(g.position.size());
  for (std::int64_t i = 0; i <= n; ++i) {
    const auto s = index[static_cast<std::size_t>(i)];
    if (s < 0) continue;
    w.for_each_out_edge(i, n, [&](std::int64_t j, double u) {
      g.out[static_cast<std::size_t>(s)].push_back({index[static_cast<std::size_t>(j)], u});
    });
  }
  return g;
}

RootedWgg restrict_ball(const RootedWgg& g, double r) {
  RootedWgg b;
  std::size_t m = 0;
  while (m < g.size() && g.position[m] <= r) ++m;
  b.position.assign(g.position.begin(), g.position.begin() + static_cast<std::ptrdiff_t>(m));
  b.v.assign(g.v.begin(), g.v.begin() + static_cast<std::ptrdiff_t>(m));
  b.out.resize(m);
  for (std::size_t s = 0; s < m; ++s) {
    for (const auto& e : g.out[s]) {
      if (static_cast<std::size_t>(e.to) < m) b.out[s].push_back(e);
    }
  }
  return b;
}

double wgg_matching_distance(const RootedWgg& a, const RootedWgg& b) {
  if (a.size() > kMaxBallVertices || b.size() > kMaxBallVertices) {
    throw GuardError("matching distance is brute force and limited to " + std::to_string(kMaxBallVertices) +
                     " vertices, got " + std::to_string(std::max(a.size(), b.size())));
  }
  if (a.size() != b.size() || a.edge_count() != b.edge_count()) return kInf;
  const std::size_t m = a.size();
  if (m == 0) return 0.0;
  constexpr double kNoEdge = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> bu(m * m, kNoEdge);
  for (std::size_t s = 0; s < m; ++s) {
    for (const auto& e : b.out[s]) bu[s * m + static_cast<std::size_t>(e.to)] = e.u;
  }
  std::vector<std::size_t> phi(m);
  std::iota(phi.begin(), phi.end(), 0);
  double best = kInf;
  do {
    double edge_part = 0.0;
    bool ok = true;
    for (std::size_t s = 0; s < m && ok; ++s) {
      for (const auto& e : a.out[s]) {
        const auto t = static_cast<std::size_t>(e.to);
        const double ub = bu[phi[s] * m + phi[t]];
        if (std::isnan(ub)) {
          ok = false;
          break;
        }
        const double la = a.position[t] - a.position[s];
        const double lb = b.position[phi[t]] - b.position[phi[s]];
        edge_part = std::max(edge_part, std::abs(la - lb) + std::abs(e.u - ub));
      }
    }
    if (!ok) continue;
    double vertex_part = 0.0;
    for (std::size_t s = 0; s < m; ++s) vertex_part = std::max(vertex_part, std::abs(a.v[s] - b.v[phi[s]]));
    best = std::min(best, edge_part + vertex_part);
  } while (std::next_permutation(phi.begin() + 1, phi.end()));
  return best;
}

double wgg_distance(const RootedWgg& a, const RootedWgg& b, double r_max, double quadrature_step) {
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw ParameterError("r_max must be a finite positive number");
  if (!(quadrature_step > 0.0)) throw ParameterError("quadrature_step must be > 0");
  const RootedWgg ball_a = restrict_ball(a, r_max);
  const RootedWgg ball_b = restrict_ball(b, r_max);
  if (ball_a.size() > kMaxBallVertices || ball_b.size() > kMaxBallVertices) {
    throw GuardError("balls of radius r_max must hold at most " + std::to_string(kMaxBallVertices) + " vertices");
  }
  std::vector<double> cuts{0.0, r_max};
  for (double x : ball_a.position) cuts.push_back(x);
  for (double x : ball_b.position) cuts.push_back(x);
  const auto panels = static_cast<std::int64_t>(std::ceil(r_max / quadrature_step));
  for (std::int64_t k = 1; k < panels; ++k) cuts.push_back(static_cast<double>(k) * quadrature_step);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::map<std::pair<std::size_t, std::size_t>, double> cache;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double r0 = cuts[k];
    const double r1 = cuts[k + 1];
    if (r0 >= r_max) break;
    const auto ga = restrict_ball(ball_a, r0);
    const auto gb = restrict_ball(ball_b, r0);
    const auto key = std::make_pair(ga.size(), gb.size());
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, std::min(1.0, wgg_matching_distance(ga, gb))).first;
    total += it->second * (std::exp(-r0) - std::exp(-r1));
  }
  return total;
}

std::vector<ConvergenceRow> convergence_test(const std::vector<std::int64_t>& n_list, const Distribution& du,
                                             const Distribution& dv, double horizon, std::int64_t reps,
                                             std::uint64_t seed, unsigned threads) {
  if (reps < 500) throw ParameterError("convergence test needs reps >= 500");
  for (auto n : n_list) {
    if (n < 1) throw ParameterError("every n must be >= 1");
  }
  struct Functionals {
    double vertex_count = 0.0;
    double w_tilde = 0.0;
  };
  const StreamKey root(seed);
  const auto reference = parallel_map(
      static_cast<std::size_t>(reps),
      [&](std::size_t r) {
        const auto s = simulate_ccm0(du, dv, horizon, root.child(Role::reference).child(r).value());
        return Functionals{static_cast<double>(s.wgg.size()), s.w_tilde};
      },
      threads);
  std::vector<double> ref_count, ref_w;
  for (const auto& f : reference) {
    ref_count.push_back(f.vertex_count);
    ref_w.push_back(f.w_tilde);
  }
  const double critical = ks_two_sample_critical(static_cast<std::size_t>(reps), static_cast<std::size_t>(reps));
  std::vector<ConvergenceRow> rows;
  for (auto n : n_list) {
    const double p_n = std::min(1.0, 1.0 / static_cast<double>(n));
    const auto sample = parallel_map(
        static_cast<std::size_t>(reps),
        [&](std::size_t r) {
          const auto key = root.child(Role::tree).child(static_cast<std::uint64_t>(n)).child(r);
          const auto g = collapse(build_discrete_tree(n, p_n, du, dv, horizon, key.value()));
          return Functionals{static_cast<double>(g.size()), heaviest_root_path(g)};
        },
        threads);
    std::vector<double> count, w;
    for (const auto& f : sample) {
      count.push_back(f.vertex_count);
      w.push_back(f.w_tilde);
    }
    rows.push_back({n, "vertex_count", ks_two_sample(count, ref_count), reps, critical});
    rows.push_back({n, "w_tilde", ks_two_sample(w, ref_w), reps, critical});
  }
  return rows;
}

}  // namespace sog
