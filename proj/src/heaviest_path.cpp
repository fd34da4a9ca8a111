#include "sog/heaviest_path.hpp"

#include "sog/errors.hpp"

namespace sog {

namespace {

void check_pair(const GraphWindow& g, std::int64_t i, std::int64_t j) {
  if (i >= j) {
    throw ParameterError("need i < j, got i=" + std::to_string(i) + " j=" + std::to_string(j));
  }
  if (i < 0 || j > g.n()) {
    throw ParameterError("pair (" + std::to_string(i) + "," + std::to_string(j) + ") outside [0, " +
                         std::to_string(g.n()) + "]");
  }
}

PathValue unreachable(Variant variant) {
  PathValue pv;
  pv.variant = variant;
  return pv;
}

}  // namespace

std::string to_string(Variant v) { return v == Variant::full ? "full" : "edge_only"; }

Variant parse_variant(const std::string& s) {
  if (s == "full") return Variant::full;
  if (s == "edge_only") return Variant::edge_only;
  throw ParameterError("variant must be 'full' or 'edge_only', got '" + s + "'");
}

nlohmann::json to_json(const PathValue& pv) {
  nlohmann::json j{{"reachable", pv.reachable}, {"W", pv.W}, {"path", pv.path}, {"variant", to_string(pv.variant)}};
  j["w"] = pv.reachable ? nlohmann::json(pv.w) : nlohmann::json(nullptr);
  return j;
}

double path_weight(const GraphWindow& g, const std::vector<std::int64_t>& path, Variant variant) {
  if (path.size() < 2) throw InvalidPathError("a path needs at least one edge");
  double s = 0.0;
  for (std::size_t r = 1; r < path.size(); ++r) {
    const auto x = path[r - 1];
    const auto y = path[r];
    if (!g.has_edge(x, y)) {
      throw InvalidPathError("(" + std::to_string(x) + "," + std::to_string(y) + ") is not an edge of the window");
    }
    s += edge_term(g, x, g.edge_weight(x, y), variant);
  }
  return s;
}

PathValue heaviest_between(const GraphWindow& g, std::int64_t i, std::int64_t j, Variant variant) {
  check_pair(g, i, j);
  std::vector<double> best;
  forward_sweep(g, i, j, variant, best);
  const auto at = [&](std::int64_t x) { return best[static_cast<std::size_t>(x - i)]; };
  if (at(j) == kUnreached) return unreachable(variant);

  // on[x]: x lies on some optimal i -> j path through tight edges only
  std::vector<char> on(best.size(), 0);
  on.back() = 1;
  for (std::int64_t x = j - 1; x >= i; --x) {
    if (at(x) == kUnreached) continue;
    bool hit = false;
    const double vx = variant == Variant::full ? g.vertex_weight(x) : 0.0;
    g.for_each_out_edge(x, j, [&](std::int64_t y, double u) {
      if (hit || !on[static_cast<std::size_t>(y - i)]) return;
      if (at(x) + (variant == Variant::full ? vx + u : u) == at(y)) hit = true;
    });
    on[static_cast<std::size_t>(x - i)] = hit ? 1 : 0;
  }

  PathValue pv;
  pv.variant = variant;
  pv.reachable = true;
  pv.w = at(j);
  pv.W = std::max(pv.w, 0.0);
  pv.path.push_back(i);
  for (std::int64_t x = i; x != j;) {
    std::int64_t next = -1;
    const double vx = variant == Variant::full ? g.vertex_weight(x) : 0.0;
    g.for_each_out_edge(x, j, [&](std::int64_t y, double u) {
      if (next >= 0 || !on[static_cast<std::size_t>(y - i)]) return;
      if (at(x) + (variant == Variant::full ? vx + u : u) == at(y)) next = y;
    });
    x = next;
    pv.path.push_back(x);
  }
  return pv;
}

double window_max(const GraphWindow& g, std::int64_t i, std::int64_t j, Variant variant) {
  check_pair(g, i, j);
  return window_max_sweep(g, i, j, variant);
}

PathValue brute_force_heaviest(const GraphWindow& g, std::int64_t i, std::int64_t j, Variant variant) {
  check_pair(g, i, j);
  if (j - i > kBruteForceSpan) {
    throw GuardError("brute force limited to spans <= " + std::to_string(kBruteForceSpan) + ", got " +
                     std::to_string(j - i));
  }
  const int inner = static_cast<int>(j - i - 1);
  PathValue out = unreachable(variant);
  std::vector<std::int64_t> path;
  for (std::uint32_t mask = 0; mask < (1U << inner); ++mask) {
    path.clear();
    path.push_back(i);
    for (int b = 0; b < inner; ++b) {
      if (mask >> b & 1U) path.push_back(i + 1 + b);
    }
    path.push_back(j);
    bool ok = true;
    double s = 0.0;
    for (std::size_t r = 1; r < path.size() && ok; ++r) {
      if (!g.has_edge(path[r - 1], path[r])) {
        ok = false;
      } else {
        s += edge_term(g, path[r - 1], g.edge_weight(path[r - 1], path[r]), variant);
      }
    }
    if (!ok) continue;
    if (!out.reachable || s > out.w || (s == out.w && path < out.path)) {
      out.reachable = true;
      out.w = s;
      out.path = path;
    }
  }
  if (out.reachable) out.W = std::max(out.w, 0.0);
  return out;
}

}  // namespace sog
