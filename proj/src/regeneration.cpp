#include "sog/regeneration.hpp"

#include <cmath>
#include <limits>

#include "sog/errors.hpp"
#include "sog/parallel.hpp"
#include "sog/stats.hpp"

namespace sog {

namespace {

void check_p(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("edge probability p must lie in (0, 1]");
}

ModelParams replication_params(const ModelParams& base, std::uint64_t seed) {
  ModelParams m = base;
  m.seed = seed;
  return m;
}

}  // namespace

std::int64_t skeleton_truncation_depth(double p, double tol) {
  check_p(p);
  if (!(tol > 0.0)) throw ParameterError("tolerance must be > 0");
  if (p == 1.0) return 1;
  const double q = 1.0 - p;
  // omitted tail: 1 - prod_{k>K} (1-q^k)^2 <= 2 q^(K+1) / p
  std::int64_t k = 1;
  while (2.0 * std::pow(q, static_cast<double>(k + 1)) / p >= tol) ++k;
  return k;
}

double skeleton_density(double p, double tol) {
  const std::int64_t depth = skeleton_truncation_depth(p, tol);
  const double q = 1.0 - p;
  double log_prod = 0.0;
  double qk = 1.0;
  for (std::int64_t k = 1; k <= depth; ++k) {
    qk *= q;
    log_prod += 2.0 * std::log1p(-qk);
  }
  return std::exp(log_prod);
}

double skeleton_censoring_bias_bound(double p, std::int64_t margin) {
  check_p(p);
  if (p == 1.0) return 0.0;
  return 2.0 * std::pow(1.0 - p, static_cast<double>(margin + 1)) / p;
}

std::string to_string(RegenerationKind k) { return k == RegenerationKind::skeleton ? "skeleton" : "renewal"; }

nlohmann::json to_json(const RegenerationReport& r) {
  nlohmann::json j{
      {"window_id", r.window_id},
      {"kind", to_string(r.kind)},
      {"points", r.points},
      {"margin", r.margin},
      {"censored", r.censored},
  };
  if (r.kind == RegenerationKind::renewal) j["c"] = r.c;
  return j;
}

void check_margin(std::int64_t n, std::int64_t margin) {
  if (margin < 0 || 2 * margin > n) {
    throw ParameterError("margin must lie in [0, n/2], got " + std::to_string(margin) + " for n=" +
                         std::to_string(n));
  }
}

RegenerationReport detect_skeleton(const GraphWindow& w, std::int64_t margin) {
  check_margin(w.n(), margin);
  RegenerationReport r;
  r.window_id = w.id();
  r.kind = RegenerationKind::skeleton;
  r.margin = margin;
  r.points = skeleton_points(w, margin, w.n() - margin);
  r.censored.assign(r.points.size(), true);
  return r;
}

RegenerationReport detect_renewal(const GraphWindow& w, double c, std::int64_t margin) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("renewal level c must be a finite positive number");
  check_margin(w.n(), margin);
  if (w.params().dv.support_min() < 0.0) {
    throw AssumptionError("renewal detection needs v >= 0, but dv=" + w.params().dv.to_string() +
                          " has negative support");
  }
  for (std::int64_t i = 0; i <= w.n(); ++i) {
    if (w.vertex_weight(i) < 0.0) {
      throw AssumptionError("renewal detection needs v >= 0, vertex " + std::to_string(i) + " has weight " +
                            std::to_string(w.vertex_weight(i)));
    }
  }
  RegenerationReport r;
  r.window_id = w.id();
  r.kind = RegenerationKind::renewal;
  r.margin = margin;
  r.c = c;
  r.points = renewal_points(w, c, margin, w.n() - margin);
  r.censored.assign(r.points.size(), true);
  return r;
}

SplittingCheck verify_splitting(const GraphWindow& w, const RegenerationReport& report) {
  if (report.window_id != w.id()) {
    throw ParameterError("report belongs to window " + report.window_id + ", not " + w.id());
  }
  const std::int64_t n = w.n();
  const bool hops = report.kind == RegenerationKind::skeleton;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // Per-source optimum to every later vertex; NaN marks unreachable.
  auto sweep = [&](std::int64_t x) {
    std::vector<double> out;
    if (hops) {
      std::vector<std::int32_t> h;
      hop_sweep(w, x, n, h);
      out.resize(h.size());
      for (std::size_t k = 0; k < h.size(); ++k) out[k] = h[k] < 0 ? nan : static_cast<double>(h[k]);
    } else {
      forward_sweep(w, x, n, Variant::full, out);
      for (double& v : out) {
        if (v == kUnreached) v = nan;
      }
    }
    return out;
  };

  std::vector<std::int64_t> points;
  for (auto i : report.points) {
    if (i > 0 && i < n) points.push_back(i);
  }
  std::vector<std::vector<double>> from_point;
  from_point.reserve(points.size());
  for (auto i : points) from_point.push_back(sweep(i));

  SplittingCheck check;
  for (std::int64_t x = 0; x < n; ++x) {
    const auto fx = sweep(x);
    for (std::size_t k = 0; k < points.size(); ++k) {
      const auto i = points[k];
      if (i <= x) continue;
      const double left = fx[static_cast<std::size_t>(i - x)];
      for (std::int64_t y = i + 1; y <= n; ++y) {
        const double whole = fx[static_cast<std::size_t>(y - x)];
        if (std::isnan(whole)) continue;
        ++check.triples_checked;
        const double split = left + from_point[k][static_cast<std::size_t>(y - i)];
        const bool good = hops ? whole == split
                               : !std::isnan(split) && std::abs(whole - split) <= 1e-9 * (1.0 + std::abs(whole));
        if (!good) check.violations.push_back({x, i, y, whole, split});
      }
    }
  }
  check.ok = check.violations.empty();
  return check;
}

DensityEstimate estimate_skeleton_density(std::int64_t n, double p, std::int64_t margin, std::int64_t reps,
                                          std::uint64_t seed, unsigned threads) {
  check_p(p);
  check_margin(n, margin);
  if (reps < 2) throw ParameterError("reps must be >= 2");
  const std::int64_t lo = margin;
  const std::int64_t hi = n - margin;
  auto one = [&](std::size_t r) {
    ModelParams mp;
    mp.p = p;
    mp.seed = replication_seed(seed, r);
    const WindowModel model(n, mp);
    const auto points = skeleton_points_lookup(model, lo, hi);
    return static_cast<double>(points.size()) / static_cast<double>(hi - lo + 1);
  };
  const auto fractions = parallel_map(static_cast<std::size_t>(reps), one, threads);
  const auto s = summarize(fractions);
  return {s.mean, s.std_error, skeleton_censoring_bias_bound(p, margin), reps};
}

DensityEstimate estimate_lambda(std::int64_t n, const ModelParams& params, double c, std::int64_t reps,
                                unsigned threads) {
  if (!(c > 0.0)) throw ParameterError("renewal level c must be > 0");
  if (reps < 2) throw ParameterError("reps must be >= 2");
  if (n < 2) throw ParameterError("window size n must be >= 2");
  if (params.dv.support_min() < 0.0) throw AssumptionError("renewal detection needs v >= 0");
  const std::int64_t centre = n / 2;
  auto one = [&](std::size_t r) {
    const WindowModel model(n, replication_params(params, replication_seed(params.seed, r)));
    const bool hit = renewal_minus(model, centre, c) && renewal_plus(model, centre, c) &&
                     renewal_straddle(model, centre, c);
    return hit ? 1.0 : 0.0;
  };
  const auto hits = parallel_map(static_cast<std::size_t>(reps), one, threads);
  const auto s = summarize(hits);
  return {s.mean, s.std_error, 0.0, reps};
}

double suggest_c(std::int64_t n, const ModelParams& params, unsigned threads) {
  const double mu = params.du.mean();
  if (!(mu > 0.0)) {
    throw AssumptionError("suggest_c needs E[u] > 0, got E[u]=" + std::to_string(mu) + " for u=" +
                          params.du.to_string());
  }
  constexpr std::int64_t kPilotN = 2000;
  constexpr std::size_t kPilotReps = 20;
  const std::int64_t pilot_n = std::min(n, kPilotN);
  if (pilot_n < 1) throw ParameterError("window size n must be >= 1");
  const StreamKey pilot = StreamKey(params.seed).child(Role::pilot);
  auto one = [&](std::size_t r) {
    const WindowModel model(pilot_n, replication_params(params, pilot.child(r).value()));
    bool reachable = false;
    const double w = heaviest_value(model, 0, pilot_n, Variant::edge_only, &reachable);
    return reachable ? std::max(w, 0.0) / static_cast<double>(pilot_n) : 0.0;
  };
  const auto growth = parallel_map(kPilotReps, one, threads);
  return 0.5 * summarize(growth).mean;
}

}  // namespace sog
