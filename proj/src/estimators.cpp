#include "sog/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sog/errors.hpp"
#include "sog/heaviest_path.hpp"
#include "sog/parallel.hpp"
#include "sog/regeneration.hpp"
#include "sog/stats.hpp"

namespace sog {

namespace {

ModelParams with_seed(const ModelParams& base, std::uint64_t seed) {
  ModelParams m = base;
  m.seed = seed;
  return m;
}

// Single-pair lookups beat edge enumeration once n p^2 >= 1.
bool prefer_lookup(std::int64_t n, double p) { return p * p * static_cast<double>(n) >= 1.0; }

std::int32_t longest_hops(const WindowModel& model, std::int64_t i, std::int64_t j) {
  std::vector<std::int32_t> h;
  if (prefer_lookup(model.n(), model.params().p)) {
    hop_sweep_lookup(model, i, j, h);
  } else {
    hop_sweep(model, i, j, h);
  }
  return h.back();
}

struct Replicate {
  double total = 0.0;  // W_{0,n}
  std::vector<double> weight;
  std::vector<double> length;
};

Replicate run_replicate(std::int64_t n, const ModelParams& params, CycleKind kind, double c, std::int64_t margin,
                        bool want_total) {
  Replicate rep;
  if (kind == CycleKind::skeleton) {
    const double a = *params.du.constant_value();
    const WindowModel model(n, params);
    const auto points = prefer_lookup(n, params.p) ? skeleton_points_lookup(model, margin, n - margin)
                                                   : skeleton_points(model, margin, n - margin);
    for (std::size_t k = 1; k < points.size(); ++k) {
      rep.weight.push_back(a * longest_hops(model, points[k - 1], points[k]));
      rep.length.push_back(static_cast<double>(points[k] - points[k - 1]));
    }
    if (want_total) {
      const auto h = longest_hops(model, 0, n);
      rep.total = h < 0 ? 0.0 : std::max(0.0, a * h);
    }
    return rep;
  }
  const GraphWindow w = generate_window(n, params);
  const auto points = renewal_points(w, c, margin, n - margin);
  std::vector<double> best;
  for (std::size_t k = 1; k < points.size(); ++k) {
    forward_sweep(w, points[k - 1], points[k], Variant::full, best);
    rep.weight.push_back(best.back());
    rep.length.push_back(static_cast<double>(points[k] - points[k - 1]));
  }
  if (want_total) {
    forward_sweep(w, 0, n, Variant::full, best);
    rep.total = best.back() == kUnreached ? 0.0 : std::max(0.0, best.back());
  }
  return rep;
}

struct CyclePlan {
  CycleKind kind;
  double c;
  std::int64_t margin;
};

CyclePlan plan_cycles(std::int64_t n, const ModelParams& params, const RegenerativeOptions& opts) {
  CyclePlan plan{CycleKind::skeleton, 0.0, opts.margin.value_or(n / 8)};
  check_margin(n, plan.margin);
  if (uses_skeleton_cycles(params)) return plan;
  plan.kind = CycleKind::renewal;
  if (params.dv.support_min() < 0.0) {
    throw AssumptionError("renewal cycles need v >= 0, got dv=" + params.dv.to_string());
  }
  plan.c = opts.c ? *opts.c : suggest_c(n, params, opts.threads);
  if (!(plan.c > 0.0)) throw ParameterError("renewal level c must be > 0");
  return plan;
}

std::uint64_t grid_seed(std::uint64_t seed, std::int64_t n) {
  return StreamKey(seed).child(Role::replication).child(static_cast<std::uint64_t>(n)).value();
}

double centred_variance(const std::vector<double>& y, const std::vector<double>& l, double c_hat) {
  double s = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double z = y[k] - c_hat * l[k];
    s += z * z;
  }
  return s / static_cast<double>(y.size() - 1);
}

bool is_unweighted(const ModelParams& p) {
  auto u = p.du.constant_value();
  auto v = p.dv.constant_value();
  return u && v && *u == 1.0 && *v == 0.0;
}

}  // namespace

std::string to_string(EstimatorMethod m) { return m == EstimatorMethod::plug_in ? "plug_in" : "regenerative"; }

std::string to_string(EstimateTarget t) {
  switch (t) {
    case EstimateTarget::C:
      return "C";
    case EstimateTarget::C0:
      return "C0";
    case EstimateTarget::b2:
      return "b2";
    case EstimateTarget::gamma:
      return "gamma";
    case EstimateTarget::lambda:
      return "lambda";
  }
  return "?";
}

std::string to_string(CycleKind k) {
  switch (k) {
    case CycleKind::none:
      return "none";
    case CycleKind::skeleton:
      return "skeleton";
    case CycleKind::renewal:
      return "renewal";
  }
  return "?";
}

EstimatorMethod parse_estimator_method(const std::string& s) {
  if (s == "plug_in" || s == "plug-in") return EstimatorMethod::plug_in;
  if (s == "regenerative") return EstimatorMethod::regenerative;
  throw ParameterError("method must be 'plug_in' or 'regenerative', got '" + s + "'");
}

nlohmann::json to_json(const EstimateReport& r) {
  nlohmann::json j{
      {"target", to_string(r.target)},
      {"estimate", r.estimate},
      {"stderr", r.std_error},
      {"method", to_string(r.method)},
      {"params",
       {{"n", r.n},
        {"p", r.params.p},
        {"du", r.params.du.to_string()},
        {"dv", r.params.dv.to_string()},
        {"c", r.c},
        {"reps", r.reps},
        {"margin", r.margin},
        {"seed", r.params.seed}}},
  };
  if (r.method == EstimatorMethod::regenerative) {
    j["cycles_used"] = r.cycles_used;
    j["cycle_kind"] = to_string(r.cycle_kind);
    j["mean_cycle_length"] = r.mean_cycle_length;
  }
  if (r.target == EstimateTarget::b2) j["per_unit_variance"] = r.per_unit_variance;
  return j;
}

std::string estimate_csv_header() {
  return "target,method,n,p,du,dv,c,reps,margin,seed,estimate,stderr,cycles_used,cycle_kind";
}

std::string to_csv_row(const EstimateReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(r.target) << ',' << to_string(r.method) << ',' << r.n << ',' << r.params.p << ",\""
     << r.params.du.to_string() << "\",\"" << r.params.dv.to_string() << "\"," << r.c << ',' << r.reps << ','
     << r.margin << ',' << r.params.seed << ',' << r.estimate << ',' << r.std_error << ',' << r.cycles_used << ','
     << to_string(r.cycle_kind);
  return os.str();
}

bool uses_skeleton_cycles(const ModelParams& params) {
  const auto u = params.du.constant_value();
  const auto v = params.dv.constant_value();
  return u && v && *v == 0.0;
}

CycleSample collect_cycles(std::int64_t n, const ModelParams& params, std::int64_t reps,
                           const RegenerativeOptions& opts) {
  if (reps < 1) throw ParameterError("reps must be >= 1");
  const CyclePlan plan = plan_cycles(n, params, opts);
  auto reps_out = parallel_map(
      static_cast<std::size_t>(reps),
      [&](std::size_t r) {
        return run_replicate(n, with_seed(params, replication_seed(params.seed, r)), plan.kind, plan.c, plan.margin,
                             false);
      },
      opts.threads);
  CycleSample out;
  out.kind = plan.kind;
  out.c = plan.c;
  out.margin = plan.margin;
  for (auto& rep : reps_out) {
    out.weight.insert(out.weight.end(), rep.weight.begin(), rep.weight.end());
    out.length.insert(out.length.end(), rep.length.begin(), rep.length.end());
  }
  return out;
}

RatioEstimate ratio_estimate(const std::vector<double>& weight, const std::vector<double>& length) {
  const std::size_t k = weight.size();
  if (k < 2 || length.size() != k) throw DegenerateSampleError("ratio estimate needs at least two cycles");
  double sy = 0.0, sl = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sy += weight[i];
    sl += length[i];
  }
  RatioEstimate r;
  r.value = sy / sl;
  r.mean_length = sl / static_cast<double>(k);
  const double s2 = centred_variance(weight, length, r.value);
  r.std_error = std::sqrt(s2 / static_cast<double>(k)) / r.mean_length;
  return r;
}

double clipped_total_weight(std::int64_t n, const ModelParams& params) {
  const WindowModel model(n, params);
  if (uses_skeleton_cycles(params)) {
    const auto h = longest_hops(model, 0, n);
    return h < 0 ? 0.0 : std::max(0.0, *params.du.constant_value() * h);
  }
  bool reachable = false;
  const double w = heaviest_value(model, 0, n, Variant::full, &reachable);
  return reachable ? std::max(0.0, w) : 0.0;
}

EstimateReport estimate_growth_constant(std::int64_t n, const ModelParams& params, std::int64_t reps,
                                        EstimatorMethod method, const RegenerativeOptions& opts) {
  require_assumptions(params.du, params.dv, AssumptionSet::A);
  if (reps < 2) throw ParameterError("reps must be >= 2");
  if (n < 1) throw ParameterError("window size n must be >= 1");
  EstimateReport rep;
  rep.target = is_unweighted(params) ? EstimateTarget::C0 : EstimateTarget::C;
  rep.method = method;
  rep.n = n;
  rep.params = params;
  rep.reps = reps;
  if (method == EstimatorMethod::plug_in) {
    const auto values = parallel_map(
        static_cast<std::size_t>(reps),
        [&](std::size_t r) {
          return clipped_total_weight(n, with_seed(params, replication_seed(params.seed, r))) /
                 static_cast<double>(n);
        },
        opts.threads);
    const auto s = summarize(values);
    rep.estimate = s.mean;
    rep.std_error = s.std_error;
    return rep;
  }
  const CycleSample cycles = collect_cycles(n, params, reps, opts);
  rep.c = cycles.c;
  rep.margin = cycles.margin;
  rep.cycle_kind = cycles.kind;
  rep.cycles_used = static_cast<std::int64_t>(cycles.weight.size());
  if (cycles.weight.size() < 2) {
    throw DegenerateSampleError("found " + std::to_string(cycles.weight.size()) +
                                " complete regeneration cycles; use a larger n" +
                                (cycles.kind == CycleKind::renewal ? std::string(" or a smaller c") : std::string()));
  }
  const auto ratio = ratio_estimate(cycles.weight, cycles.length);
  rep.estimate = ratio.value;
  rep.std_error = ratio.std_error;
  rep.mean_cycle_length = ratio.mean_length;
  return rep;
}

SeriesValue series_c0(double q) {
  if (!(q >= 0.0 && q < 1.0)) throw ParameterError("q must lie in [0, 1)");
  SeriesValue s;
  s.value = 1.0 - q + q * q - 3.0 * q * q * q + 7.0 * q * q * q * q;
  s.remainder_scale = q * q * q * q * q;
  s.accuracy_caveat = q > 0.2;
  return s;
}

EstimateReport estimate_clt_variance(std::int64_t n, const ModelParams& params, std::int64_t reps,
                                     const RegenerativeOptions& opts) {
  require_assumptions(params.du, params.dv, AssumptionSet::B);
  if (reps < 1) throw ParameterError("reps must be >= 1");
  const CycleSample cycles = collect_cycles(n, params, reps, opts);
  const std::size_t k = cycles.weight.size();
  if (k < 30) {
    throw DegenerateSampleError("only " + std::to_string(k) +
                                " regeneration cycles (need >= 30); use a larger n or more reps" +
                                (cycles.kind == CycleKind::renewal ? std::string(", or a smaller c") : std::string()));
  }
  const auto ratio = ratio_estimate(cycles.weight, cycles.length);
  EstimateReport rep;
  rep.target = EstimateTarget::b2;
  rep.method = EstimatorMethod::regenerative;
  rep.n = n;
  rep.params = params;
  rep.reps = reps;
  rep.c = cycles.c;
  rep.margin = cycles.margin;
  rep.cycle_kind = cycles.kind;
  rep.cycles_used = static_cast<std::int64_t>(k);
  rep.mean_cycle_length = ratio.mean_length;
  rep.estimate = centred_variance(cycles.weight, cycles.length, ratio.value);
  rep.per_unit_variance = rep.estimate / ratio.mean_length;

  if (opts.bootstrap >= 2) {
    const StreamKey boot = StreamKey(params.seed).child(Role::bootstrap);
    const auto draws = parallel_map(
        static_cast<std::size_t>(opts.bootstrap),
        [&](std::size_t b) {
          RandomStream s(boot.child(b));
          std::vector<double> y(k), l(k);
          for (std::size_t i = 0; i < k; ++i) {
            const auto pick = s.below(k);
            y[i] = cycles.weight[pick];
            l[i] = cycles.length[pick];
          }
          double sy = 0.0, sl = 0.0;
          for (std::size_t i = 0; i < k; ++i) {
            sy += y[i];
            sl += l[i];
          }
          return centred_variance(y, l, sy / sl);
        },
        opts.threads);
    rep.std_error = summarize(draws).sd;
  }
  return rep;
}

std::vector<CltRow> clt_diagnostic(const std::vector<std::int64_t>& n_grid, const ModelParams& params,
                                   std::int64_t reps, const RegenerativeOptions& opts) {
  require_assumptions(params.du, params.dv, AssumptionSet::B);
  if (n_grid.empty()) throw ParameterError("n grid is empty");
  for (std::size_t k = 1; k < n_grid.size(); ++k) {
    if (n_grid[k] <= n_grid[k - 1]) throw ParameterError("n grid must be strictly ascending");
  }
  if (reps < 4) throw ParameterError("reps must be >= 4");
  RegenerativeOptions resolved = opts;
  if (!uses_skeleton_cycles(params) && !resolved.c) resolved.c = suggest_c(n_grid.back(), params, opts.threads);

  std::vector<CltRow> rows;
  for (const auto n : n_grid) {
    RegenerativeOptions local = resolved;
    if (!local.margin) local.margin = n / 8;
    const CyclePlan plan = plan_cycles(n, params, local);
    const std::uint64_t base = grid_seed(params.seed, n);
    auto reps_out = parallel_map(
        static_cast<std::size_t>(reps),
        [&](std::size_t r) {
          return run_replicate(n, with_seed(params, replication_seed(base, r)), plan.kind, plan.c, plan.margin, true);
        },
        opts.threads);
    CltRow row;
    row.n = n;
    row.reps = reps;
    std::vector<double> y, l, totals;
    for (auto& rep : reps_out) {
      totals.push_back(rep.total);
      y.insert(y.end(), rep.weight.begin(), rep.weight.end());
      l.insert(l.end(), rep.length.begin(), rep.length.end());
    }
    if (y.size() < 2) {
      row.degenerate = true;
      rows.push_back(row);
      continue;
    }
    const auto ratio = ratio_estimate(y, l);
    row.c_hat = ratio.value;
    row.b2_hat = centred_variance(y, l, ratio.value);
    row.per_unit_variance = row.b2_hat / ratio.mean_length;
    const bool constant = std::all_of(totals.begin(), totals.end(), [&](double t) { return t == totals.front(); });
    if (constant || !(row.per_unit_variance > 0.0)) {
      row.degenerate = true;
      rows.push_back(row);
      continue;
    }
    const double scale = std::sqrt(row.per_unit_variance * static_cast<double>(n));
    std::vector<double> z(totals.size());
    for (std::size_t k = 0; k < totals.size(); ++k) z[k] = (totals[k] - row.c_hat * static_cast<double>(n)) / scale;
    row.skewness = skewness(z);
    row.excess_kurtosis = excess_kurtosis(z);
    row.ks_normal = ks_normal(z);
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json to_json(const CltRow& row) {
  nlohmann::json j{{"n", row.n}, {"reps", row.reps}, {"degenerate", row.degenerate}};
  if (!row.degenerate) {
    j["c_hat"] = row.c_hat;
    j["b2_hat"] = row.b2_hat;
    j["per_unit_variance"] = row.per_unit_variance;
    j["skewness"] = row.skewness;
    j["excess_kurtosis"] = row.excess_kurtosis;
    j["ks_normal"] = row.ks_normal;
  }
  return j;
}

}  // namespace sog
