// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sog/cascade.hpp"
#include "sog/cli.hpp"
#include "sog/estimators.hpp"
#include "sog/fixedpoint.hpp"
#include "sog/heaviest_path.hpp"
#include "sog/regeneration.hpp"

namespace fs = std::filesystem;
using sog::Distribution;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

sog::ModelParams params(double p, std::uint64_t seed, const char* u = "constant(1)", const char* v = "constant(0)") {
  sog::ModelParams m;
  m.p = p;
  m.du = Distribution::parse(u);
  m.dv = Distribution::parse(v);
  m.seed = seed;
  return m;
}

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

Outcome within_budget(Outcome o, double seconds, double budget) {
  o.detail += fmt("; %.1fs (budget %.0fs)", seconds, budget);
  o.pass = o.pass && seconds < budget;
  return o;
}

Outcome oracle_equivalence() {
  std::size_t pairs = 0, mismatches = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    sog::RandomStream s{sog::StreamKey(seed).child(1)};
    const auto n = 1 + static_cast<std::int64_t>(s.below(12));
    static const char* laws[] = {"constant(1)", "exponential(1)", "two_point(-5,0.5;6,0.5)", "uniform(-1,1)"};
    const auto w = sog::generate_window(n, params(0.15 + 0.8 * s.uniform(), seed, laws[s.below(4)],
                                                  s.uniform() < 0.5 ? "constant(0)" : "exponential(1)"));
    for (auto variant : {sog::Variant::full, sog::Variant::edge_only}) {
      for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t j = i + 1; j <= n; ++j) {
          const auto dp = sog::heaviest_between(w, i, j, variant);
          const auto bf = sog::brute_force_heaviest(w, i, j, variant);
          ++pairs;
          const bool same = dp.reachable == bf.reachable && (!dp.reachable || (dp.w == bf.w && dp.path == bf.path));
          mismatches += !same;
        }
      }
    }
  }
  return {mismatches == 0, fmt("%zu (i,j,variant) cases, %zu mismatches", pairs, mismatches)};
}

Outcome skeleton_density() {
  const auto est = sog::estimate_skeleton_density(2000, 0.5, 500, 2000, 7);
  const double gamma = sog::skeleton_density(0.5);
  const double bias = sog::skeleton_censoring_bias_bound(0.5, 500);
  const double tol = 3.0 * est.std_error + bias;
  const double dev = std::abs(est.estimate - gamma);
  return {dev <= tol, fmt("estimate %.6f vs %.6f, |dev| %.2e <= %.2e", est.estimate, gamma, dev, tol)};
}

Outcome dense_constant() {
  const auto r = sog::estimate_growth_constant(5000, params(0.9, 11), 200, sog::EstimatorMethod::regenerative);
  const double target = sog::series_c0(0.1).value;
  const double tol = std::max(3.0 * r.std_error, 5e-3);
  const double dev = std::abs(r.estimate - target);
  return {dev <= tol, fmt("C0(0.9) = %.6f (stderr %.1e, %lld cycles) vs %.4f, |dev| %.2e <= %.2e", r.estimate,
                          r.std_error, static_cast<long long>(r.cycles_used), target, dev, tol)};
}

Outcome exact_degenerate() {
  bool ok = true;
  std::string d;
  for (auto method : {sog::EstimatorMethod::plug_in, sog::EstimatorMethod::regenerative}) {
    const auto r = sog::estimate_growth_constant(500, params(1.0, 1), 20, method);
    ok = ok && r.estimate == 1.0 && r.std_error == 0.0;
    d += fmt("%s %.17g (stderr %.17g) ", sog::to_string(method).c_str(), r.estimate, r.std_error);
  }
  return {ok, d};
}

Outcome splitting() {
  std::size_t skel_points = 0, skel_bad = 0, ren_points = 0, ren_bad = 0, triples = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto w = sog::generate_window(1000, params(0.5, 100 + seed));
    const auto r = sog::detect_skeleton(w, 125);
    const auto check = sog::verify_splitting(w, r);
    skel_points += r.points.size();
    skel_bad += check.violations.size();
    triples += check.triples_checked;
  }
  const auto weighted = params(0.5, 0, "exponential(1)", "exponential(1)");
  const double c = sog::suggest_c(1000, weighted);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto mp = weighted;
    mp.seed = 200 + seed;
    const auto w = sog::generate_window(1000, mp);
    const auto r = sog::detect_renewal(w, c, 125);
    const auto check = sog::verify_splitting(w, r);
    ren_points += r.points.size();
    ren_bad += check.violations.size();
    triples += check.triples_checked;
  }
  const bool ok = skel_bad == 0 && ren_bad == 0 && skel_points > 0 && ren_points > 0;
  return {ok, fmt("skeleton %zu points / %zu violations, renewal (c = %.4f) %zu points / %zu violations, %zu triples",
                  skel_points, skel_bad, c, ren_points, ren_bad, triples)};
}

Outcome containment() {
  std::size_t windows = 0, levels = 0, renewal = 0, escaped = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const char* u = seed % 2 ? "exponential(1)" : "uniform(0, 2)";
    const auto w = sog::generate_window(400, params(seed % 3 == 0 ? 0.3 : 0.6, 300 + seed, u, "exponential(1)"));
    const auto skeleton = sog::detect_skeleton(w, 0).points;
    ++windows;
    for (int k = 1; k <= 20; ++k) {
      const double c = 0.05 * k;
      const auto r = sog::detect_renewal(w, c, 0);
      ++levels;
      renewal += r.points.size();
      for (auto i : r.points) escaped += !std::binary_search(skeleton.begin(), skeleton.end(), i);
    }
  }
  return {escaped == 0 && renewal > 0, fmt("%zu windows x %zu levels, %zu renewal points, %zu outside the skeleton",
                                           windows, levels / windows, renewal, escaped)};
}

Outcome estimator_agreement() {
  const auto mp = params(0.5, 5, "exponential(1)", "exponential(1)");
  const auto a = sog::estimate_growth_constant(2000, mp, 200, sog::EstimatorMethod::plug_in);
  const auto b = sog::estimate_growth_constant(2000, mp, 200, sog::EstimatorMethod::regenerative);
  const double combined = std::hypot(a.std_error, b.std_error);
  const double dev = std::abs(a.estimate - b.estimate);
  return {dev <= 3.0 * combined, fmt("plug-in %.5f (%.1e), regenerative %.5f (%.1e, c = %.4f, %lld cycles), |dev| %.2e <= %.2e",
                                     a.estimate, a.std_error, b.estimate, b.std_error, b.c,
                                     static_cast<long long>(b.cycles_used), dev, 3.0 * combined)};
}

Outcome clt() {
  const std::int64_t reps = 1000;
  const auto rows = sog::clt_diagnostic({250, 1000, 4000}, params(0.5, 13), reps);
  bool ok = true;
  std::string d;
  const double band = 2.0 / std::sqrt(static_cast<double>(reps));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    ok = ok && !r.degenerate;
    if (k > 0) ok = ok && r.ks_normal <= rows[k - 1].ks_normal + band;
    d += fmt("n=%lld ks %.4f skew %.3f kurt %.3f; ", static_cast<long long>(r.n), r.ks_normal, r.skewness,
             r.excess_kurtosis);
  }
  const auto& last = rows.back();
  ok = ok && std::abs(last.skewness) < 0.25 && std::abs(last.excess_kurtosis) < 0.5;
  d += fmt("ks band %.3f", band);
  return {ok, d};
}

Outcome solver() {
  const double f1 = 1.0 - std::exp(-1.0);
  const double f2 = 1.0 - std::exp(-std::exp(-1.0));
  const auto g = sog::solve_ftw(Distribution::constant(1.0), 5.0, 5.0, 0.01, 0.01);
  const double e1 = std::abs(g.F(1.0, 0.5) - f1);
  const double e2 = std::abs(g.F(1.0, 1.5) - f2);
  bool ok = e1 < 1e-3 && e2 < 1e-3;
  std::string d = fmt("|F(1,0.5) err| %.1e, |F(1,1.5) err| %.1e; orders", e1, e2);
  // u = 1 puts the atoms on every lattice, so only the dt-error remains: order 2.
  double last = 0.0;
  for (double h : {0.04, 0.02, 0.01, 0.005}) {
    const auto r = sog::solve_ftw(Distribution::constant(1.0), 1.0, 1.5, h, h / 2.0, {false});
    const double e = std::abs(r.F(1.0, 1.5) - f2);
    if (last > 0.0) {
      const double order = std::log2(last / e);
      ok = ok && order >= 1.9;
      d += fmt(" %.2f", order);
    }
    last = e;
  }
  return {ok, d};
}

Outcome cross_validation() {
  bool ok = true;
  std::string d;
  struct Case {
    const char* u;
    std::vector<sog::Checkpoint> points;
  };
  const std::vector<Case> cases{
      {"constant(1)", {{1.0, 0.5}, {1.0, 1.5}, {2.0, 0.5}, {2.0, 1.5}, {2.0, 2.5}, {3.0, 2.5}}},
      {"two_point(0.5, 0.5; 1.5, 0.5)", {{1.0, 0.5}, {1.0, 1.0}, {1.0, 2.0}, {2.0, 1.0}, {2.0, 2.0}, {2.0, 3.0}}},
  };
  for (const auto& c : cases) {
    const auto g = sog::solve_ftw(Distribution::parse(c.u), 3.0, 4.0, 0.01, 0.01);
    const auto r = sog::mc_validate_ftw(g, c.points, 100000, 17);
    double worst = 0.0;
    for (const auto& p : r.points) worst = std::max(worst, p.deviation / p.tolerance);
    ok = ok && r.all_pass;
    d += fmt("%s: %zu points, max |dev| %.2e, max dev/tol %.2f; ", c.u, r.points.size(), r.max_abs_dev, worst);
  }
  return {ok, d + "reps 100000"};
}

Outcome sparse_limit() {
  const std::int64_t reps = 2000;
  const auto rows = sog::convergence_test({16, 64, 256, 1024}, Distribution::constant(1.0),
                                          Distribution::constant(0.0), 2.0, reps, 23);
  const double band = 2.0 / std::sqrt(static_cast<double>(reps));
  bool ok = true;
  std::string d;
  for (const char* f : {"vertex_count", "w_tilde"}) {
    double prev = -1.0;
    d += std::string(f) + ":";
    for (const auto& r : rows) {
      if (r.functional != f) continue;
      if (prev >= 0.0) ok = ok && r.ks_stat <= prev + band;
      prev = r.ks_stat;
      d += fmt(" %.4f", r.ks_stat);
      if (r.n == 1024) ok = ok && r.ks_stat < r.critical_5pct;
    }
    d += "; ";
  }
  return {ok, d + fmt("band %.4f, 5%% critical %.4f", band, rows.front().critical_5pct)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome reproducibility() {
  const auto root = fs::temp_directory_path() / "soglab-acceptance";
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> runs{
      {"generate", "--n", "200", "--p", "0.3", "--u", "exponential(1)"},
      {"heaviest", "--n", "300", "--u", "exponential(1)", "--v", "exponential(1)"},
      {"skeleton", "--n", "2000", "--reps", "50", "--seed", "7"},
      {"renewal", "--n", "500", "--u", "exponential(1)", "--v", "exponential(1)", "--reps", "20", "--verify", "true"},
      {"estimate-c", "--n", "1000", "--reps", "20", "--method", "regenerative"},
      {"estimate-c", "--n", "500", "--reps", "20", "--u", "exponential(1)", "--v", "exponential(1)"},
      {"estimate-b2", "--n", "2000", "--reps", "10", "--bootstrap", "200"},
      {"clt", "--n-list", "100,400", "--reps", "50"},
      {"cascade", "--horizon", "2", "--u", "exponential(1)"},
      {"converge", "--n-list", "8,32", "--horizon", "1", "--reps", "500"},
      {"solve-ftw", "--t-max", "2", "--w-max", "2"},
      {"validate-ftw", "--checkpoints", "1:0.5,2:1.5", "--reps", "10000"},
  };
  std::size_t replays = 0, failures = 0;
  std::string failed;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    std::string digests[2];
    for (int t = 0; t < 2; ++t) {
      const std::string threads = t == 0 ? "1" : "4";
      const auto dir = root / (std::to_string(k) + "-" + threads);
      auto args = runs[k];
      for (const auto& extra : {"--threads", threads.c_str(), "--out", dir.c_str()}) args.emplace_back(extra);
      std::ostringstream out, err;
      if (sog::run(args, out, err) != sog::kExitOk) {
        ++failures;
        failed += " " + runs[k][0] + "(run)";
        continue;
      }
      digests[t] = slurp(dir / "manifest.json");
      const auto doc = nlohmann::json::parse(digests[t]);
      digests[t] = doc.at("output_files").dump();
      for (const char* replay_threads : {"1", "4"}) {
        std::ostringstream rout, rerr;
        const auto rdir = dir / (std::string("replay-") + replay_threads);
        const int code = sog::run({"replay", (dir / "manifest.json").string(), "--threads", replay_threads, "--out",
                                   rdir.string()},
                                  rout, rerr);
        ++replays;
        bool same = code == sog::kExitOk;
        for (const auto& f : doc.at("output_files")) {
          const auto name = f.at("path").get<std::string>();
          same = same && slurp(rdir / name) == slurp(dir / name);
        }
        if (!same) {
          ++failures;
          failed += " " + runs[k][0] + "(replay)";
        }
      }
    }
    if (digests[0] != digests[1]) {
      ++failures;
      failed += " " + runs[k][0] + "(threads)";
    }
  }
  fs::remove_all(root);
  return {failures == 0, fmt("%zu runs, %zu replays byte-identical across --threads 1/4, %zu failures", 2 * runs.size(),
                             replays, failures) +
                             failed};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> body;
  };
  const std::vector<Criterion> criteria{
      {1, "oracle equivalence", 10, oracle_equivalence},
      {2, "skeleton density", 60, skeleton_density},
      {3, "dense-regime constant", 300, dense_constant},
      {4, "exact degenerate case", 1e9, exact_degenerate},
      {5, "splitting identities", 60, splitting},
      {6, "containment", 1e9, containment},
      {7, "estimator agreement", 300, estimator_agreement},
      {8, "CLT diagnostic", 1e9, clt},
      {9, "fixed-point solver", 10, solver},
      {10, "solver-simulation cross-validation", 120, cross_validation},
      {11, "sparse-limit convergence", 300, sparse_limit},
      {12, "reproducibility", 1e9, reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s < 1e8) {
      o = within_budget(o, s, c.budget_s);
    } else {
      o.detail += fmt("; %.1fs", s);
    }
    failed += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
