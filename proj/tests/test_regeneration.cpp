#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "sog/errors.hpp"
#include "sog/regeneration.hpp"
#include "sog/stats.hpp"

using sog::Distribution;

namespace {

sog::ModelParams params(double p, std::uint64_t seed, const char* u = "constant(1)", const char* v = "constant(0)") {
  sog::ModelParams m;
  m.p = p;
  m.du = Distribution::parse(u);
  m.dv = Distribution::parse(v);
  m.seed = seed;
  return m;
}

// Independent evaluation of the product with a fixed, generous depth.
double product_oracle(double p, int depth) {
  double prod = 1.0;
  for (int k = 1; k <= depth; ++k) prod *= std::pow(1.0 - std::pow(1.0 - p, k), 2);
  return prod;
}

bool subset(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST_CASE("skeleton density") {
  CHECK(sog::skeleton_density(1.0) == 1.0);
  CHECK(std::abs(sog::skeleton_density(0.5) - product_oracle(0.5, 200)) < 1e-12);
  CHECK(std::abs(sog::skeleton_density(0.1, 1e-12) - product_oracle(0.1, 2000)) < 1e-12);
  CHECK(std::abs(sog::skeleton_density(0.3, 1e-6) - sog::skeleton_density(0.3, 1e-12)) < 2e-6);
  double last = 0.0;
  for (int k = 1; k <= 9; ++k) {
    const double g = sog::skeleton_density(0.1 * k);
    CHECK(g > last);
    last = g;
  }
  CHECK_THROWS_AS((void)sog::skeleton_density(0.0), sog::ParameterError);
  CHECK_THROWS_AS((void)sog::skeleton_density(1.2), sog::ParameterError);
  CHECK(sog::skeleton_censoring_bias_bound(0.5, 10) == doctest::Approx(2.0 * std::pow(0.5, 11) / 0.5));
}

TEST_CASE("skeleton detection on the full graph") {
  const auto w = sog::generate_window(20, params(1.0, 0));
  const auto r = sog::detect_skeleton(w, 3);
  CHECK(r.points.size() == 15);
  CHECK(r.points.front() == 3);
  CHECK(r.points.back() == 17);
  CHECK(std::all_of(r.censored.begin(), r.censored.end(), [](bool b) { return b; }));
  CHECK_THROWS_AS((void)sog::detect_skeleton(w, 11), sog::ParameterError);
}

TEST_CASE("skeleton detection agrees with transitive closure") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const double p = 0.2 + 0.7 * static_cast<double>(seed % 10) / 10.0;
    const std::int64_t n = 5 + static_cast<std::int64_t>(seed % 36);
    const auto w = sog::generate_window(n, params(p, seed));
    for (std::int64_t margin : {std::int64_t{0}, std::int64_t{1}, n / 4}) {
      const auto expect = oracle::skeleton_by_closure(w, margin, n - margin);
      INFO("seed=" << seed << " margin=" << margin);
      CHECK(sog::detect_skeleton(w, margin).points == expect);
      CHECK(sog::skeleton_points_lookup(w, margin, n - margin) == expect);
      CHECK(sog::skeleton_points(sog::WindowModel(n, params(p, seed)), margin, n - margin) == expect);
    }
  }
}

TEST_CASE("renewal detection agrees with the definition and sits inside the skeleton") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto w = sog::generate_window(40, params(0.5, seed, "exponential(1)", "exponential(1)"));
    for (double c : {0.2, 0.4, 0.7}) {
      for (std::int64_t margin : {0, 1, 5}) {
        const auto r = sog::detect_renewal(w, c, margin);
        INFO("seed=" << seed << " c=" << c << " margin=" << margin);
        CHECK(r.points == oracle::renewal_by_definition(w, c, margin, 40 - margin));
        CHECK(subset(r.points, sog::detect_skeleton(w, margin).points));
        for (auto i : r.points) CHECK(sog::is_renewal_point(w, i, c));
      }
    }
  }
}

TEST_CASE("renewal detection fixtures") {
  const auto full = sog::generate_window(20, params(1.0, 0));
  const auto r = sog::detect_renewal(full, 0.75, 2);
  CHECK(r.points.size() == 17);
  CHECK(r.points == oracle::renewal_by_definition(full, 0.75, 2, 18));
  // A^{-+} is strict: at c = 0.5 the span-2 edges tie and nothing qualifies.
  CHECK(sog::detect_renewal(full, 0.5, 2).points.empty());
  // Growth is at most 1 per step, so c above 1 rules out every point.
  CHECK(sog::detect_renewal(full, 1.5, 2).points.empty());
  CHECK_THROWS_AS((void)sog::detect_renewal(full, 0.0, 2), sog::ParameterError);
  const auto signed_v = sog::generate_window(20, params(1.0, 0, "constant(1)", "uniform(-1, 1)"));
  CHECK_THROWS_AS((void)sog::detect_renewal(signed_v, 0.5, 2), sog::AssumptionError);
}

TEST_CASE("splitting identities hold at detected points") {
  SUBCASE("skeleton, edge counts") {
    const auto full = sog::generate_window(12, params(1.0, 0));
    const auto check = sog::verify_splitting(full, sog::detect_skeleton(full, 1));
    CHECK(check.ok);
    CHECK(check.triples_checked > 0);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto w = sog::generate_window(300, params(0.5, seed));
      const auto s = sog::verify_splitting(w, sog::detect_skeleton(w, 1));
      CHECK(s.ok);
      CHECK(s.violations.empty());
    }
  }
  SUBCASE("renewal, full weights") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto w = sog::generate_window(200, params(0.5, seed, "exponential(1)", "exponential(1)"));
      const auto r = sog::detect_renewal(w, 0.3, 1);
      const auto s = sog::verify_splitting(w, r);
      CHECK(s.ok);
    }
  }
}

TEST_CASE("splitting check catches an injected non-renewal point") {
  int witnessed = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto w = sog::generate_window(60, params(0.3, seed, "exponential(1)", "exponential(1)"));
    auto r = sog::detect_renewal(w, 0.3, 1);
    const auto skeleton = sog::detect_skeleton(w, 1).points;
    for (std::int64_t i = 1; i < 60; ++i) {
      if (std::binary_search(skeleton.begin(), skeleton.end(), i)) continue;
      r.points = {i};
      r.censored = {true};
      const auto s = sog::verify_splitting(w, r);
      if (!s.ok) {
        ++witnessed;
        const auto& v = s.violations.front();
        CHECK(v.x < v.i);
        CHECK(v.i < v.y);
        CHECK(v.i == i);
      }
      break;
    }
  }
  CHECK(witnessed > 0);
  const auto w1 = sog::generate_window(30, params(0.5, 1));
  const auto w2 = sog::generate_window(30, params(0.5, 2));
  CHECK_THROWS_AS((void)sog::verify_splitting(w2, sog::detect_skeleton(w1, 1)), sog::ParameterError);
}

TEST_CASE("skeleton gaps look like a renewal process") {
  std::vector<double> gaps;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const sog::WindowModel m(20000, params(0.5, seed));
    const auto pts = sog::skeleton_points_lookup(m, 0, 20000);
    for (std::size_t k = 1; k < pts.size(); ++k) gaps.push_back(static_cast<double>(pts[k] - pts[k - 1]));
  }
  REQUIRE(gaps.size() > 1000);
  const auto s = sog::summarize(gaps);
  CHECK(std::isfinite(s.var));
  CHECK(s.mean == doctest::Approx(1.0 / sog::skeleton_density(0.5)).epsilon(0.05));
  CHECK(std::abs(sog::lag1_autocorrelation(gaps)) <= 4.0 / std::sqrt(static_cast<double>(gaps.size())));
}

TEST_CASE("renewal density") {
  const auto exact = sog::estimate_lambda(200, params(1.0, 0), 0.75, 20);
  CHECK(exact.estimate == 1.0);
  CHECK(exact.std_error == 0.0);

  const auto mp = params(0.5, 5, "exponential(1)", "exponential(1)");
  const auto lam = sog::estimate_lambda(400, mp, 0.2, 400);
  const auto gamma = sog::estimate_skeleton_density(400, 0.5, 100, 400, 5);
  CHECK(lam.estimate <= gamma.estimate + 3.0 * std::hypot(lam.std_error, gamma.std_error));
}

TEST_CASE("suggested renewal level") {
  CHECK(sog::suggest_c(100, params(1.0, 0)) == doctest::Approx(0.5));
  const double c = sog::suggest_c(1000, params(0.5, 1));
  CHECK(c > 0.0);
  CHECK(c < 0.5 * 0.7);
  CHECK_THROWS_AS((void)sog::suggest_c(100, params(0.5, 1, "constant(-1)")), sog::AssumptionError);
}
