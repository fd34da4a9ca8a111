#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "sog/distribution.hpp"
#include "sog/errors.hpp"
#include "sog/random.hpp"

using sog::Distribution;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Sample {
  double mean;
  double sd;
};

Sample draw(const Distribution& d, int count, std::uint64_t seed) {
  sog::RandomStream s{sog::StreamKey(seed)};
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < count; ++k) {
    const double x = d.sample(s);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / count;
  return {mean, std::sqrt(std::max(0.0, sq / count - mean * mean))};
}

}  // namespace

TEST_CASE("random streams are pure functions of their path") {
  sog::RandomStream a(sog::StreamKey(42).child(sog::Role::edges).child(7));
  sog::RandomStream b(sog::StreamKey(42).child(sog::Role::edges).child(7));
  sog::RandomStream c(sog::StreamKey(42).child(sog::Role::edges).child(8));
  int differ = 0;
  for (int k = 0; k < 100; ++k) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    differ += x != c.uniform();
  }
  CHECK(differ == 100);
  CHECK(a.draws() == 100);
  CHECK(sog::StreamKey::from_value(sog::StreamKey(5).value()) == sog::StreamKey(5));
}

TEST_CASE("uniform draws are uniform") {
  sog::RandomStream s{sog::StreamKey(1)};
  std::vector<int> bins(10, 0);
  const int n = 100000;
  for (int k = 0; k < n; ++k) ++bins[static_cast<std::size_t>(s.uniform() * 10)];
  for (int b : bins) CHECK(std::abs(b - n / 10) < 4 * std::sqrt(n * 0.09));
  for (int k = 0; k < 1000; ++k) CHECK(s.below(7) < 7);
}

TEST_CASE("moments of the basic laws") {
  SUBCASE("constant") {
    const auto m = Distribution::constant(1.0).moments();
    CHECK(m.mean == 1.0);
    CHECK(m.mean_pos_sq == 1.0);
    CHECK(m.var == 0.0);
  }
  SUBCASE("exponential") {
    const auto d = Distribution::exponential(1.0);
    CHECK(d.mean() == doctest::Approx(1.0));
    CHECK(d.moments().third_moment == doctest::Approx(6.0));
    CHECK(Distribution::exponential(2.0).raw_moment(2) == doctest::Approx(0.5));
  }
  SUBCASE("two point") {
    const auto d = Distribution::parse("two_point(-5,0.5;6,0.5)");
    const auto m = d.moments();
    CHECK(m.mean == doctest::Approx(0.5));
    CHECK(m.mean_pos_sq == doctest::Approx(18.0));
    // brute-force expectation over the atoms
    double pos_sq = 0.0, third = 0.0;
    const auto atoms = d.atoms();
    for (const auto& a : *atoms) {
      pos_sq += a.prob * std::pow(std::max(0.0, a.value), 2);
      third += a.prob * std::pow(a.value, 3);
    }
    CHECK(m.mean_pos_sq == doctest::Approx(pos_sq));
    CHECK(m.third_moment == doctest::Approx(third));
  }
  SUBCASE("uniform") {
    const auto d = Distribution::uniform(-1.0, 3.0);
    CHECK(d.mean() == doctest::Approx(1.0));
    CHECK(d.moments().var == doctest::Approx(16.0 / 12.0));
    // E[max(0,X)^2] = int_0^3 x^2 / 4 dx = 27 / 12
    CHECK(d.moments().mean_pos_sq == doctest::Approx(27.0 / 12.0));
  }
  SUBCASE("pareto moments become infinite") {
    const auto d = Distribution::pareto(1.0, 2.5);
    CHECK(d.mean() == doctest::Approx(2.5 / 1.5));
    CHECK(std::isfinite(d.moments().second_moment));
    CHECK(d.moments().third_moment == kInf);
  }
  SUBCASE("shifted and negated") {
    const auto e = Distribution::exponential(1.0);
    const auto s = Distribution::shifted(e, -2.0);
    CHECK(s.mean() == doctest::Approx(-1.0));
    CHECK(s.moments().var == doctest::Approx(1.0));
    // E[(X-2)^3] = E[X^3] - 6 E[X^2] + 12 E[X] - 8 = 6 - 12 + 12 - 8
    CHECK(s.moments().third_moment == doctest::Approx(-2.0));
    const auto n = Distribution::negated(e);
    CHECK(n.mean() == doctest::Approx(-1.0));
    CHECK(n.moments().third_moment == doctest::Approx(-6.0));
    CHECK(n.moments().mean_pos_sq == 0.0);
    CHECK(Distribution::negated(Distribution::pareto(1.0, 1.5)).moments().mean_pos_sq == 0.0);
    CHECK(Distribution::negated(Distribution::pareto(1.0, 1.5)).moments().third_moment == -kInf);
  }
}

TEST_CASE("sample means converge to the closed-form mean") {
  const std::vector<std::string> specs{"constant(2)",           "bernoulli(0.3)",     "bernoulli(0.3, 4)",
                                       "two_point(-5,0.5;6,0.5)", "uniform(-1, 2)",   "exponential(2)",
                                       "pareto(1, 3)",            "shifted(exponential(1), -0.5)",
                                       "negated(uniform(0, 1))"};
  for (const auto& text : specs) {
    const auto d = Distribution::parse(text);
    for (int n : {10000, 1000000}) {
      const auto s = draw(d, n, 17);
      INFO(text << " n=" << n);
      CHECK(std::abs(s.mean - d.mean()) <= 4.0 * s.sd / std::sqrt(n) + 1e-12);
    }
  }
}

TEST_CASE("sampling examples") {
  sog::RandomStream s{sog::StreamKey(3)};
  CHECK(Distribution::constant(7.0).sample(s) == 7.0);
  CHECK(s.draws() == 0);
  for (int k = 0; k < 100; ++k) CHECK(Distribution::bernoulli(1.0, 3.0).sample(s) == 3.0);
  const auto e = draw(Distribution::exponential(1.0), 1000000, 99);
  CHECK(std::abs(e.mean - 1.0) < 3e-3);
}

TEST_CASE("negated twice samples like the original") {
  const auto d = Distribution::parse("two_point(-1, 0.25; 3, 0.75)");
  const auto dd = Distribution::negated(Distribution::negated(d));
  sog::RandomStream a{sog::StreamKey(8)}, b{sog::StreamKey(8)};
  for (int k = 0; k < 1000; ++k) CHECK(d.sample(a) == dd.sample(b));
  const auto u = Distribution::exponential(3.0);
  const auto uu = Distribution::negated(Distribution::negated(u));
  for (int k = 0; k < 1000; ++k) CHECK(u.sample(a) == uu.sample(b));
}

TEST_CASE("parser round trips and reports the failing production") {
  for (const char* text : {"constant(1)", "bernoulli(0.5)", "bernoulli(0.25, 2)", "two_point(0.5, 0.5; 1.5, 0.5)",
                           "uniform(0, 2)", "exponential(1)", "pareto(1, 2.5)", "shifted(exponential(1), -1)",
                           "negated(shifted(uniform(0, 1), 0.1))"}) {
    const auto d = Distribution::parse(text);
    CHECK(Distribution::parse(d.to_string()) == d);
    CHECK(Distribution::parse(d.to_string()).to_string() == d.to_string());
  }
  CHECK(Distribution::parse("  exponential ( 1 ) ") == Distribution::exponential(1.0));
  try {
    (void)Distribution::parse("two_point(1, 0.5; 2)");
    FAIL("expected a parse error");
  } catch (const sog::ParseError& e) {
    CHECK(std::string(e.what()).find("two_point") != std::string::npos);
  }
  CHECK_THROWS_AS((void)Distribution::parse("gauss(0,1)"), sog::ParseError);
  CHECK_THROWS_AS((void)Distribution::parse("exponential(1"), sog::ParseError);
  CHECK_THROWS_AS((void)Distribution::parse("exponential(-1)"), sog::ParseError);
  CHECK_THROWS_AS((void)Distribution::parse("two_point(0, 0.3; 1, 0.3)"), sog::ParseError);
}

TEST_CASE("cdf and atoms") {
  const auto d = Distribution::parse("two_point(0.5, 0.25; 1.5, 0.75)");
  CHECK(d.cdf(0.4) == 0.0);
  CHECK(d.cdf(0.5) == doctest::Approx(0.25));
  CHECK(d.cdf(2.0) == doctest::Approx(1.0));
  CHECK(d.atom_mass(1.5) == doctest::Approx(0.75));
  CHECK_FALSE(Distribution::exponential(1.0).atoms().has_value());
  CHECK(Distribution::exponential(1.0).cdf(1.0) == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(Distribution::negated(Distribution::exponential(1.0)).cdf(-1.0) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("partial moments split the full moment") {
  for (const char* text : {"exponential(1.5)", "uniform(-1, 2)", "shifted(exponential(1), -0.7)", "pareto(1, 4.5)",
                           "two_point(-2, 0.4; 3, 0.6)"}) {
    const auto d = Distribution::parse(text);
    for (int k = 0; k <= 3; ++k) {
      for (double t : {-0.5, 0.3, 1.7}) {
        const double split = d.partial_moment(k, t, sog::Tail::above) + d.partial_moment(k, t, sog::Tail::below) +
                             d.atom_mass(t) * std::pow(t, k);
        INFO(text << " k=" << k << " t=" << t);
        CHECK(split == doctest::Approx(d.raw_moment(k)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("assumption sets") {
  using sog::AssumptionSet;
  CHECK(sog::check_assumptions(Distribution::constant(1.0), Distribution::constant(0.0), AssumptionSet::A).satisfied);
  const auto r = sog::check_assumptions(Distribution::parse("two_point(-5,0.5;6,0.5)"),
                                        Distribution::exponential(1.0), AssumptionSet::A);
  CHECK(r.satisfied);
  CHECK(r.violated_clauses.empty());

  const auto bad = sog::check_assumptions(Distribution::constant(-1.0), Distribution::constant(0.0), AssumptionSet::A);
  CHECK_FALSE(bad.satisfied);
  REQUIRE(bad.violated_clauses.size() == 1);
  CHECK(bad.violated_clauses[0].clause == "E[u] > 0");
  CHECK(bad.violated_clauses[0].value == -1.0);

  // (A) tolerates a heavy negative tail of u, (B) does not.
  const auto heavy = Distribution::shifted(Distribution::negated(Distribution::pareto(1.0, 1.5)), 10.0);
  CHECK(sog::check_assumptions(heavy, Distribution::constant(0.0), AssumptionSet::A).satisfied);
  CHECK_FALSE(sog::check_assumptions(heavy, Distribution::constant(0.0), AssumptionSet::B).satisfied);

  const auto no_third = sog::check_assumptions(Distribution::pareto(1.0, 2.5), Distribution::constant(0.0),
                                               AssumptionSet::B);
  CHECK_FALSE(no_third.satisfied);
  CHECK(no_third.violated_clauses.size() == 1);

  const auto neg_v = sog::check_assumptions(Distribution::constant(1.0), Distribution::uniform(-1.0, 1.0),
                                            AssumptionSet::A);
  CHECK_FALSE(neg_v.satisfied);
  CHECK_THROWS_AS(sog::require_assumptions(Distribution::constant(-1.0), Distribution::uniform(-1.0, 1.0),
                                           AssumptionSet::A),
                  sog::AssumptionError);
  try {
    sog::require_assumptions(Distribution::constant(-1.0), Distribution::uniform(-1.0, 1.0), AssumptionSet::A);
  } catch (const sog::AssumptionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("E[u] > 0") != std::string::npos);
    CHECK(msg.find("P(v >= 0) = 1") != std::string::npos);
  }
}
