#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sog/random.hpp"

namespace sog {

/// Closed-form summary of a weight law. Any entry may be +inf (or -inf for the
/// odd moments of a law with a heavy negative tail); infinities are values here.
struct Moments {
  double mean = 0.0;
  double mean_pos_sq = 0.0;  // E[max(0, X)^2]
  double second_moment = 0.0;
  double var = 0.0;
  double third_moment = 0.0;  // E[X^3]
};

struct Atom {
  double value;
  double prob;
};

enum class Tail { above, below };

/// Declarative scalar law used for edge weights u and vertex weights v.
///
/// Grammar (whitespace ignored):
///
///     spec := constant(a) | bernoulli(p) | bernoulli(p, scale)
///           | two_point(a, p; b, q)        -- q must equal 1 - p
///           | uniform(a, b) | exponential(rate) | pareto(xm, alpha)
///           | shifted(spec, offset) | negated(spec)
///
/// Instances are immutable and cheap to copy (shared node tree).
class Distribution {
 public:
  enum class Kind { constant, bernoulli, two_point, uniform, exponential, pareto, shifted, negated };

  static Distribution constant(double a);
  static Distribution bernoulli(double p, double scale = 1.0);
  static Distribution two_point(double a, double p, double b, double q);
  static Distribution uniform(double a, double b);
  static Distribution exponential(double rate);
  static Distribution pareto(double xm, double alpha);
  static Distribution shifted(const Distribution& base, double offset);
  static Distribution negated(const Distribution& base);

  /// Throws ParseError naming the grammar production that failed.
  static Distribution parse(std::string_view text);

  /// Canonical text; parse(to_string()) reproduces the same law exactly.
  [[nodiscard]] std::string to_string() const;

  [[nodiscard]] Kind kind() const;

  /// Draws one variate. Consumes exactly one uniform, except `constant` which draws nothing.
  double sample(RandomStream& stream) const;

  [[nodiscard]] Moments moments() const;
  [[nodiscard]] double mean() const;

  /// E[X^k] for k in 0..3.
  [[nodiscard]] double raw_moment(int k) const;
  /// E[X^k 1{X > t}] (Tail::above) or E[X^k 1{X < t}] (Tail::below), k in 0..3.
  [[nodiscard]] double partial_moment(int k, double t, Tail tail) const;
  /// P(X = x).
  [[nodiscard]] double atom_mass(double x) const;
  /// P(X <= x).
  [[nodiscard]] double cdf(double x) const;

  [[nodiscard]] double support_min() const;
  [[nodiscard]] double support_max() const;

  /// Atoms with positive mass for purely discrete laws; nullopt for continuous ones.
  [[nodiscard]] std::optional<std::vector<Atom>> atoms() const;

  /// The value when the law is a point mass.
  [[nodiscard]] std::optional<double> constant_value() const;

  friend bool operator==(const Distribution& a, const Distribution& b) {
    return a.to_string() == b.to_string();
  }

 private:
  struct Node;
  explicit Distribution(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

enum class AssumptionSet { A, B };

struct ClauseFailure {
  std::string clause;  // e.g. "E[u] > 0"
  double value;        // the computed quantity the clause tested
};

struct AssumptionReport {
  AssumptionSet assumption_set = AssumptionSet::A;
  bool satisfied = true;
  std::vector<ClauseFailure> violated_clauses;
};

/// Evaluates the moment/support clauses of set (A) or (B) exactly, without sampling.
///   (A): P(v >= 0) = 1, E v < inf, E u > 0, E max(0,u)^2 < inf
///   (B): P(u >= 0, v >= 0) = 1, E v^2 < inf, E u > 0, E u^3 < inf
AssumptionReport check_assumptions(const Distribution& du, const Distribution& dv,
                                   AssumptionSet which);

/// Throws AssumptionError listing every violated clause.
void require_assumptions(const Distribution& du, const Distribution& dv, AssumptionSet which);

std::string to_string(AssumptionSet s);

}  // namespace sog
