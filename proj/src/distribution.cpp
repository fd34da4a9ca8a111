#include "sog/distribution.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "sog/errors.hpp"

namespace sog {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

constexpr std::array<std::array<double, 4>, 4> kBinomial{{
    {1, 0, 0, 0},
    {1, 1, 0, 0},
    {1, 2, 1, 0},
    {1, 3, 3, 1},
}};

// Sum_i coeff[i] * term[i] where some terms may be infinite. For the laws we
// support only one tail can be heavy, so the highest-order infinite term
// dominates and fixes the sign of the result.
double combine(const std::array<double, 4>& coeff, const std::array<double, 4>& term, int k) {
  for (int i = k; i >= 0; --i) {
    if (coeff[i] != 0.0 && std::isinf(term[i])) {
      return (coeff[i] > 0) == (term[i] > 0) ? kInf : -kInf;
    }
  }
  double s = 0.0;
  for (int i = 0; i <= k; ++i) {
    if (coeff[i] != 0.0) s += coeff[i] * term[i];
  }
  return s;
}

std::string format_number(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw ParameterError(std::string(what) + " must be finite");
}

}  // namespace

struct Distribution::Node {
  Kind kind;
  double a = 0.0;
  double b = 0.0;
  double p = 0.0;
  double q = 0.0;
  std::shared_ptr<const Node> base;

  std::vector<Atom> discrete_atoms() const {
    switch (kind) {
      case Kind::constant:
        return {{a, 1.0}};
      case Kind::bernoulli:
        return {{b, p}, {0.0, 1.0 - p}};
      case Kind::two_point:
        return {{a, p}, {b, q}};
      default:
        return {};
    }
  }

  bool is_discrete_leaf() const {
    return kind == Kind::constant || kind == Kind::bernoulli || kind == Kind::two_point;
  }

  double full_moment(int k) const {
    if (is_discrete_leaf()) {
      double s = 0.0;
      for (const auto& at : discrete_atoms()) {
        if (at.prob > 0.0) s += at.prob * ipow(at.value, k);
      }
      return s;
    }
    switch (kind) {
      case Kind::uniform:
        return (ipow(b, k + 1) - ipow(a, k + 1)) / ((k + 1) * (b - a));
      case Kind::exponential:
        return factorial(k) / ipow(a, k);
      case Kind::pareto:
        // xm = a, alpha = b
        if (k == 0) return 1.0;
        return b > k ? b * ipow(a, k) / (b - k) : kInf;
      case Kind::shifted: {
        std::array<double, 4> coeff{}, term{};
        for (int i = 0; i <= k; ++i) {
          coeff[i] = kBinomial[k][i] * ipow(a, k - i);
          term[i] = base->full_moment(i);
        }
        return combine(coeff, term, k);
      }
      case Kind::negated:
        return ipow(-1.0, k) * base->full_moment(k);
      default:
        break;
    }
    return 0.0;
  }

  double above(int k, double t) const {
    if (is_discrete_leaf()) {
      double s = 0.0;
      for (const auto& at : discrete_atoms()) {
        if (at.prob > 0.0 && at.value > t) s += at.prob * ipow(at.value, k);
      }
      return s;
    }
    switch (kind) {
      case Kind::uniform: {
        const double lo = std::max(a, t);
        if (lo >= b) return 0.0;
        return (ipow(b, k + 1) - ipow(lo, k + 1)) / ((k + 1) * (b - a));
      }
      case Kind::exponential: {
        if (t <= 0.0) return full_moment(k);
        // int_t^inf x^k r e^{-rx} dx = e^{-rt} sum_{i<=k} k!/i! t^i r^{i-k}
        double s = 0.0;
        for (int i = 0; i <= k; ++i) s += factorial(k) / factorial(i) * ipow(t, i) / ipow(a, k - i);
        return std::exp(-a * t) * s;
      }
      case Kind::pareto: {
        const double lo = std::max(t, a);
        if (b <= k) return kInf;
        return b * std::pow(a, b) * std::pow(lo, k - b) / (b - k);
      }
      case Kind::shifted: {
        std::array<double, 4> coeff{}, term{};
        for (int i = 0; i <= k; ++i) {
          coeff[i] = kBinomial[k][i] * ipow(a, k - i);
          term[i] = base->above(i, t - a);
        }
        return combine(coeff, term, k);
      }
      case Kind::negated:
        return ipow(-1.0, k) * base->below(k, -t);
      default:
        break;
    }
    return 0.0;
  }

  double below(int k, double t) const {
    if (is_discrete_leaf()) {
      double s = 0.0;
      for (const auto& at : discrete_atoms()) {
        if (at.prob > 0.0 && at.value < t) s += at.prob * ipow(at.value, k);
      }
      return s;
    }
    switch (kind) {
      case Kind::uniform: {
        const double hi = std::min(b, t);
        if (hi <= a) return 0.0;
        return (ipow(hi, k + 1) - ipow(a, k + 1)) / ((k + 1) * (b - a));
      }
      case Kind::exponential: {
        if (t <= 0.0) return 0.0;
        return full_moment(k) - above(k, t);
      }
      case Kind::pareto: {
        if (t <= a) return 0.0;
        const double alpha = b;
        const double xm = a;
        if (k == alpha) return alpha * std::pow(xm, alpha) * std::log(t / xm);
        return alpha * std::pow(xm, alpha) * (std::pow(t, k - alpha) - std::pow(xm, k - alpha)) /
               (k - alpha);
      }
      case Kind::shifted: {
        std::array<double, 4> coeff{}, term{};
        for (int i = 0; i <= k; ++i) {
          coeff[i] = kBinomial[k][i] * ipow(a, k - i);
          term[i] = base->below(i, t - a);
        }
        return combine(coeff, term, k);
      }
      case Kind::negated:
        return ipow(-1.0, k) * base->above(k, -t);
      default:
        break;
    }
    return 0.0;
  }

  double atom(double x) const {
    if (is_discrete_leaf()) {
      double s = 0.0;
      for (const auto& at : discrete_atoms()) {
        if (at.value == x) s += at.prob;
      }
      return s;
    }
    switch (kind) {
      case Kind::shifted:
        return base->atom(x - a);
      case Kind::negated:
        return base->atom(-x);
      default:
        return 0.0;
    }
  }

  double support_min() const {
    if (is_discrete_leaf()) {
      double m = kInf;
      for (const auto& at : discrete_atoms()) {
        if (at.prob > 0.0) m = std::min(m, at.value);
      }
      return m;
    }
    switch (kind) {
      case Kind::uniform:
        return a;
      case Kind::exponential:
        return 0.0;
      case Kind::pareto:
        return a;
      case Kind::shifted:
        return base->support_min() + a;
      case Kind::negated:
        return -base->support_max();
      default:
        return 0.0;
    }
  }

  double support_max() const {
    if (is_discrete_leaf()) {
      double m = -kInf;
      for (const auto& at : discrete_atoms()) {
        if (at.prob > 0.0) m = std::max(m, at.value);
      }
      return m;
    }
    switch (kind) {
      case Kind::uniform:
        return b;
      case Kind::exponential:
      case Kind::pareto:
        return kInf;
      case Kind::shifted:
        return base->support_max() + a;
      case Kind::negated:
        return -base->support_min();
      default:
        return 0.0;
    }
  }

  std::optional<std::vector<Atom>> atoms() const {
    if (is_discrete_leaf()) {
      std::vector<Atom> out;
      for (const auto& at : discrete_atoms()) {
        if (at.prob <= 0.0) continue;
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const Atom& o) { return o.value == at.value; });
        if (it != out.end()) {
          it->prob += at.prob;
        } else {
          out.push_back(at);
        }
      }
      std::sort(out.begin(), out.end(), [](const Atom& x, const Atom& y) { return x.value < y.value; });
      return out;
    }
    if (kind == Kind::shifted || kind == Kind::negated) {
      auto inner = base->atoms();
      if (!inner) return std::nullopt;
      for (auto& at : *inner) at.value = kind == Kind::shifted ? at.value + a : -at.value;
      std::sort(inner->begin(), inner->end(),
                [](const Atom& x, const Atom& y) { return x.value < y.value; });
      return inner;
    }
    return std::nullopt;
  }

  double sample(RandomStream& s) const {
    switch (kind) {
      case Kind::constant:
        return a;
      case Kind::bernoulli:
        return s.uniform() < p ? b : 0.0;
      case Kind::two_point:
        return s.uniform() < p ? a : b;
      case Kind::uniform:
        return a + (b - a) * s.uniform();
      case Kind::exponential:
        return -std::log1p(-s.uniform()) / a;
      case Kind::pareto:
        return a * std::pow(1.0 - s.uniform(), -1.0 / b);
      case Kind::shifted:
        return base->sample(s) + a;
      case Kind::negated:
        return -base->sample(s);
    }
    return 0.0;
  }

  std::string text() const {
    switch (kind) {
      case Kind::constant:
        return "constant(" + format_number(a) + ")";
      case Kind::bernoulli:
        if (b == 1.0) return "bernoulli(" + format_number(p) + ")";
        return "bernoulli(" + format_number(p) + "," + format_number(b) + ")";
      case Kind::two_point:
        return "two_point(" + format_number(a) + "," + format_number(p) + ";" + format_number(b) +
               "," + format_number(q) + ")";
      case Kind::uniform:
        return "uniform(" + format_number(a) + "," + format_number(b) + ")";
      case Kind::exponential:
        return "exponential(" + format_number(a) + ")";
      case Kind::pareto:
        return "pareto(" + format_number(a) + "," + format_number(b) + ")";
      case Kind::shifted:
        return "shifted(" + base->text() + "," + format_number(a) + ")";
      case Kind::negated:
        return "negated(" + base->text() + ")";
    }
    return {};
  }
};

namespace {

template <class Node, class Kind>
std::shared_ptr<const Node> node_of(Kind kind, double a = 0.0, double b = 0.0, double p = 0.0, double q = 0.0,
                                    std::shared_ptr<const Node> base = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->a = a;
  n->b = b;
  n->p = p;
  n->q = q;
  n->base = std::move(base);
  return n;
}

}  // namespace

Distribution Distribution::constant(double a) {
  require_finite(a, "constant: value");
  return Distribution(node_of<Node>(Kind::constant, a));
}

Distribution Distribution::bernoulli(double p, double scale) {
  require_finite(p, "bernoulli: p");
  require_finite(scale, "bernoulli: scale");
  if (p < 0.0 || p > 1.0) throw ParameterError("bernoulli: p must lie in [0,1], got " + format_number(p));
  return Distribution(node_of<Node>(Kind::bernoulli, 0.0, scale, p));
}

Distribution Distribution::two_point(double a, double p, double b, double q) {
  require_finite(a, "two_point: first atom");
  require_finite(b, "two_point: second atom");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("two_point: p must lie in [0,1], got " + format_number(p));
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("two_point: q must lie in [0,1], got " + format_number(q));
  if (std::abs(p + q - 1.0) > 1e-12) {
    throw ParameterError("two_point: probabilities must sum to 1, got " + format_number(p) + " + " +
                         format_number(q));
  }
  return Distribution(node_of<Node>(Kind::two_point, a, b, p, q));
}

Distribution Distribution::uniform(double a, double b) {
  require_finite(a, "uniform: a");
  require_finite(b, "uniform: b");
  if (!(a < b)) throw ParameterError("uniform: need a < b, got a=" + format_number(a) + " b=" + format_number(b));
  return Distribution(node_of<Node>(Kind::uniform, a, b));
}

Distribution Distribution::exponential(double rate) {
  require_finite(rate, "exponential: rate");
  if (!(rate > 0.0)) throw ParameterError("exponential: rate must be > 0, got " + format_number(rate));
  return Distribution(node_of<Node>(Kind::exponential, rate));
}

Distribution Distribution::pareto(double xm, double alpha) {
  require_finite(xm, "pareto: xm");
  require_finite(alpha, "pareto: alpha");
  if (!(xm > 0.0)) throw ParameterError("pareto: xm must be > 0, got " + format_number(xm));
  if (!(alpha > 0.0)) throw ParameterError("pareto: alpha must be > 0, got " + format_number(alpha));
  return Distribution(node_of<Node>(Kind::pareto, xm, alpha));
}

Distribution Distribution::shifted(const Distribution& base, double offset) {
  require_finite(offset, "shifted: offset");
  return Distribution(node_of<Node>(Kind::shifted, offset, 0.0, 0.0, 0.0, base.node_));
}

Distribution Distribution::negated(const Distribution& base) {
  return Distribution(node_of<Node>(Kind::negated, 0.0, 0.0, 0.0, 0.0, base.node_));
}

Distribution::Kind Distribution::kind() const { return node_->kind; }
std::string Distribution::to_string() const { return node_->text(); }
double Distribution::sample(RandomStream& stream) const { return node_->sample(stream); }
double Distribution::raw_moment(int k) const {
  if (k < 0 || k > 3) throw ParameterError("raw_moment: order must lie in 0..3");
  return node_->full_moment(k);
}
double Distribution::partial_moment(int k, double t, Tail tail) const {
  if (k < 0 || k > 3) throw ParameterError("partial_moment: order must lie in 0..3");
  return tail == Tail::above ? node_->above(k, t) : node_->below(k, t);
}
double Distribution::atom_mass(double x) const { return node_->atom(x); }
double Distribution::cdf(double x) const { return std::clamp(node_->below(0, x) + node_->atom(x), 0.0, 1.0); }
double Distribution::support_min() const { return node_->support_min(); }
double Distribution::support_max() const { return node_->support_max(); }
std::optional<std::vector<Atom>> Distribution::atoms() const { return node_->atoms(); }
double Distribution::mean() const { return node_->full_moment(1); }

std::optional<double> Distribution::constant_value() const {
  auto at = atoms();
  if (at && at->size() == 1) return at->front().value;
  return std::nullopt;
}

Moments Distribution::moments() const {
  Moments m;
  m.mean = node_->full_moment(1);
  m.second_moment = node_->full_moment(2);
  m.third_moment = node_->full_moment(3);
  m.mean_pos_sq = node_->above(2, 0.0);
  if (std::isinf(m.second_moment) || std::isinf(m.mean)) {
    m.var = kInf;
  } else {
    m.var = std::max(0.0, m.second_moment - m.mean * m.mean);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class SpecParser {
 public:
  explicit SpecParser(std::string_view text) : text_(text) {}

  Distribution parse_all() {
    Distribution d = parse_spec();
    skip_ws();
    if (pos_ != text_.size()) fail("spec", "unexpected trailing input");
    return d;
  }

 private:
  [[noreturn]] void fail(const std::string& production, const std::string& what) const {
    std::ostringstream os;
    os << "malformed distribution spec '" << text_ << "' at offset " << pos_ << ": production <"
       << production << ">: " << what;
    throw ParseError(os.str());
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c, const std::string& production) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(production, std::string("expected '") + c + "'");
    ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  double number(const std::string& production) {
    skip_ws();
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    if (first != last && *first == '+') ++first;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) fail(production, "expected a number");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return value;
  }

  template <class F>
  Distribution build(const std::string& production, F&& f) {
    try {
      return f();
    } catch (const ParameterError& e) {
      fail(production, e.what());
    }
  }

  Distribution parse_spec() {
    const std::string name = identifier();
    if (name.empty()) fail("spec", "expected a distribution name");
    expect('(', name);
    if (name == "constant") {
      double a = number("constant");
      expect(')', "constant");
      return build(name, [&] { return Distribution::constant(a); });
    }
    if (name == "bernoulli") {
      double p = number("bernoulli");
      double scale = 1.0;
      if (accept(',')) scale = number("bernoulli");
      expect(')', "bernoulli");
      return build(name, [&] { return Distribution::bernoulli(p, scale); });
    }
    if (name == "two_point") {
      double a = number("two_point");
      expect(',', "two_point");
      double p = number("two_point");
      expect(';', "two_point");
      double b = number("two_point");
      expect(',', "two_point");
      double q = number("two_point");
      expect(')', "two_point");
      return build(name, [&] { return Distribution::two_point(a, p, b, q); });
    }
    if (name == "uniform") {
      double a = number("uniform");
      expect(',', "uniform");
      double b = number("uniform");
      expect(')', "uniform");
      return build(name, [&] { return Distribution::uniform(a, b); });
    }
    if (name == "exponential") {
      double r = number("exponential");
      expect(')', "exponential");
      return build(name, [&] { return Distribution::exponential(r); });
    }
    if (name == "pareto") {
      double xm = number("pareto");
      expect(',', "pareto");
      double alpha = number("pareto");
      expect(')', "pareto");
      return build(name, [&] { return Distribution::pareto(xm, alpha); });
    }
    if (name == "shifted") {
      Distribution base = parse_spec();
      expect(',', "shifted");
      double offset = number("shifted");
      expect(')', "shifted");
      return build(name, [&] { return Distribution::shifted(base, offset); });
    }
    if (name == "negated") {
      Distribution base = parse_spec();
      expect(')', "negated");
      return Distribution::negated(base);
    }
    fail("spec", "unknown distribution '" + name + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Distribution Distribution::parse(std::string_view text) { return SpecParser(text).parse_all(); }

// ---------------------------------------------------------------------------
// Assumption sets

std::string to_string(AssumptionSet s) { return s == AssumptionSet::A ? "A" : "B"; }

AssumptionReport check_assumptions(const Distribution& du, const Distribution& dv, AssumptionSet which) {
  AssumptionReport report;
  report.assumption_set = which;
  auto clause = [&](bool ok, std::string name, double value) {
    if (!ok) report.violated_clauses.push_back({std::move(name), value});
  };

  const double v_neg_mass = dv.partial_moment(0, 0.0, Tail::below);
  const double u_mean = du.mean();

  if (which == AssumptionSet::A) {
    clause(v_neg_mass == 0.0, "P(v >= 0) = 1", 1.0 - v_neg_mass);
    const double v_mean = dv.mean();
    clause(v_mean < kInf, "E[v] < inf", v_mean);
    clause(u_mean > 0.0, "E[u] > 0", u_mean);
    const double pos_sq = du.partial_moment(2, 0.0, Tail::above);
    clause(pos_sq < kInf, "E[max(0,u)^2] < inf", pos_sq);
  } else {
    const double u_neg_mass = du.partial_moment(0, 0.0, Tail::below);
    clause(u_neg_mass == 0.0, "P(u >= 0) = 1", 1.0 - u_neg_mass);
    clause(v_neg_mass == 0.0, "P(v >= 0) = 1", 1.0 - v_neg_mass);
    const double v_sq = dv.raw_moment(2);
    clause(v_sq < kInf, "E[v^2] < inf", v_sq);
    clause(u_mean > 0.0, "E[u] > 0", u_mean);
    const double u_cube = du.raw_moment(3);
    clause(u_cube < kInf, "E[u^3] < inf", u_cube);
  }
  report.satisfied = report.violated_clauses.empty();
  return report;
}

void require_assumptions(const Distribution& du, const Distribution& dv, AssumptionSet which) {
  const auto report = check_assumptions(du, dv, which);
  if (report.satisfied) return;
  std::ostringstream os;
  os << "assumption set (" << to_string(which) << ") violated for u=" << du.to_string()
     << ", v=" << dv.to_string() << ":";
  for (const auto& f : report.violated_clauses) os << " [" << f.clause << "; computed " << f.value << "]";
  throw AssumptionError(os.str());
}

}  // namespace sog
