#include "sog/stats.hpp"

#include <algorithm>
#include <cmath>

#include "sog/errors.hpp"

namespace sog {

SampleSummary summarize(std::span<const double> xs) {
  SampleSummary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    ++k;
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  s.mean = mean;
  if (s.count > 1) {
    s.var = std::max(0.0, m2 / static_cast<double>(s.count - 1));
    s.sd = std::sqrt(s.var);
    s.std_error = s.sd / std::sqrt(static_cast<double>(s.count));
  }
  return s;
}

namespace {

struct Central {
  double m2 = 0, m3 = 0, m4 = 0;
};

Central central_moments(std::span<const double> xs) {
  Central c;
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  for (double x : xs) {
    const double d = x - mean;
    const double d2 = d * d;
    c.m2 += d2;
    c.m3 += d2 * d;
    c.m4 += d2 * d2;
  }
  c.m2 /= n;
  c.m3 /= n;
  c.m4 /= n;
  return c;
}

}  // namespace

double skewness(std::span<const double> xs) {
  if (xs.size() < 3) throw DegenerateSampleError("skewness needs at least 3 values");
  const auto c = central_moments(xs);
  if (c.m2 <= 0.0) throw DegenerateSampleError("skewness of a constant sample");
  return c.m3 / std::pow(c.m2, 1.5);
}

double excess_kurtosis(std::span<const double> xs) {
  if (xs.size() < 4) throw DegenerateSampleError("kurtosis needs at least 4 values");
  const auto c = central_moments(xs);
  if (c.m2 <= 0.0) throw DegenerateSampleError("kurtosis of a constant sample");
  return c.m4 / (c.m2 * c.m2) - 3.0;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_normal(std::span<const double> xs) {
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double f = normal_cdf(s[k]);
    d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DegenerateSampleError("two-sample KS needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha) {
  double c = 0.0;
  if (alpha == 0.10) {
    c = 1.224;
  } else if (alpha == 0.05) {
    c = 1.358;
  } else if (alpha == 0.01) {
    c = 1.628;
  } else {
    c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  }
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

double lag1_autocorrelation(std::span<const double> xs) {
  if (xs.size() < 3) throw DegenerateSampleError("autocorrelation needs at least 3 values");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double d = xs[k] - mean;
    den += d * d;
    if (k + 1 < xs.size()) num += d * (xs[k + 1] - mean);
  }
  if (den <= 0.0) throw DegenerateSampleError("autocorrelation of a constant sample");
  return num / den;
}

}  // namespace sog
