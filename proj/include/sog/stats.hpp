#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sog {

struct SampleSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double var = 0.0;  // unbiased, 0 for fewer than two values
  double sd = 0.0;
  double std_error = 0.0;  // sd / sqrt(count)
};

SampleSummary summarize(std::span<const double> xs);

double skewness(std::span<const double> xs);
double excess_kurtosis(std::span<const double> xs);

double normal_cdf(double x);

// sup_x |F_n(x) - Phi(x)|
double ks_normal(std::span<const double> xs);

// sup_x |F_a(x) - F_b(x)|
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Asymptotic critical value c(alpha) * sqrt((n + m) / (n m)); alpha in {0.10, 0.05, 0.01}.
double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha = 0.05);

// Lag-1 sample autocorrelation.
double lag1_autocorrelation(std::span<const double> xs);

}  // namespace sog
