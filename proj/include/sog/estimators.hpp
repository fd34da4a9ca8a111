#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sog/graph.hpp"

namespace sog {

enum class EstimatorMethod { plug_in, regenerative };
enum class EstimateTarget { C, C0, b2, gamma, lambda };
enum class CycleKind { none, skeleton, renewal };

std::string to_string(EstimatorMethod m);
std::string to_string(EstimateTarget t);
std::string to_string(CycleKind k);
EstimatorMethod parse_estimator_method(const std::string& s);

struct EstimateReport {
  EstimateTarget target = EstimateTarget::C;
  double estimate = 0.0;
  double std_error = 0.0;
  EstimatorMethod method = EstimatorMethod::plug_in;
  std::int64_t n = 0;
  ModelParams params;
  double c = 0.0;  // renewal level, 0 when no renewal cycles were used
  std::int64_t reps = 0;
  std::int64_t margin = 0;
  std::int64_t cycles_used = 0;
  CycleKind cycle_kind = CycleKind::none;
  double mean_cycle_length = 0.0;
  // b2 only: b2 / mean cycle length, the variance of W_{0,n} per unit of n.
  double per_unit_variance = 0.0;
};

nlohmann::json to_json(const EstimateReport& r);
std::string estimate_csv_header();
std::string to_csv_row(const EstimateReport& r);

struct RegenerativeOptions {
  std::optional<double> c;             // renewal level; suggest_c(...) when absent
  std::optional<std::int64_t> margin;  // boundary exclusion; n / 8 when absent
  std::int64_t bootstrap = 1000;
  unsigned threads = 0;
};

// Cycles (W between consecutive regeneration points, their spacing) pooled over
// replications in replication order.
struct CycleSample {
  CycleKind kind = CycleKind::none;
  double c = 0.0;
  std::int64_t margin = 0;
  std::vector<double> weight;
  std::vector<double> length;
};

// Skeleton cycles apply when u is a.s. constant and v = 0; renewal cycles otherwise.
bool uses_skeleton_cycles(const ModelParams& params);

CycleSample collect_cycles(std::int64_t n, const ModelParams& params, std::int64_t reps,
                           const RegenerativeOptions& opts);

// sum(weight) / sum(length) with its delta-method standard error.
struct RatioEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double mean_length = 0.0;
};
RatioEstimate ratio_estimate(const std::vector<double>& weight, const std::vector<double>& length);

// W_{0,n} (clipped at 0) for one window; exact edge counts when u is constant and v = 0.
double clipped_total_weight(std::int64_t n, const ModelParams& params);

EstimateReport estimate_growth_constant(std::int64_t n, const ModelParams& params, std::int64_t reps,
                                        EstimatorMethod method, const RegenerativeOptions& opts = {});

struct SeriesValue {
  double value = 0.0;
  double remainder_scale = 0.0;  // q^5, an order-of-magnitude indicator, not a bound
  bool accuracy_caveat = false;  // set for q > 0.2
};
// 1 - q + q^2 - 3 q^3 + 7 q^4, the small-q expansion of C0(1 - q).
SeriesValue series_c0(double q);

EstimateReport estimate_clt_variance(std::int64_t n, const ModelParams& params, std::int64_t reps,
                                     const RegenerativeOptions& opts = {});

struct CltRow {
  std::int64_t n = 0;
  std::int64_t reps = 0;
  bool degenerate = false;
  double c_hat = 0.0;
  double b2_hat = 0.0;
  double per_unit_variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double ks_normal = 0.0;  // sup distance of the standardised sample to N(0, 1)
};

// For each n: W_{0,n} over reps windows, standardised by (W - C n) / sqrt(n b2 / mean cycle length)
// with C and b2 estimated from the cycles of the same windows.
std::vector<CltRow> clt_diagnostic(const std::vector<std::int64_t>& n_grid, const ModelParams& params,
                                   std::int64_t reps, const RegenerativeOptions& opts = {});

nlohmann::json to_json(const CltRow& row);

}  // namespace sog
