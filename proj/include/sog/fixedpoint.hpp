#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "sog/distribution.hpp"

namespace sog {

// G(t_j, w_k) = P(W~_{t_j} <= w_k) on t_j = j dt (j = 0..J) and w_k = (k - 1) dw
// (k = 0..K), so w_0 = -dw and w_1 = 0.
struct FixedPointGrid {
  Distribution du = Distribution::constant(1.0);
  double dt = 0.0;
  double dw = 0.0;
  std::int64_t steps_t = 0;  // J
  std::int64_t steps_w = 0;  // K
  std::string quadrature;    // "atoms" or "midpoint-lattice"
  std::vector<double> G;     // row-major, (J + 1) x (K + 1)
  std::vector<double> bound; // |G - G_coarse| against a re-solve at (2 dt, 2 dw), same layout

  [[nodiscard]] double t(std::int64_t j) const { return static_cast<double>(j) * dt; }
  [[nodiscard]] double w(std::int64_t k) const { return static_cast<double>(k - 1) * dw; }
  [[nodiscard]] double at(std::int64_t j, std::int64_t k) const {
    return G[static_cast<std::size_t>(j * (steps_w + 1) + k)];
  }
  [[nodiscard]] double tail(std::int64_t j, std::int64_t k) const { return 1.0 - at(j, k); }
  [[nodiscard]] double bound_at(std::int64_t j, std::int64_t k) const {
    return bound[static_cast<std::size_t>(j * (steps_w + 1) + k)];
  }

  // Grid indices of (t, w); throws ParameterError when either is off the grid.
  [[nodiscard]] std::int64_t t_index(double t) const;
  [[nodiscard]] std::int64_t w_index(double w) const;

  // F(t, w) = P(W~_t > w) at grid nodes.
  [[nodiscard]] double F(double t, double w) const { return tail(t_index(t), w_index(w)); }
  [[nodiscard]] double F_bound(double t, double w) const { return bound_at(t_index(t), w_index(w)); }
};

struct SolveOptions {
  bool error_bound = true;  // also solve at (2 dt, 2 dw) and fill `bound`
};

// Time-marches G(t, w) = exp(-int_0^t E_u[1 - G(s, w - u)] ds) with the trapezoid rule.
// Discrete u needs atoms on multiples of dw (GridMismatchError otherwise); continuous u
// is lumped to the lattice by midpoint cells.
FixedPointGrid solve_ftw(const Distribution& du, double t_max, double w_max, double dt, double dw,
                         const SolveOptions& opts = {});

struct Checkpoint {
  double t = 0.0;
  double w = 0.0;
};

struct ValidationPoint {
  double t = 0.0;
  double w = 0.0;
  double F_grid = 0.0;
  double F_mc = 0.0;
  double mc_std_error = 0.0;
  double solver_bound = 0.0;
  double deviation = 0.0;
  double tolerance = 0.0;  // 3 mc_std_error + solver_bound
  bool pass = true;
};

struct ValidationReport {
  double max_abs_dev = 0.0;
  bool all_pass = true;
  std::int64_t reps = 0;
  std::vector<ValidationPoint> points;
};

// Monte Carlo estimate of F at each checkpoint from simulate_ccm0 (v = 0, horizon t).
// Checkpoints sharing a t reuse the same replications.
ValidationReport mc_validate_ftw(const FixedPointGrid& grid, const std::vector<Checkpoint>& checkpoints,
                                 std::int64_t reps, std::uint64_t seed, unsigned threads = 0);

nlohmann::json to_json(const ValidationReport& r);

void write_grid_csv(const FixedPointGrid& g, std::ostream& out);
// "SOGFTW01", u64 header length, JSON header, then F as little-endian float64, row-major.
void write_grid_binary(const FixedPointGrid& g, std::ostream& out);
FixedPointGrid read_grid_binary(std::istream& in);

}  // namespace sog
