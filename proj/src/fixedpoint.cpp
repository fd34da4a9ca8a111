#include "sog/fixedpoint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>

#include "sog/cascade.hpp"
#include "sog/errors.hpp"
#include "sog/parallel.hpp"

namespace sog {

namespace {

constexpr char kMagic[8] = {'S', 'O', 'G', 'F', 'T', 'W', '0', '1'};

std::int64_t grid_steps(double extent, double step, const char* what) {
  const double ratio = extent / step;
  const auto steps = static_cast<std::int64_t>(std::llround(ratio));
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio)) {
    throw ParameterError(std::string(what) + " must be a positive multiple of its step");
  }
  return steps;
}

// Lattice law of u: mass[m] = P(u lumped to m dw).
struct LatticeLaw {
  std::vector<double> mass;
  std::string quadrature;
};

LatticeLaw lattice_law(const Distribution& du, double dw, std::int64_t K) {
  LatticeLaw law;
  if (auto atoms = du.atoms()) {
    law.quadrature = "atoms";
    std::int64_t top = 0;
    std::vector<std::pair<std::int64_t, double>> cells;
    for (const auto& a : *atoms) {
      const auto m = static_cast<std::int64_t>(std::llround(a.value / dw));
      if (m < 1 || std::abs(static_cast<double>(m) * dw - a.value) > 1e-9 * std::max(1.0, std::abs(a.value))) {
        throw GridMismatchError("atom " + std::to_string(a.value) + " of u is not a positive multiple of dw = " +
                                std::to_string(dw));
      }
      cells.emplace_back(m, a.prob);
      top = std::max(top, m);
    }
    law.mass.assign(static_cast<std::size_t>(std::min(top, K + 1) + 1), 0.0);
    for (auto [m, prob] : cells) {
      if (m <= K + 1) law.mass[static_cast<std::size_t>(m)] += prob;
    }
    return law;
  }
  law.quadrature = "midpoint-lattice";
  law.mass.assign(static_cast<std::size_t>(K + 2), 0.0);
  law.mass[0] = du.cdf(0.5 * dw);
  for (std::int64_t m = 1; m <= K + 1; ++m) {
    law.mass[static_cast<std::size_t>(m)] =
        du.cdf((static_cast<double>(m) + 0.5) * dw) - du.cdf((static_cast<double>(m) - 0.5) * dw);
  }
  return law;
}

FixedPointGrid march(const Distribution& du, std::int64_t J, std::int64_t K, double dt, double dw) {
  FixedPointGrid g;
  g.du = du;
  g.dt = dt;
  g.dw = dw;
  g.steps_t = J;
  g.steps_w = K;
  const LatticeLaw law = lattice_law(du, dw, K);
  g.quadrature = law.quadrature;
  const auto width = static_cast<std::size_t>(K + 1);
  g.G.assign(static_cast<std::size_t>(J + 1) * width, 0.0);
  for (std::size_t k = 1; k < width; ++k) g.G[k] = 1.0;

  const double m0 = law.mass[0];
  // h(k) = E_u[1 - G(s, w_k - u)] from the current row, excluding the u-cell at 0.
  auto h_rest = [&](const double* row, std::size_t k) {
    double s = 1.0;
    const std::size_t top = std::min(k - 1, law.mass.size() - 1);
    for (std::size_t m = 1; m <= top; ++m) s -= law.mass[m] * row[k - m];
    return s;
  };
  std::vector<double> integral(width, 0.0);
  std::vector<double> h_prev(width, 1.0);
  for (std::size_t k = 1; k < width; ++k) h_prev[k] = h_rest(g.G.data(), k) - m0 * g.G[k];

  for (std::int64_t j = 1; j <= J; ++j) {
    double* row = g.G.data() + static_cast<std::size_t>(j) * width;
    const double* prev = row - width;
    for (std::size_t k = 1; k < width; ++k) {
      const double rest = h_rest(row, k);
      const double base = integral[k] + 0.5 * dt * (h_prev[k] + rest);
      double value = prev[k];
      if (m0 > 0.0) {
        for (int pass = 0; pass < 2; ++pass) value = std::exp(-(base - 0.5 * dt * m0 * value));
      } else {
        value = std::exp(-base);
      }
      row[k] = value;
      const double h_now = rest - m0 * value;
      integral[k] += 0.5 * dt * (h_prev[k] + h_now);
      h_prev[k] = h_now;
    }
  }
  return g;
}

bool atoms_fit(const Distribution& du, double dw) {
  const auto atoms = du.atoms();
  if (!atoms) return true;
  return std::all_of(atoms->begin(), atoms->end(), [&](const Atom& a) {
    const double m = std::round(a.value / dw);
    return m >= 1 && std::abs(m * dw - a.value) <= 1e-9 * std::max(1.0, std::abs(a.value));
  });
}

// |fine - coarse| at the fine node (j, k), j even so that t_j is a coarse node;
// the farther of the two coarse neighbours in w when w falls between them.
double coarse_deviation(const FixedPointGrid& fine, const FixedPointGrid& coarse, std::int64_t j, std::int64_t k,
                        std::int64_t w_ratio) {
  const std::int64_t jc = j / 2;
  auto coarse_at = [&](std::int64_t kc) { return coarse.at(jc, std::clamp<std::int64_t>(kc, 0, coarse.steps_w)); };
  const double f = fine.at(j, k);
  // Fine w_k = (k - 1) dw; coarse w_kc = (kc - 1) w_ratio dw.
  const std::int64_t offset = k - 1 + w_ratio;
  if (offset % w_ratio == 0) return std::abs(f - coarse_at(offset / w_ratio));
  const std::int64_t lo = offset / w_ratio;
  return std::max(std::abs(f - coarse_at(lo)), std::abs(f - coarse_at(lo + 1)));
}

}  // namespace

std::int64_t FixedPointGrid::t_index(double t) const {
  const double r = t / dt;
  const auto j = static_cast<std::int64_t>(std::llround(r));
  if (j < 0 || j > steps_t || std::abs(r - static_cast<double>(j)) > 1e-7) {
    throw ParameterError("t = " + std::to_string(t) + " is not a grid node");
  }
  return j;
}

std::int64_t FixedPointGrid::w_index(double w) const {
  const double r = w / dw + 1.0;
  const auto k = static_cast<std::int64_t>(std::llround(r));
  if (k < 0 || k > steps_w || std::abs(r - static_cast<double>(k)) > 1e-7) {
    throw ParameterError("w = " + std::to_string(w) + " is not a grid node");
  }
  return k;
}

FixedPointGrid solve_ftw(const Distribution& du, double t_max, double w_max, double dt, double dw,
                         const SolveOptions& opts) {
  if (!(dt > 0.0) || !(dw > 0.0)) throw ParameterError("grid steps must be > 0");
  if (!(t_max > 0.0) || !(w_max > 0.0)) throw ParameterError("t_max and w_max must be > 0");
  if (du.cdf(0.0) > 0.0) throw AssumptionError("u must be supported on (0, inf); P(u <= 0) > 0");
  const auto J = grid_steps(t_max, dt, "t_max");
  const auto K = grid_steps(w_max, dw, "w_max") + 1;
  FixedPointGrid g = march(du, J, K, dt, dw);
  g.bound.assign(g.G.size(), 0.0);
  if (!opts.error_bound) return g;

  const std::int64_t w_ratio = atoms_fit(du, 2.0 * dw) ? 2 : 1;
  const std::int64_t Jc = std::max<std::int64_t>(1, (J + 1) / 2);
  const std::int64_t Kc = (K - 1 + w_ratio - 1) / w_ratio + 1;
  const FixedPointGrid coarse = march(du, Jc, Kc, 2.0 * dt, static_cast<double>(w_ratio) * dw);
  auto cell = [&](std::int64_t j, std::int64_t k) -> double& { return g.bound[static_cast<std::size_t>(j * (K + 1) + k)]; };
  for (std::int64_t j = 0; j <= J; j += 2) {
    for (std::int64_t k = 0; k <= K; ++k) cell(j, k) = coarse_deviation(g, coarse, j, k, w_ratio);
  }
  // Odd rows have no coarse counterpart; they take the envelope of their even neighbours.
  for (std::int64_t j = 1; j <= J; j += 2) {
    for (std::int64_t k = 0; k <= K; ++k) cell(j, k) = std::max(cell(j - 1, k), j + 1 <= J ? cell(j + 1, k) : 0.0);
  }
  return g;
}

ValidationReport mc_validate_ftw(const FixedPointGrid& grid, const std::vector<Checkpoint>& checkpoints,
                                 std::int64_t reps, std::uint64_t seed, unsigned threads) {
  if (reps < 10'000) throw ParameterError("validation needs reps >= 10000");
  std::map<std::int64_t, std::vector<std::size_t>> by_t;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const auto j = grid.t_index(checkpoints[i].t);
    (void)grid.w_index(checkpoints[i].w);
    by_t[j].push_back(i);
  }
  ValidationReport report;
  report.reps = reps;
  report.points.resize(checkpoints.size());
  const Distribution zero = Distribution::constant(0.0);
  const StreamKey root = StreamKey(seed).child(Role::validation);
  for (const auto& [j, members] : by_t) {
    const double t = grid.t(j);
    std::vector<double> w_tilde(static_cast<std::size_t>(reps), 0.0);
    if (j > 0) {
      w_tilde = parallel_map(
          static_cast<std::size_t>(reps),
          [&](std::size_t r) {
            return simulate_ccm0(grid.du, zero, t, root.child(static_cast<std::uint64_t>(j)).child(r).value()).w_tilde;
          },
          threads);
    }
    for (auto i : members) {
      const auto& c = checkpoints[i];
      const auto k = grid.w_index(c.w);
      const auto exceed = std::count_if(w_tilde.begin(), w_tilde.end(), [&](double x) { return x > grid.w(k); });
      ValidationPoint p;
      p.t = t;
      p.w = grid.w(k);
      p.F_grid = grid.tail(j, k);
      p.F_mc = static_cast<double>(exceed) / static_cast<double>(reps);
      const double f = std::max(p.F_mc * (1.0 - p.F_mc), p.F_grid * (1.0 - p.F_grid));
      p.mc_std_error = std::sqrt(f / static_cast<double>(reps));
      p.solver_bound = grid.bound_at(j, k);
      p.deviation = std::abs(p.F_mc - p.F_grid);
      p.tolerance = 3.0 * p.mc_std_error + p.solver_bound;
      p.pass = p.deviation <= p.tolerance;
      report.points[i] = p;
      report.max_abs_dev = std::max(report.max_abs_dev, p.deviation);
      report.all_pass = report.all_pass && p.pass;
    }
  }
  return report;
}

nlohmann::json to_json(const ValidationReport& r) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : r.points) {
    points.push_back({{"t", p.t},
                      {"w", p.w},
                      {"F_grid", p.F_grid},
                      {"F_mc", p.F_mc},
                      {"mc_stderr", p.mc_std_error},
                      {"solver_bound", p.solver_bound},
                      {"deviation", p.deviation},
                      {"tolerance", p.tolerance},
                      {"pass", p.pass}});
  }
  return {{"max_abs_dev", r.max_abs_dev}, {"all_pass", r.all_pass}, {"reps", r.reps}, {"points", std::move(points)}};
}

void write_grid_csv(const FixedPointGrid& g, std::ostream& out) {
  out << "t,w,F\n";
  char buf[64];
  for (std::int64_t j = 0; j <= g.steps_t; ++j) {
    for (std::int64_t k = 0; k <= g.steps_w; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", g.t(j));
      out << buf << ',';
      std::snprintf(buf, sizeof buf, "%.17g", g.w(k));
      out << buf << ',';
      std::snprintf(buf, sizeof buf, "%.17g", g.tail(j, k));
      out << buf << '\n';
    }
  }
}

namespace {

void put_u64(std::ostream& out, std::uint64_t x) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw ParseError("truncated grid file");
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return x;
}

}  // namespace

void write_grid_binary(const FixedPointGrid& g, std::ostream& out) {
  const nlohmann::json header{{"rows", g.steps_t + 1},
                              {"cols", g.steps_w + 1},
                              {"dt", g.dt},
                              {"dw", g.dw},
                              {"w0", -g.dw},
                              {"du", g.du.to_string()},
                              {"quadrature", g.quadrature},
                              {"matrices", {"G", "bound"}},
                              {"dtype", "float64-le"}};
  const std::string text = header.dump();
  out.write(kMagic, sizeof kMagic);
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double x : g.G) put_u64(out, std::bit_cast<std::uint64_t>(x));
  for (double x : g.bound) put_u64(out, std::bit_cast<std::uint64_t>(x));
}

FixedPointGrid read_grid_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw ParseError("not a SOGFTW01 grid file");
  const auto length = get_u64(in);
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) throw ParseError("truncated grid header");
  const auto header = nlohmann::json::parse(text);
  FixedPointGrid g;
  g.steps_t = header.at("rows").get<std::int64_t>() - 1;
  g.steps_w = header.at("cols").get<std::int64_t>() - 1;
  g.dt = header.at("dt").get<double>();
  g.dw = header.at("dw").get<double>();
  g.du = Distribution::parse(header.at("du").get<std::string>());
  g.quadrature = header.at("quadrature").get<std::string>();
  const auto cells = static_cast<std::size_t>((g.steps_t + 1) * (g.steps_w + 1));
  g.G.resize(cells);
  g.bound.resize(cells);
  for (auto& x : g.G) x = std::bit_cast<double>(get_u64(in));
  for (auto& x : g.bound) x = std::bit_cast<double>(get_u64(in));
  return g;
}

}  // namespace sog
