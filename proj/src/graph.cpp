#include "sog/graph.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "sog/errors.hpp"

namespace sog {

namespace {

std::uint64_t bits_of(double x) { return std::bit_cast<std::uint64_t>(x); }

void check_p(double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << "edge probability p must lie in (0, 1], got " << p;
    throw ParameterError(os.str());
  }
}

}  // namespace

std::string to_string(GenerationMode m) { return m == GenerationMode::dense ? "dense" : "sparse"; }

GenerationMode parse_generation_mode(const std::string& s) {
  if (s == "dense") return GenerationMode::dense;
  if (s == "sparse") return GenerationMode::sparse;
  throw ParameterError("generation mode must be 'dense' or 'sparse', got '" + s + "'");
}

EdgeLaw::EdgeLaw(double p, StreamKey key) : p_(p), key_(key) {
  check_p(p);
  const double log_miss = std::log1p(-p);
  for (int l = 0; l <= kDepth; ++l) {
    q_[l] = p == 1.0 ? 1.0 : -std::expm1(std::ldexp(log_miss, l));
  }
  q_[0] = p;
  ratio_[0] = 1.0;
  for (int l = 1; l <= kDepth; ++l) ratio_[l] = q_[l - 1] / q_[l];
}

std::uint64_t EdgeLaw::source_key(std::int64_t i) const {
  return key_.child(static_cast<std::uint64_t>(i)).value();
}

bool EdgeLaw::root_nonempty(std::uint64_t src) const {
  if (q_[kDepth] == 1.0) return true;
  const std::uint64_t base = mix64(src ^ (static_cast<std::uint64_t>(kDepth) << 58));
  return to_unit(mix64(base + 3)) < q_[kDepth];
}

EdgeLaw::Split EdgeLaw::split(std::uint64_t src, int level, std::uint64_t index) const {
  const double qc = q_[level - 1];
  if (qc == 1.0) return {true, true};
  const std::uint64_t base = mix64(src ^ ((static_cast<std::uint64_t>(level) << 58) | index));
  const bool left = to_unit(mix64(base + 1)) < ratio_[level];
  const bool right = left ? to_unit(mix64(base + 2)) < qc : true;
  return {left, right};
}

bool EdgeLaw::has_edge(std::int64_t i, std::int64_t j) const {
  if (j <= i) return false;
  const auto leaf = static_cast<std::uint64_t>(j - i - 1);
  if (leaf >> kDepth) throw ParameterError("edge offset exceeds the supported range");
  const std::uint64_t src = source_key(i);
  if (!root_nonempty(src)) return false;
  for (int l = kDepth; l >= 1; --l) {
    const Split s = split(src, l, leaf >> l);
    const bool go_right = (leaf >> (l - 1)) & 1U;
    if (!(go_right ? s.right : s.left)) return false;
  }
  return true;
}

WindowModel::WindowModel(std::int64_t n, const ModelParams& params, GenerationMode mode)
    : n_(n), params_(params), mode_(mode) {
  if (n < 1) throw ParameterError("window size n must be >= 1");
  if (n >= (std::int64_t{1} << 31) - 1) throw ParameterError("window size n too large");
  check_p(params.p);
  const StreamKey root(params.seed);
  law_ = EdgeLaw(params.p, root.child(Role::edges));
  edge_weight_key_ = root.child(Role::edge_weight);
  vertex_weight_key_ = root.child(Role::vertex_weight);
  u_const_ = params.du.constant_value();
  v_const_ = params.dv.constant_value();
}

double WindowModel::edge_weight(std::int64_t i, std::int64_t j) const {
  if (u_const_) return *u_const_;
  RandomStream s(edge_weight_key_.child(static_cast<std::uint64_t>(i)).child(static_cast<std::uint64_t>(j)));
  return params_.du.sample(s);
}

double WindowModel::vertex_weight(std::int64_t i) const {
  if (v_const_) return *v_const_;
  RandomStream s(vertex_weight_key_.child(static_cast<std::uint64_t>(i)));
  return params_.dv.sample(s);
}

GraphWindow GraphWindow::from_edges(std::int64_t n, const ModelParams& params,
                                    std::vector<double> vertex_weights,
                                    std::vector<WeightedEdge> edges) {
  if (n < 1) throw ParameterError("window size n must be >= 1");
  if (n >= (std::int64_t{1} << 31) - 1) throw ParameterError("window size n too large");
  if (static_cast<std::int64_t>(vertex_weights.size()) != n + 1) {
    throw ParameterError("expected " + std::to_string(n + 1) + " vertex weights, got " +
                         std::to_string(vertex_weights.size()));
  }
  std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  GraphWindow w;
  w.n_ = n;
  w.params_ = params;
  w.vertex_weights_ = std::move(vertex_weights);
  w.offsets_.assign(static_cast<std::size_t>(n) + 2, 0);
  w.targets_.reserve(edges.size());
  w.weights_.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    if (!(0 <= e.i && e.i < e.j && e.j <= n)) {
      throw ParameterError("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                           ") violates 0 <= i < j <= n");
    }
    if (k > 0 && edges[k - 1].i == e.i && edges[k - 1].j == e.j) {
      throw ParameterError("duplicate edge (" + std::to_string(e.i) + "," + std::to_string(e.j) + ")");
    }
    ++w.offsets_[static_cast<std::size_t>(e.i) + 1];
    w.targets_.push_back(static_cast<std::int32_t>(e.j));
    w.weights_.push_back(e.u);
  }
  for (std::size_t k = 1; k < w.offsets_.size(); ++k) w.offsets_[k] += w.offsets_[k - 1];
  return w;
}

std::span<const std::int32_t> GraphWindow::out_targets(std::int64_t i) const {
  const auto b = offsets_[static_cast<std::size_t>(i)];
  const auto e = offsets_[static_cast<std::size_t>(i) + 1];
  return {targets_.data() + b, e - b};
}

std::span<const double> GraphWindow::out_weights(std::int64_t i) const {
  const auto b = offsets_[static_cast<std::size_t>(i)];
  const auto e = offsets_[static_cast<std::size_t>(i) + 1];
  return {weights_.data() + b, e - b};
}

bool GraphWindow::has_edge(std::int64_t i, std::int64_t j) const {
  if (i < 0 || j > n_ || i >= j) return false;
  auto t = out_targets(i);
  return std::binary_search(t.begin(), t.end(), static_cast<std::int32_t>(j));
}

double GraphWindow::edge_weight(std::int64_t i, std::int64_t j) const {
  if (i >= 0 && j <= n_ && i < j) {
    auto t = out_targets(i);
    auto it = std::lower_bound(t.begin(), t.end(), static_cast<std::int32_t>(j));
    if (it != t.end() && *it == j) return out_weights(i)[static_cast<std::size_t>(it - t.begin())];
  }
  throw InvalidPathError("(" + std::to_string(i) + "," + std::to_string(j) + ") is not an edge of the window");
}

std::vector<WeightedEdge> GraphWindow::edges() const {
  std::vector<WeightedEdge> out;
  out.reserve(targets_.size());
  for (std::int64_t i = 0; i <= n_; ++i) {
    for_each_out_edge(i, n_, [&](std::int64_t j, double u) { out.push_back({i, j, u}); });
  }
  return out;
}

std::string GraphWindow::id() const {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(n_));
  auto feed = [&h](std::uint64_t x) { h = mix64(h ^ x); };
  feed(bits_of(params_.p));
  feed(params_.seed);
  for (char c : params_.du.to_string() + "|" + params_.dv.to_string()) feed(static_cast<unsigned char>(c));
  for (double v : vertex_weights_) feed(bits_of(v));
  for (auto o : offsets_) feed(o);
  for (auto t : targets_) feed(static_cast<std::uint64_t>(t));
  for (double u : weights_) feed(bits_of(u));
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

bool operator==(const GraphWindow& a, const GraphWindow& b) {
  auto same_bits = [](const std::vector<double>& x, const std::vector<double>& y) {
    return x.size() == y.size() &&
           (x.empty() || std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0);
  };
  return a.n_ == b.n_ && bits_of(a.params_.p) == bits_of(b.params_.p) && a.params_.seed == b.params_.seed &&
         a.params_.du == b.params_.du && a.params_.dv == b.params_.dv && a.offsets_ == b.offsets_ &&
         a.targets_ == b.targets_ && same_bits(a.weights_, b.weights_) &&
         same_bits(a.vertex_weights_, b.vertex_weights_);
}

GraphWindow materialize(const WindowModel& model) {
  const auto n = model.n();
  std::vector<double> vw(static_cast<std::size_t>(n) + 1);
  for (std::int64_t i = 0; i <= n; ++i) vw[static_cast<std::size_t>(i)] = model.vertex_weight(i);
  std::vector<WeightedEdge> edges;
  for (std::int64_t i = 0; i < n; ++i) {
    model.for_each_out_edge(i, n, [&](std::int64_t j, double u) { edges.push_back({i, j, u}); });
  }
  return GraphWindow::from_edges(n, model.params(), std::move(vw), std::move(edges));
}

GraphWindow generate_window(std::int64_t n, const ModelParams& params, GenerationMode mode) {
  return materialize(WindowModel(n, params, mode));
}

namespace {

template <class G>
std::optional<std::int64_t> first_left_impl(const G& g, std::int64_t j) {
  if (j < 1 || j > g.n()) {
    throw ParameterError("vertex j=" + std::to_string(j) + " outside [1, " + std::to_string(g.n()) + "]");
  }
  for (std::int64_t k = 1; k <= j; ++k) {
    if (g.has_edge(j - k, j)) return k;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::int64_t> first_left_connection(const GraphWindow& w, std::int64_t j) {
  return first_left_impl(w, j);
}

std::optional<std::int64_t> first_left_connection(const WindowModel& m, std::int64_t j) {
  return first_left_impl(m, j);
}

nlohmann::json to_json(const GraphWindow& w) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : w.edges()) edges.push_back({e.i, e.j, e.u});
  return {
      {"n", w.n()},
      {"p", w.p()},
      {"seed", w.seed()},
      {"du", w.params().du.to_string()},
      {"dv", w.params().dv.to_string()},
      {"edges", std::move(edges)},
      {"vertex_weights", w.vertex_weights()},
  };
}

GraphWindow window_from_json(const nlohmann::json& doc) {
  try {
    ModelParams params;
    const auto n = doc.at("n").get<std::int64_t>();
    params.p = doc.at("p").get<double>();
    params.seed = doc.value("seed", std::uint64_t{0});
    params.du = Distribution::parse(doc.value("du", std::string("constant(1)")));
    params.dv = Distribution::parse(doc.value("dv", std::string("constant(0)")));
    auto vw = doc.at("vertex_weights").get<std::vector<double>>();
    std::vector<WeightedEdge> edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 3) throw ParseError("each edge must be [i, j, u]");
      edges.push_back({e[0].get<std::int64_t>(), e[1].get<std::int64_t>(), e[2].get<double>()});
    }
    return GraphWindow::from_edges(n, params, std::move(vw), std::move(edges));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed window document: ") + e.what());
  }
}

}  // namespace sog
