#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sog/distribution.hpp"
#include "sog/random.hpp"

namespace sog {

enum class GenerationMode { dense, sparse };

std::string to_string(GenerationMode m);
GenerationMode parse_generation_mode(const std::string& s);

// Edge indicators of one SOG realisation as a pure function of (p, key).
//
// For a source i the offsets k = j - i >= 1 are the leaves (k - 1) of a binary
// tree of depth kDepth. A node covering 2^l leaves is nonempty with probability
// q_l = 1 - (1-p)^(2^l); given a nonempty parent, the children are split by two
// hashed uniforms so that the leaves end up i.i.d. Bernoulli(p). Dense
// enumeration, sparse DFS over nonempty subtrees and single-pair lookup all read
// the same decisions, so they agree bit for bit.
class EdgeLaw {
 public:
  static constexpr int kDepth = 40;

  EdgeLaw() = default;
  EdgeLaw(double p, StreamKey key);

  [[nodiscard]] double p() const { return p_; }
  [[nodiscard]] bool has_edge(std::int64_t i, std::int64_t j) const;

  // Calls f(j) for every edge (i, j) with i < j <= jmax, j increasing.
  template <class F>
  void for_each_target_sparse(std::int64_t i, std::int64_t jmax, F&& f) const;
  template <class F>
  void for_each_target_dense(std::int64_t i, std::int64_t jmax, F&& f) const;

 private:
  struct Split {
    bool left;
    bool right;
  };
  [[nodiscard]] std::uint64_t source_key(std::int64_t i) const;
  [[nodiscard]] bool root_nonempty(std::uint64_t src) const;
  [[nodiscard]] Split split(std::uint64_t src, int level, std::uint64_t index) const;

  double p_ = 1.0;
  StreamKey key_;
  std::array<double, kDepth + 1> q_{};
  std::array<double, kDepth + 1> ratio_{};
};

struct ModelParams {
  double p = 0.5;
  Distribution du = Distribution::constant(1.0);
  Distribution dv = Distribution::constant(0.0);
  std::uint64_t seed = 0;
};

// Lazy view of the window [0, n] of one realisation. Nothing is stored; every
// edge indicator and weight is recomputed from its key on demand.
class WindowModel {
 public:
  WindowModel(std::int64_t n, const ModelParams& params, GenerationMode mode = GenerationMode::sparse);

  [[nodiscard]] std::int64_t n() const { return n_; }
  [[nodiscard]] const ModelParams& params() const { return params_; }
  [[nodiscard]] GenerationMode mode() const { return mode_; }

  [[nodiscard]] bool has_edge(std::int64_t i, std::int64_t j) const { return law_.has_edge(i, j); }
  [[nodiscard]] double edge_weight(std::int64_t i, std::int64_t j) const;
  [[nodiscard]] double vertex_weight(std::int64_t i) const;

  // f(j, u_ij) for every out-edge of i with target <= jmax.
  template <class F>
  void for_each_out_edge(std::int64_t i, std::int64_t jmax, F&& f) const;

 private:
  std::int64_t n_;
  ModelParams params_;
  GenerationMode mode_;
  EdgeLaw law_;
  StreamKey edge_weight_key_;
  StreamKey vertex_weight_key_;
  std::optional<double> u_const_;
  std::optional<double> v_const_;
};

struct WeightedEdge {
  std::int64_t i;
  std::int64_t j;
  double u;
};

// Materialised window: out-adjacency in CSR form plus vertex weights.
class GraphWindow {
 public:
  GraphWindow() = default;

  // Edges may come in any order; duplicates and pairs outside 0 <= i < j <= n are rejected.
  static GraphWindow from_edges(std::int64_t n, const ModelParams& params,
                                std::vector<double> vertex_weights, std::vector<WeightedEdge> edges);

  [[nodiscard]] std::int64_t n() const { return n_; }
  [[nodiscard]] const ModelParams& params() const { return params_; }
  [[nodiscard]] double p() const { return params_.p; }
  [[nodiscard]] std::uint64_t seed() const { return params_.seed; }

  [[nodiscard]] double vertex_weight(std::int64_t i) const { return vertex_weights_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] const std::vector<double>& vertex_weights() const { return vertex_weights_; }

  [[nodiscard]] std::size_t edge_count() const { return targets_.size(); }
  [[nodiscard]] std::span<const std::int32_t> out_targets(std::int64_t i) const;
  [[nodiscard]] std::span<const double> out_weights(std::int64_t i) const;

  [[nodiscard]] bool has_edge(std::int64_t i, std::int64_t j) const;
  // Throws InvalidPathError when (i, j) is not an edge.
  [[nodiscard]] double edge_weight(std::int64_t i, std::int64_t j) const;

  template <class F>
  void for_each_out_edge(std::int64_t i, std::int64_t jmax, F&& f) const {
    const auto b = offsets_[static_cast<std::size_t>(i)];
    const auto e = offsets_[static_cast<std::size_t>(i) + 1];
    for (auto k = b; k < e; ++k) {
      if (targets_[k] > jmax) break;
      f(static_cast<std::int64_t>(targets_[k]), weights_[k]);
    }
  }

  [[nodiscard]] std::vector<WeightedEdge> edges() const;

  // Content hash over n, p, seed, laws, edges and weights.
  [[nodiscard]] std::string id() const;

  friend bool operator==(const GraphWindow& a, const GraphWindow& b);

 private:
  std::int64_t n_ = 0;
  ModelParams params_;
  std::vector<double> vertex_weights_;
  std::vector<std::size_t> offsets_;
  std::vector<std::int32_t> targets_;
  std::vector<double> weights_;
};

GraphWindow generate_window(std::int64_t n, const ModelParams& params,
                            GenerationMode mode = GenerationMode::sparse);
GraphWindow materialize(const WindowModel& model);

// Smallest k >= 1 with (j - k, j) an edge, or nullopt if j has no in-edge in the window.
std::optional<std::int64_t> first_left_connection(const GraphWindow& w, std::int64_t j);
std::optional<std::int64_t> first_left_connection(const WindowModel& m, std::int64_t j);

nlohmann::json to_json(const GraphWindow& w);
GraphWindow window_from_json(const nlohmann::json& doc);

// ---------------------------------------------------------------------------

template <class F>
void EdgeLaw::for_each_target_sparse(std::int64_t i, std::int64_t jmax, F&& f) const {
  const std::int64_t max_leaf = jmax - i - 1;
  if (max_leaf < 0) return;
  const std::uint64_t src = source_key(i);
  if (!root_nonempty(src)) return;
  struct Item {
    int level;
    std::uint64_t index;
  };
  std::array<Item, 2 * kDepth + 2> stack;
  int top = 0;
  stack[top++] = {kDepth, 0};
  const auto limit = static_cast<std::uint64_t>(max_leaf);
  while (top > 0) {
    const Item it = stack[--top];
    if (it.level == 0) {
      f(i + 1 + static_cast<std::int64_t>(it.index));
      continue;
    }
    const Split s = split(src, it.level, it.index);
    const int child = it.level - 1;
    const std::uint64_t right = 2 * it.index + 1;
    if (s.right && (right << child) <= limit) stack[top++] = {child, right};
    if (s.left) stack[top++] = {child, 2 * it.index};
  }
}

template <class F>
void EdgeLaw::for_each_target_dense(std::int64_t i, std::int64_t jmax, F&& f) const {
  const std::int64_t max_leaf = jmax - i - 1;
  if (max_leaf < 0) return;
  const std::uint64_t src = source_key(i);
  // alive[l]: the level-l ancestor of the current leaf is nonempty
  std::array<bool, kDepth + 1> alive{};
  alive[kDepth] = root_nonempty(src);
  for (std::uint64_t x = 0; x <= static_cast<std::uint64_t>(max_leaf); ++x) {
    int top = kDepth - 1;
    if (x > 0) top = static_cast<int>(std::bit_width(x ^ (x - 1))) - 1;
    for (int l = top; l >= 0; --l) {
      if (!alive[l + 1]) {
        alive[l] = false;
        continue;
      }
      const Split s = split(src, l + 1, x >> (l + 1));
      alive[l] = ((x >> l) & 1U) ? s.right : s.left;
    }
    if (alive[0]) f(i + 1 + static_cast<std::int64_t>(x));
  }
}

template <class F>
void WindowModel::for_each_out_edge(std::int64_t i, std::int64_t jmax, F&& f) const {
  jmax = std::min(jmax, n_);
  auto emit = [&](std::int64_t j) { f(j, edge_weight(i, j)); };
  if (mode_ == GenerationMode::dense) {
    law_.for_each_target_dense(i, jmax, emit);
  } else {
    law_.for_each_target_sparse(i, jmax, emit);
  }
}

}  // namespace sog
