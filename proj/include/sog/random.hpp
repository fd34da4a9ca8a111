#pragma once

#include <cstdint>
#include <initializer_list>

namespace sog {

/// SplitMix64 finalizer. Every random quantity in the library is a pure function
/// of a 64-bit key built by repeated mixing of a root seed and a path of integers.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Maps the top 53 bits of a word to [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Role tags separate substreams that share the same numeric path.
enum class Role : std::uint64_t {
  edges = 0x100,
  edge_weight,
  vertex_weight,
  replication,
  tree,
  tree_gap,
  tree_edge_weight,
  tree_vertex_weight,
  bootstrap,
  pilot,
  reference,
  validation,
};

/// Hierarchical stream identifier: `StreamKey(seed).child(Role::edges).child(i)`.
class StreamKey {
 public:
  constexpr StreamKey() = default;
  constexpr explicit StreamKey(std::uint64_t root_seed) noexcept : value_(mix64(root_seed)) {}

  // Rebuilds a key from value(), e.g. one stored alongside a tree node.
  static constexpr StreamKey from_value(std::uint64_t value) noexcept {
    StreamKey k;
    k.value_ = value;
    return k;
  }

  [[nodiscard]] constexpr StreamKey child(std::uint64_t component) const noexcept {
    StreamKey k;
    k.value_ = mix64(value_ ^ mix64(component ^ 0x5851f42d4c957f2dULL));
    return k;
  }
  [[nodiscard]] constexpr StreamKey child(Role role) const noexcept {
    return child(static_cast<std::uint64_t>(role));
  }
  [[nodiscard]] constexpr std::uint64_t value() const noexcept { return value_; }

  friend constexpr bool operator==(StreamKey, StreamKey) = default;

 private:
  std::uint64_t value_ = 0;
};

/// Counter-based generator: the k-th draw is mix64(key + k * golden). Cheap to
/// construct, so one stream per edge / node / replication is the normal usage.
class RandomStream {
 public:
  constexpr explicit RandomStream(StreamKey key) noexcept : key_(key) {}

  static constexpr RandomStream from_path(std::uint64_t root_seed,
                                          std::initializer_list<std::uint64_t> path) noexcept {
    StreamKey k(root_seed);
    for (auto c : path) k = k.child(c);
    return RandomStream(k);
  }

  constexpr std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_.value() + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1).
  constexpr double uniform() noexcept { return to_unit(next_u64()); }

  /// Uniform integer in [0, bound), bound > 0 (multiply-high reduction).
  std::uint64_t below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  [[nodiscard]] constexpr StreamKey key() const noexcept { return key_; }
  [[nodiscard]] constexpr std::uint64_t draws() const noexcept { return counter_; }

 private:
  StreamKey key_;
  std::uint64_t counter_ = 0;
};

/// Seed of the r-th independent replication derived from a run seed.
constexpr std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t r) noexcept {
  return StreamKey(seed).child(Role::replication).child(r).value();
}

}  // namespace sog
