#pragma once

#include <cstdint>
#include <limits>
#include <span>

namespace dnaembed {

/// Counter-based generator: the k-th draw of stream (seed, stream_id) is a
/// pure function of (seed, stream_id, k), so results do not depend on which
/// worker consumes which stream.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream_id = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on [0, bound). bound must be positive.
  std::uint64_t uniform_int(std::uint64_t bound);
  /// Standard normal via the polar transform; the spare value is cached.
  double normal();

  /// Independent child stream derived from this generator's key.
  Rng split(std::uint64_t stream_id) const;

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  struct Key {};
  Rng(Key, std::uint64_t key) : key_(key) {}

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Convenience wrapper around Rng::normal().
inline double sample_normal(Rng& rng) { return rng.normal(); }

}  // namespace dnaembed
