#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace specsim {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine(std::uint64_t key, std::uint64_t value) {
  return splitmix64(key ^ splitmix64(value + 0x632BE59BD9B4E019ULL));
}

}  // namespace detail

/// Purpose tags keep the substreams of different pipeline stages disjoint.
enum class StreamTag : std::uint64_t {
  Atom = 1,         // frequency atoms Z'_k / Z''_k
  Noise = 2,        // time-domain innovations
  Subsample = 3,    // oversampling offset
  Replicate = 4,    // per-replicate seed derivation
};

/// Counter-based standard normal variates.
///
/// A stream is identified by (seed, tag, a, b); variate i of the stream is a pure
/// function of those values and i, so results do not depend on generation order
/// or thread scheduling.
class GaussianStream {
public:
  GaussianStream(std::uint64_t seed, StreamTag tag, std::uint64_t a = 0, std::uint64_t b = 0)
      : key_(detail::combine(detail::combine(detail::combine(detail::splitmix64(seed),
                                                             static_cast<std::uint64_t>(tag)),
                                             a),
                             b)) {}

  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t i) const {
    const std::uint64_t bits = detail::splitmix64(key_ + (i + 1) * 0x9E3779B97F4A7C15ULL);
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal: variates 2j and 2j+1 are the cosine and sine halves of one
  /// Box-Muller transform of the uniform pair (2j, 2j+1).
  double normal(std::uint64_t i) const {
    const std::uint64_t j = i / 2;
    const double r = std::sqrt(-2.0 * std::log(uniform(2 * j)));
    const double theta = 2.0 * std::numbers::pi * uniform(2 * j + 1);
    return i % 2 == 0 ? r * std::cos(theta) : r * std::sin(theta);
  }

  /// out[k] = normal(first + k).
  template <class Out>
  void fill_normals(Out& out, long n, std::uint64_t first = 0) const {
    long k = 0;
    if (first % 2 == 1 && n > 0) out[k++] = normal(first);
    for (; k + 1 < n; k += 2) {
      const std::uint64_t j = (first + static_cast<std::uint64_t>(k)) / 2;
      const double r = std::sqrt(-2.0 * std::log(uniform(2 * j)));
      const double theta = 2.0 * std::numbers::pi * uniform(2 * j + 1);
      out[k] = r * std::cos(theta);
      out[k + 1] = r * std::sin(theta);
    }
    if (k < n) out[k] = normal(first + static_cast<std::uint64_t>(k));
  }

  std::uint64_t bits(std::uint64_t i) const { return detail::splitmix64(key_ ^ detail::splitmix64(i)); }

  std::uint64_t key() const { return key_; }

private:
  std::uint64_t key_;
};

/// Seed of replicate i derived from a base seed.
inline std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t i) {
  return GaussianStream(base, StreamTag::Replicate, i).key();
}

}  // namespace specsim
