#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace smest::core {

/**
 * @brief Counter-based deterministic random stream.
 *
 * Identical (seed, stream_id) pairs produce identical draw sequences on every
 * platform: all arithmetic is fixed-width unsigned and the distributions below
 * are implemented here rather than delegated to <random>, whose distribution
 * outputs are implementation-defined.
 *
 * Value-like: cheap to copy, one instance per worker, never shared mutably.
 */
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed),
        stream_id_(stream_id),
        base_(mix(seed + 0x9E3779B97F4A7C15ULL) ^ mix(stream_id * 0xD2B74407B1CE6E93ULL + 0x8CB92BA72F3D8DD7ULL)) {}

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// SplitMix64 finalizer; also usable as a standalone 64-bit mixer.
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t next_u64() noexcept { return mix(base_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double next_double() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1]; safe as a log() argument.
  double next_open_double() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be positive. Unbiased via rejection.
  std::uint64_t uniform(std::uint64_t n) noexcept {
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t draw = next_u64();
    while (draw >= limit) draw = next_u64();
    return draw % n;
  }

  /// Standard normal via Box-Muller; consumes exactly two draws per call.
  double normal() noexcept {
    const double u1 = next_open_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double sigma) noexcept { return mean + sigma * normal(); }

  /// Exponential with the given mean; consumes one draw.
  double exponential(double mean) noexcept { return -mean * std::log(next_open_double()); }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// k distinct indices drawn uniformly from [0, population), in draw order.
  std::vector<int> sample_without_replacement(int population, int k) {
    std::vector<int> pool(static_cast<std::size_t>(population));
    for (int i = 0; i < population; ++i) pool[static_cast<std::size_t>(i)] = i;
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform(static_cast<std::uint64_t>(population - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      out.push_back(pool[static_cast<std::size_t>(i)]);
    }
    return out;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

/// Stable 64-bit seed derived from (seed, tag); used to give folds and trees
/// independent reproducible streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return RngStream(seed, tag).next_u64();
}

}  // namespace smest::core
