#pragma once

#include <cmath>
#include <cstdint>

#include "glcp/types.hpp"

namespace glcp {

/// Counter-derived SplitMix64 stream.
///
/// Streams are identified by (seed, tag, id); deriving the same triple always
/// yields the same sequence, so per-node work can run on any thread count or
/// schedule without changing results.
class RngStream {
 public:
  static RngStream derive(std::uint64_t seed, std::uint64_t tag, std::uint64_t id) {
    std::uint64_t s = absorb(0x6A09E667F3BCC909ULL, seed);
    s = absorb(s, tag);
    s = absorb(s, id);
    return RngStream(s);
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform draw in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform draw in (0, 1]; safe as a log argument.
  double uniform_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) throw param_error("uniform_below: bound must be positive");
    // Rejection from the top keeps the draw exactly uniform.
    std::uint64_t threshold = (0ULL - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Standard normal via Box-Muller; draws are cached in pairs.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform_open();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  /// Geometric draw on {0,1,...} with success probability beta, by inversion.
  std::uint64_t geometric(double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw param_error("geometric: beta must lie in (0,1]");
    if (beta == 1.0) return 0;
    double u = uniform_open();
    double k = std::floor(std::log(u) / std::log1p(-beta));
    return k < 0.0 ? 0 : static_cast<std::uint64_t>(k);
  }

 private:
  explicit RngStream(std::uint64_t state) : state_(state) {}

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  static std::uint64_t absorb(std::uint64_t state, std::uint64_t x) {
    return mix((state + 0x9E3779B97F4A7C15ULL) ^ x);
  }

  std::uint64_t state_ = 0;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

/// Stream tags; one per independent randomized stage so streams never collide.
namespace streams {
constexpr std::uint64_t kSbmEdges = 0x01;
constexpr std::uint64_t kSbmPrototype = 0x02;
constexpr std::uint64_t kSbmFeature = 0x03;
constexpr std::uint64_t kSbmLabel = 0x04;
constexpr std::uint64_t kSplitShuffle = 0x05;
constexpr std::uint64_t kAnchorWalk = 0x06;
constexpr std::uint64_t kRlcpAnchor = 0x07;
constexpr std::uint64_t kGssAnchor = 0x08;
constexpr std::uint64_t kWscDirection = 0x09;
}  // namespace streams

}  // namespace glcp
