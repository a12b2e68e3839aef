#pragma once

#include <cmath>
#include <cstdint>

namespace dpf {

// SplitMix64 finalizer; full-avalanche 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

/**
 * Counter-based random stream.
 *
 * Draw i of a stream with key k is mix64(k + (i+1) * golden), i.e. the
 * SplitMix64 sequence seeded at k. Sub-streams are derived by hashing a label
 * into the key, never by consuming draws, so the stream for
 * (run, step, particle) is independent of how many draws any other stream
 * used. Serial and parallel schedules therefore produce identical output.
 */
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  RngStream child(std::uint64_t label) const {
    return RngStream(mix64(key_ ^ mix64(label + kLabelSalt)));
  }

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden); }

  // uniform on [0, 1) with 53-bit resolution
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Box-Muller; consumes exactly two uniforms. 1 - u keeps the log argument in (0, 1].
  double normal() {
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kLabelSalt = 0xA0761D6478BD642Full;
  static constexpr double kTwoPi = 6.283185307179586476925286766559;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Fixed stream labels. These constants are part of the reproducibility
// contract: a given (seed, purpose, step, particle) always yields the same draws.
namespace stream {
inline constexpr std::uint64_t kTruthMotion = 1;
inline constexpr std::uint64_t kTruthObserve = 2;
inline constexpr std::uint64_t kForwardRefs = 3;
inline constexpr std::uint64_t kResample = 4;
inline constexpr std::uint64_t kSmootherBackward = 5;
inline constexpr std::uint64_t kSmootherForward = 6;
inline constexpr std::uint64_t kRun = 7;
inline constexpr std::uint64_t kCandidate = 8;
inline constexpr std::uint64_t kSigmaJitter = 9;
}  // namespace stream

}  // namespace dpf
