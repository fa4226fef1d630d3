#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cdsa {

// Counter-mode SplitMix64. Draw k is a pure function of (seed, k), so any
// index range can be generated independently and in parallel with
// thread-count-invariant results. The sequential next_* calls walk the same
// counter space.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t word_at(std::uint64_t index) const {
    std::uint64_t z = seed_ + (index + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1]; never 0 so log() stays finite.
  double uniform_at(std::uint64_t index) const {
    return static_cast<double>((word_at(index) >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; draw k consumes uniform indices 2k, 2k+1.
  double normal_at(std::uint64_t index) const {
    return normal_from_pair(2 * index, 2 * index + 1);
  }

  double normal_from_pair(std::uint64_t u_index0, std::uint64_t u_index1) const {
    const double u1 = uniform_at(u_index0);
    const double u2 = uniform_at(u_index1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t next_u64() { return word_at(counter_++); }
  double next_uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }
  double next_normal() {
    const std::uint64_t base = counter_;
    counter_ += 2;
    return normal_from_pair(base, base + 1);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }
  void skip(std::uint64_t n) { counter_ += n; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace cdsa
