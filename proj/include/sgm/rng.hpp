#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <vector>

namespace sgm {

// Splittable pseudo-random generator built on the SplitMix64 mixer.
// Streams for parallel work are derived by hashing (seed, field...) so that
// replicate k always sees the same draws no matter which worker runs it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Hash a seed together with a list of integer fields into a stream seed.
  // Additive chaining keeps the fold asymmetric in (state, field).
  static std::uint64_t derive(std::uint64_t seed,
                              std::initializer_list<std::uint64_t> fields) {
    std::uint64_t s = mix(seed + 0x9e3779b97f4a7c15ull);
    for (std::uint64_t f : fields) {
      s = mix(s + mix(f + 0xbf58476d1ce4e5b9ull));
    }
    return s;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    return mix(z);
  }

  // Independent child generator; advances this generator by one step.
  Rng split() { return Rng(mix(next_u64() ^ 0x6a09e667f3bcc909ull)); }

  // Uniform on (0, 1].
  double uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal, Box-Muller without cached state (two uniforms per draw).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() <= p; }

  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // k distinct indices from [0, n), partial Fisher-Yates, order preserved
  // as drawn.
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t k) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k && i < n; ++i) {
      std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

 private:
  std::uint64_t state_;
};

}  // namespace sgm
