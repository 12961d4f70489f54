// Deterministic seeded random numbers: SplitMix64 streams with derived
// child seeds, so every component draws from its own named stream.
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace bbs {

// MurmurHash3 64-bit finalizer; stateless bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 33;
  z *= 0xff51afd7ed558ccdull;
  z ^= z >> 33;
  z *= 0xc4ceb9fe1a85ec53ull;
  z ^= z >> 33;
  return z;
}

// Splittable seed derivation: folds a path of integer tags into a master
// seed. Used for (sweep point, replication, mechanism) child streams.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(master ^ 0x5851f42d4c957f2dull);
  for (std::uint64_t p : path) {
    s = mix64(s ^ (mix64(p ^ 0x14057b7ef767814full) + 0x9e3779b97f4a7c15ull +
                   (s << 6) + (s >> 2)));
  }
  return s;
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : base_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on [0,1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1]; safe for logs.
  double next_double_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Unbiased integer in [0, n) via 128-bit multiply; n > 0.
  std::uint64_t uniform_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  double exponential(double rate) { return -std::log(next_double_open()) / rate; }

  // Box-Muller; keeps the spare draw so the stream stays reproducible.
  double normal(double mean, double stddev) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1 = next_double_open();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return mean + stddev * r * std::cos(a);
  }

  // Child stream keyed by tag, independent of how much the parent consumed.
  SplitMix64 split(std::uint64_t tag) const {
    return SplitMix64(derive_seed(base_, {tag}));
  }

  std::uint64_t base_seed() const { return base_; }

 private:
  std::uint64_t base_;
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bbs
