#pragma once

#include <cstdint>

namespace rdslab {

// splitmix64 finalizer; good avalanche, used both as a stream generator and
// as a stateless hash for counter-addressed symbol lookup.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d4ecb9aa9f4ae3ull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index * 0x9e3779b97f4a7c15ull + 1));
}

// Counter-based stream: draws are a pure function of (seed, counter), so a
// substream derived from (seed, path) is independent of scheduling order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() { return mix64(seed_, counter_++); }

  // [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in {1..n}; modulo bias is ~n/2^64, negligible for small alphabets
  int next_symbol(int n) { return 1 + static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  Rng substream(std::uint64_t path) const { return Rng(mix64(seed_, ~path)); }

  void reset() { counter_ = 0; }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace rdslab
