#pragma once

#include <array>
#include <cstdint>

namespace cachemux {

// splitmix64, used to expand seeds and derive stream keys.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seeded pseudo-random stream (xoshiro256++). All simulation randomness
/// flows through instances of this class; no OS entropy is ever mixed in,
/// so a run is fully determined by its seeds.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53 bits of precision.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  // Uniform integer in [0, n); n must be positive.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> state_{};
};

// Derives an independent stream from a master seed and up to three tag words.
// Streams with distinct tags behave as unrelated generators, which keeps
// query sampling, per-(query, model) cost draws, and policy noise decoupled:
// a policy consuming one stream never perturbs the others.
inline RngStream derive_stream(std::uint64_t master, std::uint64_t tag0,
                               std::uint64_t tag1 = 0, std::uint64_t tag2 = 0) {
  std::uint64_t s = master;
  std::uint64_t key = splitmix64(s);
  s ^= tag0 + 0x9E3779B97F4A7C15ull;
  key ^= splitmix64(s);
  s ^= tag1 + 0xC2B2AE3D27D4EB4Full;
  key ^= splitmix64(s);
  s ^= tag2 + 0x165667B19E3779F9ull;
  key ^= splitmix64(s);
  return RngStream(key);
}

// Fixed tags for the named streams of one trial.
inline constexpr std::uint64_t kQueryStreamTag = 0x71756572ull;    // arrivals
inline constexpr std::uint64_t kCostStreamTag = 0x636f7374ull;     // cost draws
inline constexpr std::uint64_t kPolicyStreamTag = 0x706f6c69ull;   // selector noise
inline constexpr std::uint64_t kCatalogStreamTag = 0x63617467ull;  // catalog construction
inline constexpr std::uint64_t kFitStreamTag = 0x66697474ull;      // offline training draws

}  // namespace cachemux
