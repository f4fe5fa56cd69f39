#pragma once

#include <cstdint>
#include <random>

namespace teig {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Deterministic uniform stream. The mt19937_64 sequence is pinned by the
/// standard and the double conversion avoids std::uniform_real_distribution,
/// whose output is implementation-defined, so draws are bit-stable across
/// platforms and compilers.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

  // [0, 1)
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // [-1, 1)
  double symmetric() { return 2.0 * unit() - 1.0; }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

/// Seed for the substream of one campaign run. Streams depend only on
/// (seed, run), so thread scheduling cannot change what a run draws.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t run) {
  std::uint64_t s = seed ^ (0x9E3779B97F4A7C15ULL * (run + 1));
  (void)splitmix64(s);
  return splitmix64(s);
}

inline RandomStream run_stream(std::uint64_t seed, std::uint64_t run) {
  return RandomStream(derive_stream_seed(seed, run));
}

}  // namespace teig
