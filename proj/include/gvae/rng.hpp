#pragma once

#include <array>
#include <cstdint>

namespace gvae {

// Deterministic random stream: xoshiro256++ seeded through splitmix64,
// standard normals via Box-Muller. Identical seed yields an identical
// sequence on every platform that rounds IEEE doubles the same way.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform();

  // Standard normal draw (Box-Muller pair, second value cached).
  double normal();

  // Unbiased integer in [0, bound) via rejection sampling. bound > 0.
  std::uint64_t below(std::uint64_t bound);

  // Independent stream derived from the original seed and a stream id.
  // Unaffected by how many draws this Rng has produced.
  Rng fork(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_ = 0;
  std::array<std::uint64_t, 4> state_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Seed derivation used by Rng::fork; exposed so components can derive
// sub-seeds without constructing intermediate generators.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Stream ids, one per source of randomness in the pipeline.
namespace seed_purpose {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kSplit = 2;
inline constexpr std::uint64_t kNoise = 3;
inline constexpr std::uint64_t kDropout = 4;
inline constexpr std::uint64_t kSynthStudentClusters = 5;
inline constexpr std::uint64_t kSynthCourseClusters = 6;
inline constexpr std::uint64_t kSynthObserve = 7;
inline constexpr std::uint64_t kBaselineMf = 8;
inline constexpr std::uint64_t kKmeans = 9;
}  // namespace seed_purpose

}  // namespace gvae
