#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace locamp {

/// splitmix64 finalizer; maps (seed, stream) to a well-mixed 64-bit seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Named substreams used by the experiment harness so that ablations stay paired.
enum class Stream : std::uint64_t {
  instance = 0x1,   // design matrix and observation noise
  prior = 0x2,      // signal draw
  brownian = 0x3,   // localization increments
  baseline = 0x4,   // DPS noise
};

/// Seeded random stream. The engine is std::mt19937_64 (bit-specified by the
/// standard); uniforms and normals are derived here rather than through
/// <random> distributions so draws are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  /// Independent stream derived from this stream's seed (not its state).
  Rng split(std::uint64_t stream) const { return Rng(mix_seed(seed_, stream)); }
  Rng split(Stream stream) const { return split(static_cast<std::uint64_t>(stream)); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Marsaglia polar method).
  double normal();
  Eigen::VectorXd normal_vector(Eigen::Index n);

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace locamp
