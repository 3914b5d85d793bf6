#pragma once

// Reproducible random streams.
//
// Algorithm "mt64-sm64-polar/1": each (base, stream) pair seeds a
// std::mt19937_64 with a SplitMix64 mix of base and stream. Uniforms take the
// top 53 bits of one engine output; normals use the Marsaglia polar method
// (both values of a pair are used); bounded integers use rejection on the
// raw 64-bit output. All of this is specified bit-exactly, so draws agree
// across platforms and standard libraries.

#include <cstdint>
#include <random>

namespace nestband {

inline constexpr const char* kRngAlgorithm = "mt64-sm64-polar/1";

struct RngSeed {
  std::uint64_t base = 0;
  std::uint64_t stream = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

class Rng {
 public:
  explicit Rng(RngSeed seed);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  /// Standard normal.
  double normal();
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Chi-square with an integer number of degrees of freedom.
  double chi_square(int dof);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nestband
