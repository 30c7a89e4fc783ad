#pragma once

#include <cstdint>
#include <random>

namespace orthonet {

/// Seedable, platform-stable random source.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniforms take the top 53 bits; normals use the Box-Muller
/// transform, so no implementation-defined std:: distribution is involved.
///
/// Independent streams are derived with `stream_seed(master, index)`, a
/// SplitMix64 finalizer over (master, index). Experiments give every grid cell
/// its own stream index, and sub-streams within a cell (loss data, layer
/// initialization) are again derived from the cell seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  /// Standard normal.
  double gaussian();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);

}  // namespace orthonet
