#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fimkit {

/// 64-bit FNV-1a; stable across platforms, used to derive stream ids.
std::uint64_t fnv1a64(std::string_view bytes);

// Seeded random stream. The engine is std::mt19937_64; integer and real
// draws are derived from raw engine output rather than the standard
// distributions, whose algorithms vary between library vendors, so a given
// (seed, stream, substream) yields the same draws everywhere.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view stream_id, std::uint64_t substream = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Uniform double in [0, 1) with 53 bits of precision.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fimkit
