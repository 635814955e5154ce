#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace remi {

/// Seed for an independent substream, derived from a root seed and a fixed label.
/// FNV-1a over the label, mixed with the root through splitmix64.
std::uint64_t substream_seed(std::uint64_t root, std::string_view label) noexcept;

/// Deterministic generator used everywhere randomness is needed.
///
/// mt19937_64 is fully specified by the standard, and the real-valued draws
/// below are computed by hand from the raw 64-bit output, so a given seed
/// yields the same sequence on every conforming platform (unlike
/// std::uniform_real_distribution, whose algorithm is unspecified).
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}
    Rng(std::uint64_t root, std::string_view label) : engine_(substream_seed(root, label)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    friend bool operator==(const Rng&, const Rng&) = default;

  private:
    std::mt19937_64 engine_;
};

} // namespace remi
