#pragma once

#include <cstdint>
#include <random>

namespace eplab {

// Seeded generator with a platform-independent uniform mapping (std
// distributions are implementation-defined, which would break byte-exact
// CSV reproducibility across toolchains).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform01() { return double(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::uint64_t bits() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

} // namespace eplab
