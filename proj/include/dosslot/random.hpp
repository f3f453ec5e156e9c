#pragma once

#include <cstdint>
#include <random>

namespace dosslot {

// All randomness is drawn from caller-owned engines of this type.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace dosslot
