#pragma once

#include <cstdint>
#include <random>

namespace gmvshrink {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Independent generator for the stream addressed by (seed, a, b). Streams are
/// derived by hashing the coordinates, so results do not depend on the order
/// in which work items are executed.
Rng make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

}  // namespace gmvshrink
