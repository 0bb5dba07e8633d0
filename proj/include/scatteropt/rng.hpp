#pragma once

#include <cstdint>

namespace scatteropt {

/// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Counter-based uniform draw in [0, 1), keyed on (seed, tick, port).
/// The same key always yields the same value, independent of call order,
/// so latch decisions are reproducible across thread schedules.
inline double counter_u01(std::uint64_t seed, std::uint64_t tick, std::uint64_t port) {
    std::uint64_t h = mix64(seed ^ mix64(tick ^ 0x6a09e667f3bcc909ull) ^ mix64(port ^ 0xbb67ae8584caa73bull));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

} // namespace scatteropt
