#pragma once

#include <cstdint>

namespace chns {

// Counter-based generator (splitmix64 finalizer): value(i) depends only on
// (seed, i), so ensemble members can draw disjoint counter ranges and any
// stream can be regenerated independently of evaluation order.
struct CounterRng {
    uint64_t seed = 0;

    uint64_t value(uint64_t counter) const {
        uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform(uint64_t counter) const {
        return (value(counter) >> 11) * 0x1.0p-53;
    }

    // uniform in [-1, 1)
    double symmetric(uint64_t counter) const {
        return 2.0 * uniform(counter) - 1.0;
    }
};

} // namespace chns
