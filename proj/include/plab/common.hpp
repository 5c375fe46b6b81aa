#pragma once

#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>

namespace plab {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// Deterministic RNG. Doubles are derived from the raw 64-bit stream so that
// draws do not depend on library distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64() {
        // xorshift* generator
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545F4914F6CDD1DULL;
    }

    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // symmetric range [-m, m]
    double symmetric(double m) { return uniform(-m, m); }

    std::size_t index(std::size_t n) { return std::size_t(next_u64() % std::uint64_t(n)); }

private:
    std::uint64_t state_;
};

} // namespace plab
