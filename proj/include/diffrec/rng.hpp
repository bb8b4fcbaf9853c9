#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace diffrec {

// Seeded RNG wrapper. The engine (mt19937_64) is specified bit-exactly by the
// standard; the uniform mappings below are hand-rolled because the standard
// distributions are implementation-defined, which would break byte-identical
// re-runs across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0, 1), 53-bit resolution
    double next_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform in {0, 1, ..., bound-1}, unbiased via rejection
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("Rng::next_below: bound must be positive");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do { x = eng_(); } while (x >= limit);
        return x % bound;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[next_below(i)]);
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace diffrec
