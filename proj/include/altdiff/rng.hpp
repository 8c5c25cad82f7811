#pragma once

#include <cstdint>
#include <random>

namespace altdiff {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Counter-mode generator: output i is a fixed mix of (seed, i), so any
// stream position can be reproduced without replaying the stream.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed) : key_(splitmix64(seed ^ 0x6A09E667F3BCC909ULL)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() { return at(counter_++); }
    result_type at(std::uint64_t index) const { return splitmix64(key_ ^ splitmix64(index)); }

    // Uniform in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) {
            return (*this)();
        }
        const std::uint64_t limit = max() - (max() % bound);
        std::uint64_t v;
        do {
            v = (*this)();
        } while (v >= limit);
        return v % bound;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Independent child seed for stream `index` of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) + 0xD1B54A32D192ED03ULL * (index + 1));
}

inline std::uint64_t fresh_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace altdiff
