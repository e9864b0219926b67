#pragma once

// Counter-based generator: output i is a keyed 64-bit mix of (key, i).
// Substreams are cheap to derive and independent of evaluation order.

#include <cstdint>
#include <limits>

namespace hm {

std::uint64_t mix64(std::uint64_t x);

// Seed of the substream for replica `index` of a run seeded with `seed`.
std::uint64_t substream(std::uint64_t seed, std::uint64_t index);

class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) : key_(mix64(key ^ 0x6a09e667f3bcc909ULL)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(CounterRng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace hm
