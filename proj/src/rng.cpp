#include "hypermatch/rng.hpp"

namespace hm {

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
    return seed ^ mix64(index + 0xd1b54a32d192ed03ULL);
}

}  // namespace hm
