#pragma once

#include <cstdint>
#include <random>

namespace fluidtree {

/// splitmix64 step; used to expand one master seed into independent substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a child seed from a master seed and a list of stream tags
/// (phase id, pattern index, instance index, ...). Deterministic; distinct
/// tag tuples give statistically independent streams.
template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t master, Tags... tags) {
    std::uint64_t state = master ^ 0xa0761d6478bd642fULL;
    ((state = splitmix64(state) ^ static_cast<std::uint64_t>(tags)), ...);
    return splitmix64(state);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

}  // namespace fluidtree
