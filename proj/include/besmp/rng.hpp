#ifndef BESMP_RNG_HPP
#define BESMP_RNG_HPP

#include <cstdint>
#include <random>

namespace besmp {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic sub-stream seeds: every (repetition, iteration, role) gets its
// own stream so results are independent of thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t repetition,
                                 std::uint64_t iteration, std::uint64_t role) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ (repetition * 0x9e3779b97f4a7c15ULL + 1));
    s = splitmix64(s ^ (iteration * 0xc2b2ae3d27d4eb4fULL + 2));
    s = splitmix64(s ^ (role * 0x165667b19e3779f9ULL + 3));
    return s;
}

}  // namespace besmp

#endif
