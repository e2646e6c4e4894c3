#pragma once
#include <cstdint>
#include <cmath>

// Counter-based noise substreams. Every random number is a pure function of
// (master seed, purpose, stream, counter, lane), so ensembles evolved in
// parallel produce bit-identical output for any thread count, and any
// particle's path can be replayed without regenerating the others.
namespace driftlab::rng {

// SplitMix64 finalizer; a bijective 64-bit mix with full avalanche.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Purpose tags keep independent uses of the same master seed decorrelated.
enum class Purpose : std::uint64_t {
    noise = 0x6e6f697365ULL,       // SDE driving increments
    init = 0x696e6974ULL,          // initial-condition sampling
    subsample = 0x737562ULL,       // ensemble subsampling for transport
    pairs = 0x7061697273ULL,       // estimator pair sampling
    projections = 0x70726f6aULL,   // sliced-transport directions
    bootstrap = 0x626f6f74ULL,     // resampling margins
    starts = 0x7374617274ULL,      // root-search multistarts
};

struct Key {
    std::uint64_t value;
};

inline Key derive(std::uint64_t master_seed, Purpose purpose) {
    return Key{mix64(master_seed ^ mix64(static_cast<std::uint64_t>(purpose)))};
}

inline std::uint64_t word(Key key, std::uint64_t stream, std::uint64_t counter,
                          std::uint64_t lane) {
    std::uint64_t h = mix64(key.value ^ stream);
    h = mix64(h ^ counter);
    return mix64(h ^ lane);
}

// Uniform on (0,1); never returns an endpoint, safe inside log().
inline double uniform01(std::uint64_t w) {
    return (static_cast<double>(w >> 11) + 1.0) * (1.0 / 9007199254740993.0);
}

inline double uniform01(Key key, std::uint64_t stream, std::uint64_t counter,
                        std::uint64_t lane) {
    return uniform01(word(key, stream, counter, lane));
}

// Standard normal via Box-Muller; lanes 2j and 2j+1 feed component j.
inline double normal(Key key, std::uint64_t stream, std::uint64_t counter,
                     std::uint64_t lane) {
    const double u1 = uniform01(word(key, stream, counter, 2 * lane));
    const double u2 = uniform01(word(key, stream, counter, 2 * lane + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace driftlab::rng
