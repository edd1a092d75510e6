#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace stmid {

// All randomness in the toolkit flows from one global seed through named
// substreams, so re-running a single pipeline stage reproduces its draws
// regardless of what ran before it.
inline std::uint64_t substream_seed(std::uint64_t global_seed, std::string_view name) {
    // FNV-1a over the name, then a splitmix64 finalizer to decorrelate.
    std::uint64_t h = 1469598103934665603ull;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    std::uint64_t z = global_seed ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::mt19937_64 substream(std::uint64_t global_seed, std::string_view name) {
    return std::mt19937_64(substream_seed(global_seed, name));
}

// Extra discriminator for per-trial / per-seed-index streams.
inline std::mt19937_64 substream(std::uint64_t global_seed, std::string_view name,
                                 std::uint64_t index) {
    return std::mt19937_64(substream_seed(substream_seed(global_seed, name) + index, name));
}

}  // namespace stmid
