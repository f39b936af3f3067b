#pragma once

#include <cstdint>
#include <string_view>

// Seeded 64-bit hashing used by the Bloom filter, MinHash signatures and the
// feature-hashing embedder. Everything here is fixed-width arithmetic with no
// platform-dependent behavior, so hashes are stable across builds and OSes.

namespace takedown {

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ull;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

// FNV-1a over the bytes, seeded, with a splitmix64 avalanche on top.
inline std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ull ^ mix64(seed);
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return mix64(h);
}

inline std::uint64_t combine_hash(std::uint64_t a, std::uint64_t b) {
    return mix64(a + kGoldenGamma + (b << 1));
}

}  // namespace takedown
