#pragma once

// Counter-based random draws. Every draw is a pure function of
// (seed, stream/iteration, row, col), so the result of a step does not
// depend on evaluation order, thread count or SIMD width.

#include <cstdint>

namespace avalanche::lattice {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// MurmurHash3 32-bit finalizer.
constexpr std::uint32_t fmix32(std::uint32_t h) noexcept {
    h ^= h >> 16;
    h *= 0x85EBCA6Bu;
    h ^= h >> 13;
    h *= 0xC2B2AE35u;
    h ^= h >> 16;
    return h;
}

/// Hash of an ordered tuple of 64-bit words; used to derive sub-seeds.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0) noexcept {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ (a + 0x632BE59BD9B4E019ull));
    return splitmix64(h ^ (b + 0x8CB92BA72F3D8DD7ull));
}

inline constexpr std::uint32_t kRowMul = 0x9E3779B1u;
inline constexpr std::uint32_t kColMul = 0x85EBCA77u;

/// Per-step key pair. Row mixing uses k0, column mixing uses k1.
struct StepKey {
    std::uint32_t k0 = 0;
    std::uint32_t k1 = 0;
};

constexpr StepKey step_key(std::uint64_t seed, std::uint64_t iteration) noexcept {
    const std::uint64_t h = derive_seed(seed, iteration, 0x5354455055ull);
    return {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
}

constexpr std::uint32_t row_hash(StepKey key, std::uint32_t row) noexcept {
    return fmix32(key.k0 ^ (row * kRowMul));
}

constexpr std::uint32_t cell_hash(std::uint32_t row_h, StepKey key,
                                  std::uint32_t col) noexcept {
    return fmix32(row_h ^ key.k1 ^ (col * kColMul));
}

// Probabilities are compared on a 30-bit lattice: an event with probability
// p fires iff u < threshold(p), u uniform on [0, 2^30). The range keeps both
// operands representable as signed 32-bit lanes, and p = 1 maps to 2^30 so
// it always fires.
inline constexpr int kUniformBits = 30;
inline constexpr std::int32_t kUniformRange = std::int32_t{1} << kUniformBits;

constexpr std::int32_t uniform30(std::uint32_t h) noexcept {
    return static_cast<std::int32_t>(h >> (32 - kUniformBits));
}

std::int32_t probability_threshold(double p);

/// Uniform double in [0,1) with 53 random bits, for initialisation draws.
inline double uniform01(std::uint64_t stream_seed, std::uint64_t row,
                        std::uint64_t col) noexcept {
    const std::uint64_t h = derive_seed(stream_seed, row, col);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace avalanche::lattice
