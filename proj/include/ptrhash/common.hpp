#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>

namespace ptrhash {

using u128 = unsigned __int128;

// High 64 bits of the 128-bit product a*b.
inline uint64_t mul_hi(uint64_t a, uint64_t b) {
    return static_cast<uint64_t>((u128{a} * b) >> 64);
}

// Low 64 bits of the 128-bit product a*b.
inline uint64_t mul_lo(uint64_t a, uint64_t b) { return a * b; }

inline constexpr bool is_power_of_two(uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

// ceil(a/b) for b > 0.
inline constexpr uint64_t div_ceil(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

// ceil(a/b) with a 128-bit numerator, used for exact rational shape math.
inline uint64_t div_ceil_u128(u128 a, u128 b) {
    return static_cast<uint64_t>((a + b - 1) / b);
}

inline void store_le64(uint8_t* p, uint64_t v) { std::memcpy(p, &v, 8); }
inline void store_le32(uint8_t* p, uint32_t v) { std::memcpy(p, &v, 4); }
inline uint64_t load_le64(const uint8_t* p) {
    uint64_t v;
    std::memcpy(&v, p, 8);
    return v;
}
inline uint32_t load_le32(const uint8_t* p) {
    uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
}

// Prefetch into all cache levels (hint only; a no-op where unsupported).
inline void prefetch_read(const void* p) {
#if defined(__GNUC__) || defined(__clang__)
    __builtin_prefetch(p, 0, 3);
#else
    (void)p;
#endif
}

// splitmix64 finalizer; bijective on 64-bit words. Used for reproducible
// test/benchmark corpora and internal seed derivation.
inline constexpr uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

}  // namespace ptrhash
