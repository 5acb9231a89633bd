#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "ptrhash/common.hpp"

#if defined(__x86_64__)
#include <immintrin.h>
#endif

namespace ptrhash {

// Rank of the set bit to locate is < popcount(word).
uint32_t select_in_word_portable(uint64_t word, uint32_t rank);

#if defined(__x86_64__)
// Deposit a single bit at the rank'th set position, then count trailing
// zeros. Needs BMI2.
__attribute__((target("bmi,bmi2"))) inline uint32_t select_in_word_pdep(uint64_t word,
                                                                        uint32_t rank) {
    return static_cast<uint32_t>(_tzcnt_u64(_pdep_u64(uint64_t{1} << rank, word)));
}
#endif

bool cpu_has_bmi2();

inline uint32_t select_in_word(uint64_t word, uint32_t rank) {
#if defined(__x86_64__)
    static const bool use_pdep = cpu_has_bmi2();
    if (use_pdep) return select_in_word_pdep(word, rank);
#endif
    return select_in_word_portable(word, rank);
}

// Position of the rank'th set bit in the 128-bit word (lo || hi).
inline uint32_t select128(uint64_t lo, uint64_t hi, uint32_t rank) {
    const uint32_t in_lo = static_cast<uint32_t>(std::popcount(lo));
    if (rank < in_lo) return select_in_word(lo, rank);
    return 64 + select_in_word(hi, rank - in_lo);
}

// One cache line encoding up to 44 non-decreasing values v_0..v_43 with
// v_i < 2^40 and v_last - v_0 <= (128-44)*2^8 = 21504:
//
//   v_i = 2^8*floor(v_0/2^8)                           (offset)
//       + 2^8*(floor(v_i/2^8) - floor(v_0/2^8))        (relative high part)
//       + (v_i mod 2^8)                                (low byte)
//
// The relative high parts are unary-coded into a 128-bit mask: bit
// i + floor(v_i/2^8) - floor(v_0/2^8) is set for each i, so
// select(mask, i) - i recovers the relative high part of v_i.
//
// Byte layout is pinned for serialization: bytes 0-3 hold the 32-bit offset
// (little-endian), bytes 4-19 the 128-bit mask (little-endian), bytes 20-63
// the low bytes in index order. Unused low bytes are zero.
struct CacheLineEfBlock {
    static constexpr size_t kCapacity = 44;
    static constexpr uint64_t kMaxValue = uint64_t{1} << 40;
    static constexpr uint64_t kMaxSpan = (128 - kCapacity) * 256;  // 21504

    std::array<uint8_t, 64> bytes{};

    uint32_t offset() const { return load_le32(bytes.data()); }
    uint64_t high_bits_lo() const { return load_le64(bytes.data() + 4); }
    uint64_t high_bits_hi() const { return load_le64(bytes.data() + 12); }
    uint8_t low_byte(size_t i) const { return bytes[20 + i]; }

    friend bool operator==(const CacheLineEfBlock&, const CacheLineEfBlock&) = default;
};

static_assert(sizeof(CacheLineEfBlock) == 64);

enum class ClefStatus : uint8_t {
    kOk = 0,
    kRangeTooWide,   // span over 21504 or a mask bit past position 127
    kValueTooLarge,  // a value >= 2^40
};

// Encodes 1..44 non-decreasing values. On failure the caller is expected to
// fall back to a plain array.
ClefStatus clef_encode(std::span<const uint64_t> values, CacheLineEfBlock& out);

// Value at index i; i must be below the encoded count (unchecked).
inline uint64_t clef_get(const CacheLineEfBlock& block, size_t i) {
    const uint32_t pos = select128(block.high_bits_lo(), block.high_bits_hi(),
                                   static_cast<uint32_t>(i));
    return (uint64_t{block.offset()} << 8) + (uint64_t{pos - i} << 8) + block.low_byte(i);
}

}  // namespace ptrhash
