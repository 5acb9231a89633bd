#include "ptrhash/cacheline_ef.hpp"

namespace ptrhash {

bool cpu_has_bmi2() {
#if defined(__x86_64__)
    return __builtin_cpu_supports("bmi2");
#else
    return false;
#endif
}

uint32_t select_in_word_portable(uint64_t word, uint32_t rank) {
    uint32_t pos = 0;
    // Skip whole bytes by popcount, then walk the final byte.
    while (true) {
        const uint32_t c = static_cast<uint32_t>(std::popcount(word & 0xff));
        if (rank < c) break;
        rank -= c;
        word >>= 8;
        pos += 8;
    }
    while (true) {
        if (word & 1) {
            if (rank == 0) return pos;
            rank--;
        }
        word >>= 1;
        pos++;
    }
}

ClefStatus clef_encode(std::span<const uint64_t> values, CacheLineEfBlock& out) {
    const size_t count = values.size();
    if (count == 0 || count > CacheLineEfBlock::kCapacity) return ClefStatus::kRangeTooWide;

    for (uint64_t v : values) {
        if (v >= CacheLineEfBlock::kMaxValue) return ClefStatus::kValueTooLarge;
    }
    if (values.back() - values.front() > CacheLineEfBlock::kMaxSpan)
        return ClefStatus::kRangeTooWide;

    const uint64_t base = values.front() >> 8;
    uint64_t mask_lo = 0;
    uint64_t mask_hi = 0;
    for (size_t i = 0; i < count; i++) {
        const uint64_t rel = (values[i] >> 8) - base;
        const uint64_t bit = i + rel;
        if (bit >= 128) return ClefStatus::kRangeTooWide;
        if (bit < 64) {
            mask_lo |= uint64_t{1} << bit;
        } else {
            mask_hi |= uint64_t{1} << (bit - 64);
        }
    }

    out.bytes.fill(0);
    store_le32(out.bytes.data(), static_cast<uint32_t>(base));
    store_le64(out.bytes.data() + 4, mask_lo);
    store_le64(out.bytes.data() + 12, mask_hi);
    for (size_t i = 0; i < count; i++) {
        out.bytes[20 + i] = static_cast<uint8_t>(values[i] & 0xff);
    }
    return ClefStatus::kOk;
}

}  // namespace ptrhash
