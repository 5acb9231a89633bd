#pragma once

#include <cstdint>
#include <stdexcept>

#include "ptrhash/common.hpp"
#include "ptrhash/hash.hpp"

namespace ptrhash {

enum class ReduceKind : uint8_t {
    // S is a power of two; reduce(x, S) = hi(C*x) & (S-1). One multiplication
    // and a mask. The multiply makes the result depend on all bits of x.
    kPowerOfTwoMul = 0,
    // Single part, S < 2^32 and not a power of two; Lemire fastmod.
    kFastModSinglePart = 1,
    // Per-part fastmod with S chosen so the realized load factor stays at
    // alpha for every n (S not a power of two). Used by the presets.
    kFastModMultiPart = 2,
};

const char* reduce_kind_name(ReduceKind k);

// Exact x mod S via the 128-bit-magic fastmod: M = floor(2^128/S) + 1,
// lowbits = M*x mod 2^128, result = floor(lowbits*S / 2^128). Exact for all
// 64-bit x when S < 2^32; two 64x64 multiplies per half.
struct FastModU64 {
    uint64_t magic_hi = 0;
    uint64_t magic_lo = 0;

    static FastModU64 make(uint64_t s) {
        // floor((2^128 - 1)/S) + 1 == ceil(2^128/S) since S does not divide
        // 2^128 (S is not a power of two).
        u128 m = ~u128{0} / s + 1;
        return {static_cast<uint64_t>(m >> 64), static_cast<uint64_t>(m)};
    }

    uint64_t mod(uint64_t x, uint64_t s) const {
        uint64_t lb_lo = magic_lo * x;
        uint64_t lb_hi = magic_hi * x + mul_hi(magic_lo, x);
        u128 t = u128{lb_hi} * s + ((u128{lb_lo} * s) >> 64);
        return static_cast<uint64_t>(t >> 64);
    }
};

// Maps a well-mixed 64-bit word into [0, S).
class Reducer {
  public:
    Reducer() = default;

    explicit Reducer(uint64_t slots) : slots_(slots), pow2_(is_power_of_two(slots)) {
        if (slots == 0) throw std::invalid_argument("reduce: S must be positive");
        if (pow2_) {
            mask_ = slots - 1;
        } else {
            if (slots >= (uint64_t{1} << 32))
                throw std::invalid_argument("reduce: fastmod needs S < 2^32");
            fm_ = FastModU64::make(slots);
        }
    }

    uint64_t slots() const { return slots_; }
    bool uses_power_of_two() const { return pow2_; }
    uint64_t mask() const { return mask_; }
    const FastModU64& fastmod() const { return fm_; }

    uint64_t reduce(uint64_t x) const {
        if (pow2_) return mul_hi(kMixConstant, x) & mask_;
        return fm_.mod(x, slots_);
    }

  private:
    uint64_t slots_ = 1;
    uint64_t mask_ = 0;
    FastModU64 fm_;
    bool pow2_ = true;
};

}  // namespace ptrhash
