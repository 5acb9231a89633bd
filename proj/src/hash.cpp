#include "ptrhash/hash.hpp"

#include <cstring>

#if defined(__x86_64__)
#include <immintrin.h>
#endif

namespace ptrhash {

uint64_t mix_constant_inverse() {
    // Newton iteration doubles correct low bits each step; 6 steps cover 64.
    uint64_t c = kMixConstant;
    uint64_t inv = c;
    for (int i = 0; i < 6; i++) {
        inv *= 2 - c * inv;
    }
    return inv;
}

const char* hash_algo_name(HashAlgo a) {
    switch (a) {
        case HashAlgo::kFx64: return "fx64";
        case HashAlgo::kAes64: return "aes64";
        case HashAlgo::kAes128: return "aes128";
        case HashAlgo::kPortable64: return "portable64";
        case HashAlgo::kPortable128: return "portable128";
    }
    return "?";
}

bool cpu_has_aes() {
#if defined(__x86_64__)
    static const bool has = __builtin_cpu_supports("aes") && __builtin_cpu_supports("sse4.2");
    return has;
#else
    return false;
#endif
}

HashAlgo pick_string_hash(uint64_t n, bool force_wide) {
    const bool wide = force_wide || n >= (uint64_t{1} << 32);
    if (cpu_has_aes()) {
        return wide ? HashAlgo::kAes128 : HashAlgo::kAes64;
    }
    return wide ? HashAlgo::kPortable128 : HashAlgo::kPortable64;
}

namespace {

// ---- portable folded-multiply hash ----------------------------------------

inline uint64_t mum(uint64_t a, uint64_t b) {
    u128 r = u128{a} * b;
    return static_cast<uint64_t>(r) ^ static_cast<uint64_t>(r >> 64);
}

inline uint64_t read64(const uint8_t* p) {
    uint64_t v;
    std::memcpy(&v, p, 8);
    return v;
}

inline uint32_t read32(const uint8_t* p) {
    uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
}

// Reads 1..8 bytes without touching memory past p+len.
inline uint64_t read_tail(const uint8_t* p, size_t len) {
    if (len >= 4) {
        uint64_t a = read32(p);
        uint64_t b = read32(p + len - 4);
        return a | (b << 32);
    }
    uint64_t v = p[0];
    v |= uint64_t{p[len >> 1]} << 8;
    v |= uint64_t{p[len - 1]} << 16;
    return v;
}

constexpr uint64_t kP1 = 0x8bb84b93962eacc9ULL;
constexpr uint64_t kP2 = 0x2d358dccaa6c78a5ULL;
constexpr uint64_t kP3 = 0x4b33a62ed433d4a3ULL;

uint64_t portable_hash64(const uint8_t* p, size_t len, uint64_t seed) {
    uint64_t acc = seed ^ mum(uint64_t{len} ^ kP1, seed ^ kP2);
    size_t i = 0;
    while (i + 16 <= len) {
        acc = mum(read64(p + i) ^ kP1, read64(p + i + 8) ^ acc);
        i += 16;
    }
    uint64_t a = 0;
    uint64_t b = 0;
    if (len - i > 8) {
        a = read64(p + i);
        b = read_tail(p + i + 8, len - i - 8);
    } else if (len > i) {
        a = read_tail(p + i, len - i);
    }
    acc = mum(a ^ kP2 ^ uint64_t{len}, b ^ acc ^ kP3);
    return mum(acc, acc ^ kP1);
}

// ---- AES-NI hash -----------------------------------------------------------
//
// State/key schedule derived from the seed and length; one aesenc round per
// 16-byte block plus a 3-round finalizer. Tail blocks are zero padded; the
// length is folded into the initial state so distinct lengths diverge.

#if defined(__x86_64__)

__attribute__((target("aes,sse4.2"))) __m128i aes_core(const uint8_t* p, size_t len,
                                                       uint64_t seed) {
    const __m128i k0 = _mm_set_epi64x(static_cast<long long>(seed ^ kP1),
                                      static_cast<long long>(seed + kGoldenGamma));
    const __m128i k1 = _mm_set_epi64x(static_cast<long long>(mix64(seed) ^ kP2),
                                      static_cast<long long>(~seed * 0x6c62272e07bb0143ULL));
    __m128i state = _mm_set_epi64x(static_cast<long long>(uint64_t{len} * kMixConstant),
                                   static_cast<long long>(seed ^ uint64_t{len}));
    state = _mm_aesenc_si128(state, k0);

    size_t i = 0;
    while (i + 16 <= len) {
        __m128i block = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p + i));
        state = _mm_aesenc_si128(_mm_xor_si128(state, block), k1);
        i += 16;
    }
    if (i < len) {
        alignas(16) uint8_t buf[16] = {0};
        std::memcpy(buf, p + i, len - i);
        buf[15] ^= static_cast<uint8_t>(len - i);
        __m128i block = _mm_load_si128(reinterpret_cast<const __m128i*>(buf));
        state = _mm_aesenc_si128(_mm_xor_si128(state, block), k1);
    }

    state = _mm_aesenc_si128(state, k0);
    state = _mm_aesenc_si128(state, k1);
    return _mm_aesenclast_si128(state, k0);
}

__attribute__((target("aes,sse4.2"))) HashValue aes_hash(const uint8_t* p, size_t len,
                                                         uint64_t seed, bool wide) {
    __m128i st = aes_core(p, len, seed);
    uint64_t lo = static_cast<uint64_t>(_mm_cvtsi128_si64(st));
    uint64_t hi = static_cast<uint64_t>(_mm_extract_epi64(st, 1));
    if (!wide) {
        uint64_t h = hi ^ (lo * kMixConstant);
        return {h, h};
    }
    return {hi, lo};
}

#endif  // __x86_64__

}  // namespace

HashValue hash_bytes(const void* data, size_t len, uint64_t seed, HashAlgo algo) {
    const uint8_t* p = static_cast<const uint8_t*>(data);
    switch (algo) {
        case HashAlgo::kFx64: {
            // Byte strings are not expected here; hash the bytes as a 64-bit
            // word stream for completeness.
            uint64_t h = portable_hash64(p, len, seed);
            return {h, h};
        }
#if defined(__x86_64__)
        case HashAlgo::kAes64:
            return aes_hash(p, len, seed, false);
        case HashAlgo::kAes128:
            return aes_hash(p, len, seed, true);
#else
        case HashAlgo::kAes64:
        case HashAlgo::kAes128:
            // No AES hardware: indexes built with these ids are not portable
            // to this machine, and pick_string_hash() never returns them here.
            return {0, 0};
#endif
        case HashAlgo::kPortable64: {
            uint64_t h = portable_hash64(p, len, seed);
            return {h, h};
        }
        case HashAlgo::kPortable128: {
            // Two decorrelated passes; the halves act as independent
            // fingerprints.
            uint64_t hi = portable_hash64(p, len, seed ^ kP3);
            uint64_t lo = portable_hash64(p, len, mix64(seed) + kGoldenGamma);
            return {hi, lo};
        }
    }
    return {0, 0};
}

}  // namespace ptrhash
