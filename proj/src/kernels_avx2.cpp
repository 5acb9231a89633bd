#if defined(__x86_64__)

#include <immintrin.h>

#include <cstring>

#include "ptrhash/hash.hpp"
#include "ptrhash/kernels.hpp"

#define PH_AVX2 __attribute__((target("avx2")))

namespace ptrhash::kernels {

namespace {

// 64x64 multiplies per 64-bit lane, built from 32x32->64 partial products.

PH_AVX2 inline __m256i mul_lo64(__m256i a, __m256i b) {
    const __m256i a_hi = _mm256_srli_epi64(a, 32);
    const __m256i b_hi = _mm256_srli_epi64(b, 32);
    const __m256i ll = _mm256_mul_epu32(a, b);
    const __m256i cross = _mm256_add_epi64(_mm256_mul_epu32(a, b_hi), _mm256_mul_epu32(a_hi, b));
    return _mm256_add_epi64(ll, _mm256_slli_epi64(cross, 32));
}

PH_AVX2 inline __m256i mul_hi64(__m256i a, __m256i b) {
    const __m256i mask32 = _mm256_set1_epi64x(0xffffffff);
    const __m256i a_hi = _mm256_srli_epi64(a, 32);
    const __m256i b_hi = _mm256_srli_epi64(b, 32);
    const __m256i ll = _mm256_mul_epu32(a, b);
    const __m256i lh = _mm256_mul_epu32(a, b_hi);
    const __m256i hl = _mm256_mul_epu32(a_hi, b);
    const __m256i hh = _mm256_mul_epu32(a_hi, b_hi);
    const __m256i carry = _mm256_srli_epi64(
        _mm256_add_epi64(_mm256_add_epi64(_mm256_srli_epi64(ll, 32),
                                          _mm256_and_si256(lh, mask32)),
                         _mm256_and_si256(hl, mask32)),
        32);
    return _mm256_add_epi64(
        hh, _mm256_add_epi64(_mm256_add_epi64(_mm256_srli_epi64(lh, 32),
                                              _mm256_srli_epi64(hl, 32)),
                             carry));
}

// a < b, unsigned, as 0/1 per lane.
PH_AVX2 inline __m256i lt_u64(__m256i a, __m256i b) {
    const __m256i sign = _mm256_set1_epi64x(static_cast<long long>(0x8000000000000000ULL));
    const __m256i lt = _mm256_cmpgt_epi64(_mm256_xor_si256(b, sign), _mm256_xor_si256(a, sign));
    return _mm256_srli_epi64(lt, 63);
}

PH_AVX2 void hash_u64_avx2(const uint64_t* keys, size_t n, uint64_t seed, uint64_t* out) {
    const __m256i c = _mm256_set1_epi64x(static_cast<long long>(kMixConstant));
    const __m256i s = _mm256_set1_epi64x(static_cast<long long>(seed));
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i k = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(keys + i));
        __m256i h = mul_lo64(c, _mm256_xor_si256(k, s));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), h);
    }
    for (; i < n; i++) out[i] = kMixConstant * (keys[i] ^ seed);
}

// gamma fixed-point evaluation; matches the scalar definitions bit for bit.
PH_AVX2 inline __m256i gamma_vec(BucketFnKind fn, __m256i x) {
    switch (fn) {
        case BucketFnKind::kLinear:
            return x;
        case BucketFnKind::kQuadratic:
            return mul_hi64(x, x);
        case BucketFnKind::kCubic: {
            const __m256i one = _mm256_set1_epi64x(1);
            const __m256i m255 = _mm256_set1_epi64x(255);
            const __m256i x2 = mul_hi64(x, x);
            const __m256i x3 = mul_hi64(x2, x);
            // (x2+x3)/2 without the 65-bit overflow
            const __m256i half = _mm256_add_epi64(
                _mm256_add_epi64(_mm256_srli_epi64(x2, 1), _mm256_srli_epi64(x3, 1)),
                _mm256_and_si256(_mm256_and_si256(x2, x3), one));
            // (half*255)>>8 == 255*(half>>8) + (255*(half&255))>>8, exactly
            const __m256i hi_part = mul_lo64(_mm256_srli_epi64(half, 8), m255);
            const __m256i lo_part = _mm256_srli_epi64(
                mul_lo64(_mm256_and_si256(half, m255), m255), 8);
            return _mm256_add_epi64(_mm256_add_epi64(hi_part, lo_part),
                                    _mm256_srli_epi64(x, 8));
        }
        default:
            return x;  // unreachable; non-SIMD kinds take the scalar path
    }
}

PH_AVX2 void global_bucket_avx2(const uint64_t* hashes, size_t n, const BucketKernelParams& p,
                                uint64_t* out) {
    if (p.fn != BucketFnKind::kLinear && p.fn != BucketFnKind::kQuadratic &&
        p.fn != BucketFnKind::kCubic) {
        scalar_ops().global_bucket(hashes, n, p, out);
        return;
    }
    const __m256i parts = _mm256_set1_epi64x(static_cast<long long>(p.parts));
    const __m256i buckets = _mm256_set1_epi64x(static_cast<long long>(p.buckets_per_part));
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i h = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(hashes + i));
        __m256i part = mul_hi64(parts, h);
        __m256i x = mul_lo64(parts, h);
        __m256i bucket = mul_hi64(buckets, gamma_vec(p.fn, x));
        __m256i g = _mm256_add_epi64(mul_lo64(part, buckets), bucket);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), g);
    }
    if (i < n) scalar_ops().global_bucket(hashes + i, n - i, p, out + i);
}

PH_AVX2 void slot_avx2(const uint64_t* hashes, const uint8_t* pilots, size_t n,
                       const SlotKernelParams& p, uint64_t* out) {
    const __m256i c = _mm256_set1_epi64x(static_cast<long long>(kMixConstant));
    const __m256i parts = _mm256_set1_epi64x(static_cast<long long>(p.parts));
    const __m256i slots = _mm256_set1_epi64x(static_cast<long long>(p.slots_per_part));
    const __m256i seed = _mm256_set1_epi64x(static_cast<long long>(p.seed));
    const __m256i mask = _mm256_set1_epi64x(static_cast<long long>(p.mask));
    const __m256i m_hi = _mm256_set1_epi64x(static_cast<long long>(p.magic_hi));
    const __m256i m_lo = _mm256_set1_epi64x(static_cast<long long>(p.magic_lo));

    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i h = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(hashes + i));
        uint32_t packed;
        std::memcpy(&packed, pilots + i, 4);
        __m256i pil = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(static_cast<int>(packed)));
        __m256i hp = mul_lo64(c, _mm256_xor_si256(pil, seed));
        __m256i x = _mm256_xor_si256(h, hp);
        __m256i part = mul_hi64(parts, h);
        __m256i r;
        if (p.pow2) {
            r = _mm256_and_si256(mul_hi64(c, x), mask);
        } else {
            // fastmod: lowbits = magic*x mod 2^128; r = hi128(lowbits*S)
            __m256i lb_lo = mul_lo64(m_lo, x);
            __m256i lb_hi = _mm256_add_epi64(mul_lo64(m_hi, x), mul_hi64(m_lo, x));
            __m256i t1 = mul_hi64(lb_lo, slots);
            __m256i t2_lo = mul_lo64(lb_hi, slots);
            __m256i t2_hi = mul_hi64(lb_hi, slots);
            __m256i sum = _mm256_add_epi64(t2_lo, t1);
            r = _mm256_add_epi64(t2_hi, lt_u64(sum, t1));
        }
        __m256i s = _mm256_add_epi64(mul_lo64(part, slots), r);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), s);
    }
    if (i < n) scalar_ops().slot(hashes + i, pilots + i, n - i, p, out + i);
}

}  // namespace

bool cpu_has_avx2() { return __builtin_cpu_supports("avx2"); }

const Ops& avx2_ops() {
    static constexpr Ops ops{"avx2", hash_u64_avx2, global_bucket_avx2, slot_avx2};
    return ops;
}

}  // namespace ptrhash::kernels

#endif  // __x86_64__
