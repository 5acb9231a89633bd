#pragma once

#include <cstdint>

#include "ptrhash/common.hpp"
#include "ptrhash/shape.hpp"

namespace ptrhash {

// Bucket assignment functions map a 64-bit fixed-point fraction of the key's
// position within its part to a 64-bit fixed-point fraction of the bucket
// range. All of them are monotone non-decreasing, so sorting hashes also
// sorts buckets. Functions below the identity over-weight early buckets,
// which makes the large buckets land first during construction.

namespace gamma {

inline uint64_t linear(uint64_t x) { return x; }

inline uint64_t quadratic(uint64_t x) { return mul_hi(x, x); }

// (255/256)*(x^2 + x^3)/2 + x/256, all products 64x64 -> 128 with truncating
// division. The x/256 term keeps the slope at least 1/256 near zero so the
// first buckets cannot grow without bound.
inline uint64_t cubic(uint64_t x) {
    const uint64_t x2 = mul_hi(x, x);
    const uint64_t x3 = mul_hi(x2, x);
    const uint64_t half = static_cast<uint64_t>((u128{x2} + x3) >> 1);
    return static_cast<uint64_t>((u128{half} * 255) >> 8) + (x >> 8);
}

// Piecewise linear: the first 60% of the domain maps onto the first 30% of
// the range, so 60% of the keys land in 30% of the buckets.
inline constexpr uint64_t kSkewSplitX = static_cast<uint64_t>((u128{3} << 64) / 5);
inline constexpr uint64_t kSkewSplitY = static_cast<uint64_t>((u128{3} << 64) / 10);

inline uint64_t skewed(uint64_t x) {
    if (x < kSkewSplitX) return x >> 1;  // slope 0.3/0.6
    return kSkewSplitY + static_cast<uint64_t>((u128{x - kSkewSplitX} * 7) >> 2);  // slope 0.7/0.4
}

// x + (1-eps)*(1-x)*ln(1-x) with eps = 1/2^8, via a 2^16-entry fixed-point
// table (filled once with double-precision ln, monotonized by running max)
// and exact integer interpolation. Monotone by construction.
uint64_t optimal(uint64_t x);

}  // namespace gamma

inline uint64_t gamma_eval(BucketFnKind kind, uint64_t x) {
    switch (kind) {
        case BucketFnKind::kLinear: return gamma::linear(x);
        case BucketFnKind::kQuadratic: return gamma::quadratic(x);
        case BucketFnKind::kCubic: return gamma::cubic(x);
        case BucketFnKind::kSkewed: return gamma::skewed(x);
        case BucketFnKind::kOptimal: return gamma::optimal(x);
    }
    return x;
}

struct PartAndBucket {
    uint64_t part;
    uint64_t bucket;
};

// part = hi(P*h), x = lo(P*h), bucket = hi(B*gamma(x)).
inline PartAndBucket part_and_bucket(uint64_t hash_hi, const Shape& shape, BucketFnKind kind) {
    const u128 prod = u128{shape.parts} * hash_hi;
    const uint64_t part = static_cast<uint64_t>(prod >> 64);
    const uint64_t x = static_cast<uint64_t>(prod);
    const uint64_t bucket = mul_hi(shape.buckets_per_part, gamma_eval(kind, x));
    return {part, bucket};
}

// part * B + bucket, the pilot array position.
inline uint64_t global_bucket(uint64_t hash_hi, const Shape& shape, BucketFnKind kind) {
    const PartAndBucket pb = part_and_bucket(hash_hi, shape, kind);
    return pb.part * shape.buckets_per_part + pb.bucket;
}

}  // namespace ptrhash
