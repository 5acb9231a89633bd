#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

#include "ptrhash/common.hpp"
#include "ptrhash/reduce.hpp"

namespace ptrhash {

// Exact small rational, so shape computation is deterministic across
// platforms (no float rounding in the ceil formulas).
struct Ratio {
    uint32_t num = 0;
    uint32_t den = 1;

    double value() const { return static_cast<double>(num) / den; }
    friend bool operator==(const Ratio&, const Ratio&) = default;
};

enum class BucketFnKind : uint8_t {
    kLinear = 0,
    kQuadratic = 1,
    kCubic = 2,
    kSkewed = 3,
    kOptimal = 4,
};

enum class RemapKind : uint8_t {
    kPlainArray32 = 0,
    kCacheLineEF = 1,
    kEliasFano = 2,
};

const char* bucket_fn_name(BucketFnKind k);
const char* remap_kind_name(RemapKind k);
BucketFnKind bucket_fn_from_name(std::string_view name);
RemapKind remap_kind_from_name(std::string_view name);

inline constexpr uint64_t kDefaultSeed = 0x9e3779b97f4a7c15ULL;

struct BuildParams {
    Ratio alpha{99, 100};        // load factor in (0, 1]
    Ratio lambda{35, 10};        // expected bucket size, around 2.7 - 4.2
    BucketFnKind bucket_fn = BucketFnKind::kCubic;
    RemapKind remap_kind = RemapKind::kCacheLineEF;
    ReduceKind reduce_kind = ReduceKind::kFastModMultiPart;
    uint32_t lookahead = 32;     // streaming prefetch distance
    uint64_t seed = kDefaultSeed;
    uint32_t max_seed_retries = 10;

    // Throws std::invalid_argument on violated invariants.
    void validate() const;
};

// Named parameter sets:
//   fast:    linear bucket fn, lambda 3.0, alpha 0.99, plain remap array
//   default: cubic  bucket fn, lambda 3.5, alpha 0.99, CacheLineEF remap
//   compact: cubic  bucket fn, lambda 4.0, alpha 0.99, CacheLineEF remap
BuildParams preset(std::string_view name);

// Global layout: P parts, each with S slots and B buckets.
struct Shape {
    uint64_t n = 0;
    uint64_t parts = 0;             // P
    uint64_t slots_per_part = 0;    // S
    uint64_t buckets_per_part = 0;  // B

    uint64_t total_slots() const { return parts * slots_per_part; }
    uint64_t total_buckets() const { return parts * buckets_per_part; }

    friend bool operator==(const Shape&, const Shape&) = default;
};

// Target number of keys per part. For alpha = 0.99 this is
// max(80000, ceil(80000*ln(n/80000))); the general form uses
// eps = (1-alpha)/2 and the bound keys/part >= (2/eps^2)*ln(n*eps^2/2),
// which keeps the probability of any part exceeding its S slots small.
uint64_t keys_per_part(uint64_t n, Ratio alpha);

// Computes (P, S, B) from n and the parameters.
//
//   kPowerOfTwoMul:     S = smallest power of two >= keys_per_part/alpha,
//                       P = ceil(n/(alpha*S)).
//   kFastModSinglePart: P = 1, S = smallest non-power-of-two >= n/alpha.
//   kFastModMultiPart:  P = ceil(n/keys_per_part) rounded up to a multiple of
//                       part_multiple, S = smallest non-power-of-two >=
//                       n/(alpha*P). Keeps the realized load at alpha.
//
// In every mode B = ceil(alpha*S/lambda) and P*alpha*S >= n. P uses ceil
// throughout. part_multiple > 1 is used by sharded construction so that part
// hash intervals nest inside shard intervals.
Shape compute_shape(uint64_t n, const BuildParams& params, uint64_t part_multiple = 1);

}  // namespace ptrhash
