#pragma once

#include <cstddef>
#include <cstdint>

#include "ptrhash/shape.hpp"

namespace ptrhash::kernels {

// Batch kernels for the 64-bit-key query path: hashing, bucket addressing and
// slot computation over arrays of keys. A scalar reference implementation
// always exists; on x86-64 an AVX2 variant is selected at runtime (4 keys per
// lane group, 64x64 multiplies emulated with 32-bit partial products). The
// variants are equivalence-tested against the scalar kernels.

struct BucketKernelParams {
    uint64_t parts = 1;
    uint64_t buckets_per_part = 1;
    BucketFnKind fn = BucketFnKind::kLinear;
};

struct SlotKernelParams {
    uint64_t parts = 1;
    uint64_t slots_per_part = 1;
    bool pow2 = true;
    uint64_t mask = 0;      // S-1 when pow2
    uint64_t magic_hi = 0;  // fastmod magic otherwise
    uint64_t magic_lo = 0;
    uint64_t seed = 0;
};

struct Ops {
    const char* name;
    // out[i] = C*(keys[i] ^ seed)
    void (*hash_u64)(const uint64_t* keys, size_t n, uint64_t seed, uint64_t* out);
    // out[i] = part(hashes[i])*B + bucket(hashes[i])
    void (*global_bucket)(const uint64_t* hashes, size_t n, const BucketKernelParams& p,
                          uint64_t* out);
    // out[i] = part*S + reduce(hashes[i] ^ C*(pilots[i] ^ seed), S)
    void (*slot)(const uint64_t* hashes, const uint8_t* pilots, size_t n,
                 const SlotKernelParams& p, uint64_t* out);
};

const Ops& scalar_ops();
#if defined(__x86_64__)
const Ops& avx2_ops();
bool cpu_has_avx2();
#endif

// Best kernels for this machine. PTRHASH_KERNELS=scalar|avx2 overrides.
const Ops& active_ops();

inline SlotKernelParams slot_params(const Shape& shape, const Reducer& r, uint64_t seed) {
    SlotKernelParams p;
    p.parts = shape.parts;
    p.slots_per_part = shape.slots_per_part;
    p.pow2 = r.uses_power_of_two();
    p.mask = r.mask();
    p.magic_hi = r.fastmod().magic_hi;
    p.magic_lo = r.fastmod().magic_lo;
    p.seed = seed;
    return p;
}

}  // namespace ptrhash::kernels
