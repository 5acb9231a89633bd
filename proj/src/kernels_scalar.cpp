#include "ptrhash/bucket_fn.hpp"
#include "ptrhash/hash.hpp"
#include "ptrhash/kernels.hpp"
#include "ptrhash/reduce.hpp"

namespace ptrhash::kernels {

namespace {

void hash_u64_scalar(const uint64_t* keys, size_t n, uint64_t seed, uint64_t* out) {
    for (size_t i = 0; i < n; i++) out[i] = kMixConstant * (keys[i] ^ seed);
}

void global_bucket_scalar(const uint64_t* hashes, size_t n, const BucketKernelParams& p,
                          uint64_t* out) {
    for (size_t i = 0; i < n; i++) {
        const u128 prod = u128{p.parts} * hashes[i];
        const uint64_t part = static_cast<uint64_t>(prod >> 64);
        const uint64_t x = static_cast<uint64_t>(prod);
        out[i] = part * p.buckets_per_part + mul_hi(p.buckets_per_part, gamma_eval(p.fn, x));
    }
}

void slot_scalar(const uint64_t* hashes, const uint8_t* pilots, size_t n,
                 const SlotKernelParams& p, uint64_t* out) {
    if (p.pow2) {
        for (size_t i = 0; i < n; i++) {
            const uint64_t part = mul_hi(p.parts, hashes[i]);
            const uint64_t x = hashes[i] ^ (kMixConstant * (uint64_t{pilots[i]} ^ p.seed));
            out[i] = part * p.slots_per_part + (mul_hi(kMixConstant, x) & p.mask);
        }
    } else {
        for (size_t i = 0; i < n; i++) {
            const uint64_t part = mul_hi(p.parts, hashes[i]);
            const uint64_t x = hashes[i] ^ (kMixConstant * (uint64_t{pilots[i]} ^ p.seed));
            const uint64_t lb_lo = p.magic_lo * x;
            const uint64_t lb_hi = p.magic_hi * x + mul_hi(p.magic_lo, x);
            const u128 t = u128{lb_hi} * p.slots_per_part +
                           ((u128{lb_lo} * p.slots_per_part) >> 64);
            out[i] = part * p.slots_per_part + static_cast<uint64_t>(t >> 64);
        }
    }
}

}  // namespace

const Ops& scalar_ops() {
    static constexpr Ops ops{"scalar", hash_u64_scalar, global_bucket_scalar, slot_scalar};
    return ops;
}

}  // namespace ptrhash::kernels
