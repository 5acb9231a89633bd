#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "ptrhash/common.hpp"

namespace ptrhash {

// Fixed odd mixing constant (the 64-bit FxHash multiplier). Pinned so that
// serialized indexes are reproducible.
inline constexpr uint64_t kMixConstant = 0x517cc1b727220a95ULL;

// A key fingerprint. The high word selects the part and bucket, the low word
// selects the slot. 64-bit hashes store the same word in both halves.
struct HashValue {
    uint64_t hi;
    uint64_t lo;

    friend bool operator==(const HashValue&, const HashValue&) = default;
    friend auto operator<=>(const HashValue&, const HashValue&) = default;
};

// Integer key hash: C*(key ^ seed) mod 2^64. Multiplication by an odd
// constant is invertible mod 2^64, so for a fixed seed this is injective.
inline uint64_t hash_int(uint64_t key, uint64_t seed) { return kMixConstant * (key ^ seed); }

// Pilot hash: C*(p ^ seed) mod 2^64 for p in [0,256).
inline uint64_t hash_pilot(uint64_t pilot, uint64_t seed) {
    return kMixConstant * (pilot ^ seed);
}

// Multiplicative inverse of the mixing constant mod 2^64 (C is odd).
uint64_t mix_constant_inverse();

enum class HashAlgo : uint8_t {
    kFx64 = 0,        // integer keys
    kAes64 = 1,       // byte strings, AES-NI compression, 64-bit fingerprint
    kAes128 = 2,      // byte strings, AES-NI compression, 128-bit fingerprint
    kPortable64 = 3,  // byte strings, folded-multiply fallback, 64-bit
    kPortable128 = 4, // byte strings, folded-multiply fallback, 128-bit
};

const char* hash_algo_name(HashAlgo a);

bool cpu_has_aes();

// Seeded fingerprint of a byte string; `width` is 64 or 128. The 64-bit
// variants return hi == lo.
HashValue hash_bytes(const void* data, size_t len, uint64_t seed, HashAlgo algo);

inline HashValue hash_bytes(std::string_view s, uint64_t seed, HashAlgo algo) {
    return hash_bytes(s.data(), s.size(), seed, algo);
}

// Picks the string hash for a key set of size n: 128-bit fingerprints once
// 64-bit collisions become likely (n >= 2^32), AES hardware when present.
HashAlgo pick_string_hash(uint64_t n, bool force_wide = false);

inline bool hash_algo_is_wide(HashAlgo a) {
    return a == HashAlgo::kAes128 || a == HashAlgo::kPortable128;
}

}  // namespace ptrhash
