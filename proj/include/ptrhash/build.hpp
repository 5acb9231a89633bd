#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptrhash/index.hpp"

namespace ptrhash {

struct BuildStats {
    uint64_t n = 0;
    Shape shape;
    uint64_t seed = 0;  // the seed the successful attempt used
    uint32_t attempts = 0;
    KeyKind key_kind = KeyKind::kU64;
    HashAlgo hash_algo = HashAlgo::kFx64;
    BucketFnKind bucket_fn = BucketFnKind::kLinear;
    RemapKind remap_kind = RemapKind::kPlainArray32;  // actual, after any fallback
    ReduceKind reduce_kind = ReduceKind::kFastModMultiPart;
    bool remap_fell_back = false;

    uint64_t total_evictions = 0;
    // Evictions attributed to the percentile of buckets placed when they
    // happened; the tail tells how hard the end of construction was.
    std::array<uint64_t, 100> evictions_by_percentile{};
    std::vector<uint64_t> bucket_size_counts;  // index = bucket size

    uint64_t pilot_bytes = 0;
    uint64_t remap_payload_bytes = 0;

    double hash_ns_per_key = 0;
    double sort_ns_per_key = 0;
    double search_ns_per_key = 0;
    double remap_ns_per_key = 0;
    double total_ns_per_key = 0;

    double pilots_bits_per_key() const { return n ? 8.0 * double(pilot_bytes) / double(n) : 0; }
    double remap_bits_per_key() const {
        return n ? 8.0 * double(remap_payload_bytes) / double(n) : 0;
    }
    double total_bits_per_key() const { return pilots_bits_per_key() + remap_bits_per_key(); }
};

class BuildError : public std::runtime_error {
  public:
    enum class Code {
        kDuplicateKeys,  // two equal keys in the input
        kFailed,         // every seed attempt failed
        kInvalid,        // bad parameters / inputs
    };

    BuildError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

  private:
    Code code_;
};

// Deterministic reseed chain used between failed attempts.
inline uint64_t next_seed(uint64_t seed, uint32_t attempt) {
    return hash_int(seed ^ attempt, kGoldenGamma);
}

// Builds the index over distinct 64-bit keys. threads = 0 picks the hardware
// concurrency; the result is identical for any thread count.
PtrHashIndex build(std::span<const uint64_t> keys, const BuildParams& params,
                   unsigned threads = 0, BuildStats* stats = nullptr);

// Builds over distinct byte-string keys. Fingerprint collisions retry with a
// fresh seed and escalate to 128-bit hashes after repeated failures.
PtrHashIndex build(std::span<const std::string> keys, const BuildParams& params,
                   unsigned threads = 0, BuildStats* stats = nullptr);

// Builds with an explicit layout instead of compute_shape(). Intended for
// experiments and tests (e.g. forcing S or tiny part counts); the shape must
// still satisfy P*S >= n.
PtrHashIndex build_with_shape(std::span<const uint64_t> keys, const BuildParams& params,
                              const Shape& shape, unsigned threads = 0,
                              BuildStats* stats = nullptr);

}  // namespace ptrhash
