#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptrhash/bucket_fn.hpp"
#include "ptrhash/hash.hpp"
#include "ptrhash/kernels.hpp"
#include "ptrhash/reduce.hpp"
#include "ptrhash/remap.hpp"
#include "ptrhash/shape.hpp"

namespace ptrhash {

enum class KeyKind : uint8_t {
    kU64 = 0,
    kBytes = 1,
};

const char* key_kind_name(KeyKind k);

// The finished minimal perfect hash function: one byte-sized pilot per bucket
// plus a remap table folding overflow slots back under n.
//
// index() is only defined for the keys the structure was built on. Querying
// any other key returns an arbitrary value in [0, n) with no error — there is
// no membership information stored at all. Callers needing membership must
// keep it elsewhere.
class PtrHashIndex {
  public:
    PtrHashIndex() = default;

    PtrHashIndex(const Shape& shape, const BuildParams& params, uint64_t seed,
                 KeyKind key_kind, HashAlgo hash_algo, std::vector<uint8_t> pilots,
                 RemapTable remap)
        : shape_(shape),
          params_(params),
          seed_(seed),
          key_kind_(key_kind),
          hash_algo_(hash_algo),
          pilots_(std::move(pilots)),
          remap_(std::move(remap)),
          reducer_(shape.slots_per_part) {}

    uint64_t n() const { return shape_.n; }
    const Shape& shape() const { return shape_; }
    const BuildParams& params() const { return params_; }
    uint64_t seed() const { return seed_; }
    KeyKind key_kind() const { return key_kind_; }
    HashAlgo hash_algo() const { return hash_algo_; }
    const std::vector<uint8_t>& pilots() const { return pilots_; }
    const RemapTable& remap() const { return remap_; }
    const Reducer& reducer() const { return reducer_; }

    // ---- single-key queries ----

    uint64_t index_no_remap(uint64_t key) const { return slot_of(hash_u64(key)); }
    uint64_t index_no_remap(std::string_view key) const { return slot_of(hash_str(key)); }

    uint64_t index(uint64_t key) const { return remap_slot(slot_of(hash_u64(key))); }
    uint64_t index(std::string_view key) const { return remap_slot(slot_of(hash_str(key))); }

    // ---- sequence queries ----
    //
    // All modes produce identical outputs in input order; they differ only in
    // how memory latency is hidden. minimal=false skips the remap (a perfect
    // but non-minimal hash into [P*S)).

    void index_loop(std::span<const uint64_t> keys, uint64_t* out, bool minimal = true) const;
    void index_batched(std::span<const uint64_t> keys, size_t batch_size, uint64_t* out,
                       bool minimal = true) const;
    void index_stream(std::span<const uint64_t> keys, size_t lookahead, uint64_t* out,
                      bool minimal = true) const;

    void index_loop(std::span<const std::string> keys, uint64_t* out, bool minimal = true) const;
    void index_batched(std::span<const std::string> keys, size_t batch_size, uint64_t* out,
                       bool minimal = true) const;
    void index_stream(std::span<const std::string> keys, size_t lookahead, uint64_t* out,
                      bool minimal = true) const;

    // Hash of a key under this index's seed and algorithm.
    HashValue hash_u64(uint64_t key) const {
        const uint64_t h = hash_int(key, seed_);
        return {h, h};
    }
    HashValue hash_str(std::string_view key) const { return hash_bytes(key, seed_, hash_algo_); }

    uint64_t slot_of(HashValue h) const {
        const PartAndBucket pb = part_and_bucket(h.hi, shape_, params_.bucket_fn);
        const uint8_t pilot = pilots_[pb.part * shape_.buckets_per_part + pb.bucket];
        return pb.part * shape_.slots_per_part +
               reducer_.reduce(h.lo ^ hash_pilot(pilot, seed_));
    }

    uint64_t remap_slot(uint64_t slot) const {
        return slot < shape_.n ? slot : remap_.get(slot - shape_.n);
    }

  private:
    template <class Key>
    void stream_impl(std::span<const Key> keys, size_t lookahead, uint64_t* out,
                     bool minimal) const;

    Shape shape_;
    BuildParams params_;
    uint64_t seed_ = 0;
    KeyKind key_kind_ = KeyKind::kU64;
    HashAlgo hash_algo_ = HashAlgo::kFx64;
    std::vector<uint8_t> pilots_;
    RemapTable remap_;
    Reducer reducer_;
};

}  // namespace ptrhash
