#include "ptrhash/index.hpp"

#include <algorithm>

namespace ptrhash {

const char* key_kind_name(KeyKind k) {
    switch (k) {
        case KeyKind::kU64: return "u64";
        case KeyKind::kBytes: return "str";
    }
    return "?";
}

void PtrHashIndex::index_loop(std::span<const uint64_t> keys, uint64_t* out,
                              bool minimal) const {
    if (minimal) {
        for (size_t i = 0; i < keys.size(); i++) out[i] = index(keys[i]);
    } else {
        for (size_t i = 0; i < keys.size(); i++) out[i] = index_no_remap(keys[i]);
    }
}

void PtrHashIndex::index_loop(std::span<const std::string> keys, uint64_t* out,
                              bool minimal) const {
    if (minimal) {
        for (size_t i = 0; i < keys.size(); i++) out[i] = index(keys[i]);
    } else {
        for (size_t i = 0; i < keys.size(); i++) out[i] = index_no_remap(keys[i]);
    }
}

// Two passes per batch: pass one hashes, computes the pilot position and
// prefetches its cache line; pass two reads the (now cached) pilots and
// computes slots. The arithmetic runs through the batch kernels.
void PtrHashIndex::index_batched(std::span<const uint64_t> keys, size_t batch_size,
                                 uint64_t* out, bool minimal) const {
    batch_size = std::clamp<size_t>(batch_size, 1, std::max<size_t>(1, keys.size()));
    const auto& ops = kernels::active_ops();
    const kernels::BucketKernelParams bp{shape_.parts, shape_.buckets_per_part,
                                         params_.bucket_fn};
    const kernels::SlotKernelParams sp = kernels::slot_params(shape_, reducer_, seed_);

    std::vector<uint64_t> hashes(batch_size);
    std::vector<uint64_t> buckets(batch_size);
    std::vector<uint8_t> pilot_buf(batch_size + 8, 0);
    std::vector<uint64_t> slots(batch_size);

    for (size_t base = 0; base < keys.size(); base += batch_size) {
        const size_t m = std::min(batch_size, keys.size() - base);
        ops.hash_u64(keys.data() + base, m, seed_, hashes.data());
        ops.global_bucket(hashes.data(), m, bp, buckets.data());
        for (size_t i = 0; i < m; i++) prefetch_read(&pilots_[buckets[i]]);
        for (size_t i = 0; i < m; i++) pilot_buf[i] = pilots_[buckets[i]];
        ops.slot(hashes.data(), pilot_buf.data(), m, sp, slots.data());
        if (minimal) {
            for (size_t i = 0; i < m; i++) out[base + i] = remap_slot(slots[i]);
        } else {
            for (size_t i = 0; i < m; i++) out[base + i] = slots[i];
        }
    }
}

void PtrHashIndex::index_batched(std::span<const std::string> keys, size_t batch_size,
                                 uint64_t* out, bool minimal) const {
    batch_size = std::clamp<size_t>(batch_size, 1, std::max<size_t>(1, keys.size()));
    std::vector<HashValue> hashes(batch_size);
    std::vector<uint64_t> parts(batch_size);
    std::vector<uint64_t> buckets(batch_size);

    for (size_t base = 0; base < keys.size(); base += batch_size) {
        const size_t m = std::min(batch_size, keys.size() - base);
        for (size_t i = 0; i < m; i++) {
            hashes[i] = hash_str(keys[base + i]);
            const PartAndBucket pb = part_and_bucket(hashes[i].hi, shape_, params_.bucket_fn);
            parts[i] = pb.part;
            buckets[i] = pb.part * shape_.buckets_per_part + pb.bucket;
            prefetch_read(&pilots_[buckets[i]]);
        }
        for (size_t i = 0; i < m; i++) {
            const uint8_t pilot = pilots_[buckets[i]];
            uint64_t slot = parts[i] * shape_.slots_per_part +
                            reducer_.reduce(hashes[i].lo ^ hash_pilot(pilot, seed_));
            out[base + i] = minimal ? remap_slot(slot) : slot;
        }
    }
}

namespace {

struct PendingQuery {
    HashValue hash;
    uint64_t part;
    uint64_t bucket;
};

}  // namespace

// Ring of `lookahead` pre-hashed keys; each step prefetches the pilot line
// `lookahead` iterations ahead and answers the oldest pending query.
template <class Key>
void PtrHashIndex::stream_impl(std::span<const Key> keys, size_t lookahead, uint64_t* out,
                               bool minimal) const {
    if (lookahead < 1) lookahead = 1;
    const size_t n_keys = keys.size();
    const size_t window = std::min(lookahead, n_keys);
    if (window == 0) return;

    std::vector<PendingQuery> ring(window);

    auto enqueue = [&](size_t key_idx, size_t ring_pos) {
        HashValue h;
        if constexpr (std::is_same_v<Key, uint64_t>) {
            h = hash_u64(keys[key_idx]);
        } else {
            h = hash_str(keys[key_idx]);
        }
        const PartAndBucket pb = part_and_bucket(h.hi, shape_, params_.bucket_fn);
        const uint64_t b = pb.part * shape_.buckets_per_part + pb.bucket;
        prefetch_read(&pilots_[b]);
        ring[ring_pos] = {h, pb.part, b};
    };

    for (size_t i = 0; i < window; i++) enqueue(i, i);

    for (size_t i = 0; i < n_keys; i++) {
        const PendingQuery q = ring[i % window];
        const uint8_t pilot = pilots_[q.bucket];
        const uint64_t slot =
            q.part * shape_.slots_per_part + reducer_.reduce(q.hash.lo ^ hash_pilot(pilot, seed_));
        out[i] = minimal ? remap_slot(slot) : slot;
        const size_t next = i + window;
        if (next < n_keys) enqueue(next, i % window);
    }
}

void PtrHashIndex::index_stream(std::span<const uint64_t> keys, size_t lookahead, uint64_t* out,
                                bool minimal) const {
    stream_impl<uint64_t>(keys, lookahead, out, minimal);
}

void PtrHashIndex::index_stream(std::span<const std::string> keys, size_t lookahead,
                                uint64_t* out, bool minimal) const {
    stream_impl<std::string>(keys, lookahead, out, minimal);
}

}  // namespace ptrhash
