#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ptrhash/cacheline_ef.hpp"
#include "ptrhash/elias_fano.hpp"
#include "ptrhash/shape.hpp"

namespace ptrhash {

// Builds the remap value list F of length total_slots - n from the sorted
// free slots L (< n) and the sorted key-occupied overflow slots q (>= n):
// F[q_i - n] = L_i, and every other position holds the previous defined
// value (positions before the first defined one hold L_0). Throws on
// |L| != |q| (a construction bug).
std::vector<uint64_t> build_filled_remap_values(std::span<const uint64_t> free_slots,
                                                std::span<const uint64_t> overflow_slots,
                                                uint64_t n, uint64_t total_slots);

// Maps overflow slot s >= n (as index s - n) back to a free slot < n, via one
// of three interchangeable encodings.
class RemapTable {
  public:
    RemapTable() = default;

    // Encodes `values` (non-decreasing, all < n). If CacheLineEF is requested
    // and any chunk violates its range/width limits, the whole table falls
    // back to the plain array; `fell_back` reports that.
    static RemapTable build(RemapKind requested, std::span<const uint64_t> values,
                            uint64_t n, bool* fell_back = nullptr);

    uint64_t get(size_t i) const {
        switch (kind_) {
            case RemapKind::kPlainArray32:
                return plain_[i];
            case RemapKind::kCacheLineEF:
                return clef_get(blocks_[i / CacheLineEfBlock::kCapacity],
                                i % CacheLineEfBlock::kCapacity);
            case RemapKind::kEliasFano:
                return ef_.get(i);
        }
        return 0;
    }

    RemapKind kind() const { return kind_; }
    uint64_t size() const { return size_; }

    // Size of the encoded payload in bytes (excluding the table header).
    size_t payload_bytes() const;

    // A pointer into the encoding for prefetching the line that get(i) reads;
    // null for Elias-Fano (multiple scattered reads).
    const void* prefetch_addr(size_t i) const {
        switch (kind_) {
            case RemapKind::kPlainArray32:
                return &plain_[i];
            case RemapKind::kCacheLineEF:
                return &blocks_[i / CacheLineEfBlock::kCapacity];
            case RemapKind::kEliasFano:
                return nullptr;
        }
        return nullptr;
    }

    const std::vector<uint32_t>& plain() const { return plain_; }
    const std::vector<CacheLineEfBlock>& blocks() const { return blocks_; }
    const EliasFano& elias_fano() const { return ef_; }

    static RemapTable from_plain(std::vector<uint32_t> v);
    static RemapTable from_blocks(uint64_t size, std::vector<CacheLineEfBlock> blocks);
    static RemapTable from_elias_fano(EliasFano ef);

  private:
    RemapKind kind_ = RemapKind::kPlainArray32;
    uint64_t size_ = 0;
    std::vector<uint32_t> plain_;
    std::vector<CacheLineEfBlock> blocks_;
    EliasFano ef_;
};

}  // namespace ptrhash
