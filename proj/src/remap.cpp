#include "ptrhash/remap.hpp"

#include <stdexcept>

namespace ptrhash {

std::vector<uint64_t> build_filled_remap_values(std::span<const uint64_t> free_slots,
                                                std::span<const uint64_t> overflow_slots,
                                                uint64_t n, uint64_t total_slots) {
    if (free_slots.size() != overflow_slots.size())
        throw std::logic_error("remap: |free| != |overflow|, corrupt construction state");

    std::vector<uint64_t> values(total_slots - n, 0);
    if (free_slots.empty()) return values;

    uint64_t fill = free_slots[0];
    size_t next = 0;
    for (uint64_t pos = 0; pos < values.size(); pos++) {
        if (next < overflow_slots.size() && overflow_slots[next] - n == pos) {
            fill = free_slots[next];
            next++;
        }
        values[pos] = fill;
    }
    return values;
}

RemapTable RemapTable::build(RemapKind requested, std::span<const uint64_t> values,
                             uint64_t n, bool* fell_back) {
    if (fell_back) *fell_back = false;

    if (requested == RemapKind::kCacheLineEF) {
        std::vector<CacheLineEfBlock> blocks;
        blocks.resize(div_ceil(values.size(), CacheLineEfBlock::kCapacity));
        bool ok = true;
        for (size_t b = 0; b < blocks.size(); b++) {
            const size_t begin = b * CacheLineEfBlock::kCapacity;
            const size_t len = std::min(CacheLineEfBlock::kCapacity, values.size() - begin);
            if (clef_encode(values.subspan(begin, len), blocks[b]) != ClefStatus::kOk) {
                ok = false;
                break;
            }
        }
        if (ok) return from_blocks(values.size(), std::move(blocks));
        if (fell_back) *fell_back = true;
        requested = RemapKind::kPlainArray32;
    }

    if (requested == RemapKind::kEliasFano) {
        return from_elias_fano(EliasFano::build(values, n));
    }

    if (n > (uint64_t{1} << 32))
        throw std::overflow_error("plain remap array needs n <= 2^32");
    std::vector<uint32_t> plain(values.size());
    for (size_t i = 0; i < values.size(); i++) plain[i] = static_cast<uint32_t>(values[i]);
    return from_plain(std::move(plain));
}

size_t RemapTable::payload_bytes() const {
    switch (kind_) {
        case RemapKind::kPlainArray32:
            return plain_.size() * 4;
        case RemapKind::kCacheLineEF:
            return blocks_.size() * sizeof(CacheLineEfBlock);
        case RemapKind::kEliasFano:
            return ef_.payload_bytes();
    }
    return 0;
}

RemapTable RemapTable::from_plain(std::vector<uint32_t> v) {
    RemapTable t;
    t.kind_ = RemapKind::kPlainArray32;
    t.size_ = v.size();
    t.plain_ = std::move(v);
    return t;
}

RemapTable RemapTable::from_blocks(uint64_t size, std::vector<CacheLineEfBlock> blocks) {
    RemapTable t;
    t.kind_ = RemapKind::kCacheLineEF;
    t.size_ = size;
    t.blocks_ = std::move(blocks);
    return t;
}

RemapTable RemapTable::from_elias_fano(EliasFano ef) {
    RemapTable t;
    t.kind_ = RemapKind::kEliasFano;
    t.size_ = ef.size();
    t.ef_ = std::move(ef);
    return t;
}

}  // namespace ptrhash
