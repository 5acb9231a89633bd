#include "ptrhash/serde.hpp"

#include <cstring>
#include <fstream>

namespace ptrhash {

namespace {

constexpr char kMagic[4] = {'P', 'T', 'R', 'H'};

class Writer {
  public:
    explicit Writer(std::vector<uint8_t>& out) : out_(out) {}

    void u8(uint8_t v) { out_.push_back(v); }
    void u32(uint32_t v) {
        const size_t at = out_.size();
        out_.resize(at + 4);
        store_le32(out_.data() + at, v);
    }
    void u64(uint64_t v) {
        const size_t at = out_.size();
        out_.resize(at + 8);
        store_le64(out_.data() + at, v);
    }
    void bytes(const void* p, size_t len) {
        const size_t at = out_.size();
        out_.resize(at + len);
        std::memcpy(out_.data() + at, p, len);
    }
    void u64_array(const std::vector<uint64_t>& v) {
        u64(v.size());
        for (uint64_t x : v) u64(x);
    }

  private:
    std::vector<uint8_t>& out_;
};

class Reader {
  public:
    explicit Reader(std::span<const uint8_t> in) : in_(in) {}

    uint8_t u8() {
        need(1);
        return in_[pos_++];
    }
    uint32_t u32() {
        need(4);
        const uint32_t v = load_le32(in_.data() + pos_);
        pos_ += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        const uint64_t v = load_le64(in_.data() + pos_);
        pos_ += 8;
        return v;
    }
    void bytes(void* p, size_t len) {
        need(len);
        std::memcpy(p, in_.data() + pos_, len);
        pos_ += len;
    }
    std::vector<uint64_t> u64_array(uint64_t max_len) {
        const uint64_t len = u64();
        if (len > max_len) throw SerdeError("index file: array length out of range");
        std::vector<uint64_t> v(len);
        for (auto& x : v) x = u64();
        return v;
    }
    size_t pos() const { return pos_; }
    size_t remaining() const { return in_.size() - pos_; }

  private:
    void need(size_t len) const {
        if (pos_ + len > in_.size()) throw SerdeError("index file truncated");
    }

    std::span<const uint8_t> in_;
    size_t pos_ = 0;
};

void write_remap_payload(Writer& w, const RemapTable& remap) {
    switch (remap.kind()) {
        case RemapKind::kPlainArray32:
            for (uint32_t v : remap.plain()) w.u32(v);
            break;
        case RemapKind::kCacheLineEF:
            for (const auto& block : remap.blocks()) w.bytes(block.bytes.data(), 64);
            break;
        case RemapKind::kEliasFano: {
            const EliasFano& ef = remap.elias_fano();
            w.u64(ef.size());
            w.u64(ef.universe());
            w.u8(ef.low_bits());
            w.u64_array(ef.low_words());
            w.u64_array(ef.high_words());
            w.u64_array(ef.samples());
            break;
        }
    }
}

RemapTable read_remap_payload(Reader& r, RemapKind kind, uint64_t value_count,
                              uint64_t payload_len) {
    switch (kind) {
        case RemapKind::kPlainArray32: {
            if (payload_len != value_count * 4)
                throw SerdeError("index file: bad plain remap length");
            std::vector<uint32_t> v(value_count);
            for (auto& x : v) x = r.u32();
            return RemapTable::from_plain(std::move(v));
        }
        case RemapKind::kCacheLineEF: {
            const uint64_t blocks = div_ceil(value_count, CacheLineEfBlock::kCapacity);
            if (payload_len != blocks * 64)
                throw SerdeError("index file: bad cacheline-ef remap length");
            std::vector<CacheLineEfBlock> bl(blocks);
            for (auto& b : bl) r.bytes(b.bytes.data(), 64);
            return RemapTable::from_blocks(value_count, std::move(bl));
        }
        case RemapKind::kEliasFano: {
            const uint64_t count = r.u64();
            const uint64_t universe = r.u64();
            const uint8_t low_bits = r.u8();
            if (count != value_count) throw SerdeError("index file: bad elias-fano count");
            auto low = r.u64_array(payload_len / 8 + 1);
            auto high = r.u64_array(payload_len / 8 + 1);
            auto samples = r.u64_array(payload_len / 8 + 1);
            return RemapTable::from_elias_fano(EliasFano::from_parts(
                count, universe, low_bits, std::move(low), std::move(high),
                std::move(samples)));
        }
    }
    throw SerdeError("index file: unknown remap kind");
}

}  // namespace

std::vector<uint8_t> serialize(const PtrHashIndex& index) {
    std::vector<uint8_t> out;
    out.reserve(kIndexHeaderBytes + index.pilots().size() + index.remap().payload_bytes());
    Writer w(out);

    // Remap payload first so its exact length can go into the header.
    std::vector<uint8_t> remap_payload;
    {
        Writer rw(remap_payload);
        write_remap_payload(rw, index.remap());
    }

    w.bytes(kMagic, 4);
    w.u32(kIndexFormatVersion);
    w.u8(static_cast<uint8_t>(index.key_kind()));
    w.u8(static_cast<uint8_t>(index.hash_algo()));
    w.u8(static_cast<uint8_t>(index.params().bucket_fn));
    w.u8(static_cast<uint8_t>(index.remap().kind()));
    w.u8(static_cast<uint8_t>(index.params().reduce_kind));
    w.u8(0);
    w.u8(0);
    w.u8(0);
    w.u64(index.shape().n);
    w.u64(index.shape().parts);
    w.u64(index.shape().slots_per_part);
    w.u64(index.shape().buckets_per_part);
    w.u64(index.seed());
    w.u64(index.pilots().size());
    w.u64(remap_payload.size());
    w.bytes(index.pilots().data(), index.pilots().size());
    w.bytes(remap_payload.data(), remap_payload.size());
    return out;
}

PtrHashIndex deserialize(std::span<const uint8_t> bytes) {
    Reader r(bytes);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw SerdeError("not an index file (bad magic)");
    const uint32_t version = r.u32();
    if (version != kIndexFormatVersion)
        throw SerdeError("unsupported index format version " + std::to_string(version));

    const uint8_t key_kind_id = r.u8();
    const uint8_t algo_id = r.u8();
    const uint8_t bucket_fn_id = r.u8();
    const uint8_t remap_kind_id = r.u8();
    const uint8_t reduce_kind_id = r.u8();
    r.u8();
    r.u8();
    r.u8();

    if (key_kind_id > 1) throw SerdeError("unknown key kind id");
    if (algo_id > 4) throw SerdeError("unknown hash algorithm id");
    if (bucket_fn_id > 4) throw SerdeError("unknown bucket function id");
    if (remap_kind_id > 2) throw SerdeError("unknown remap kind id");
    if (reduce_kind_id > 2) throw SerdeError("unknown reduce kind id");

    const HashAlgo algo = static_cast<HashAlgo>(algo_id);
    if ((algo == HashAlgo::kAes64 || algo == HashAlgo::kAes128) && !cpu_has_aes())
        throw SerdeError("index uses the AES string hash; this CPU has no AES support");

    Shape shape;
    shape.n = r.u64();
    shape.parts = r.u64();
    shape.slots_per_part = r.u64();
    shape.buckets_per_part = r.u64();
    const uint64_t seed = r.u64();
    const uint64_t pilots_len = r.u64();
    const uint64_t remap_len = r.u64();

    if (shape.n == 0 || shape.parts == 0 || shape.slots_per_part == 0)
        throw SerdeError("index file: degenerate shape");
    if (u128{shape.parts} * shape.slots_per_part > (u128{1} << 62) ||
        u128{shape.parts} * shape.buckets_per_part > (u128{1} << 62))
        throw SerdeError("index file: shape out of range");
    if (shape.n > shape.total_slots()) throw SerdeError("index file: n exceeds the slot count");
    if (pilots_len != shape.total_buckets())
        throw SerdeError("index file: pilot length does not match shape");
    if (r.remaining() != pilots_len + remap_len)
        throw SerdeError("index file: payload length mismatch");

    std::vector<uint8_t> pilots(pilots_len);
    r.bytes(pilots.data(), pilots_len);

    const uint64_t value_count = shape.total_slots() - shape.n;
    RemapTable remap = read_remap_payload(r, static_cast<RemapKind>(remap_kind_id),
                                          value_count, remap_len);
    if (r.remaining() != 0) throw SerdeError("index file: trailing bytes");

    BuildParams params;
    params.bucket_fn = static_cast<BucketFnKind>(bucket_fn_id);
    params.remap_kind = static_cast<RemapKind>(remap_kind_id);
    params.reduce_kind = static_cast<ReduceKind>(reduce_kind_id);
    params.seed = seed;

    return PtrHashIndex(shape, params, seed, static_cast<KeyKind>(key_kind_id), algo,
                        std::move(pilots), std::move(remap));
}

void save_index(const PtrHashIndex& index, const std::filesystem::path& path) {
    const std::vector<uint8_t> bytes = serialize(index);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SerdeError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw SerdeError("write failed: " + path.string());
}

PtrHashIndex load_index(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw SerdeError("cannot open " + path.string());
    const std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<uint8_t> bytes(static_cast<size_t>(size));
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw SerdeError("read failed: " + path.string());
    return deserialize(bytes);
}

}  // namespace ptrhash
