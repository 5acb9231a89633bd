#include "ptrhash/sharding.hpp"

#include <cstdio>
#include <fstream>

#include "engine.hpp"
#include "ptrhash/corpus.hpp"

namespace ptrhash {

namespace {

using detail::AttemptFail;
using detail::EvictionStats;
using detail::H128;
using detail::H64;
using detail::PartOutput;
using detail::StopWatch;
using detail::Timings;

template <class H>
H make_hash(const HashValue& v);
template <>
H64 make_hash<H64>(const HashValue& v) {
    return {v.lo};
}
template <>
H128 make_hash<H128>(const HashValue& v) {
    return {v.hi, v.lo};
}

template <class H>
void hash_source(const KeySource& source, uint64_t seed, HashAlgo algo,
                 const std::function<void(const H&)>& sink) {
    if (source.kind() == KeyKind::kU64) {
        source.for_each_u64([&](uint64_t k) {
            const uint64_t h = hash_int(k, seed);
            sink(make_hash<H>(HashValue{h, h}));
        });
    } else {
        source.for_each_str(
            [&](std::string_view s) { sink(make_hash<H>(hash_bytes(s, seed, algo))); });
    }
}

// Scratch files for the disk strategies: raw fixed-width little-endian hash
// records, one file per shard, deleted as soon as the shard is built.
class ShardFiles {
  public:
    ShardFiles(const std::filesystem::path& dir, uint64_t token) : dir_(dir), token_(token) {}
    ~ShardFiles() { remove_all(); }

    std::filesystem::path path(uint64_t shard) const {
        return dir_ / ("ptrhash-shard-" + std::to_string(token_) + "-" +
                       std::to_string(shard) + ".tmp");
    }

    void remove(uint64_t shard) {
        std::error_code ec;
        std::filesystem::remove(path(shard), ec);
    }
    void remove_all() {
        for (uint64_t s = 0; s < created_; s++) remove(s);
    }
    void note_created(uint64_t shard) { created_ = std::max(created_, shard + 1); }

  private:
    std::filesystem::path dir_;
    uint64_t token_;
    uint64_t created_ = 0;
};

template <class H>
void append_records(std::ofstream& out, const std::vector<H>& buf);

template <>
void append_records<H64>(std::ofstream& out, const std::vector<H64>& buf) {
    for (const H64& h : buf) {
        uint8_t rec[8];
        store_le64(rec, h.w);
        out.write(reinterpret_cast<const char*>(rec), 8);
    }
}
template <>
void append_records<H128>(std::ofstream& out, const std::vector<H128>& buf) {
    for (const H128& h : buf) {
        uint8_t rec[16];
        store_le64(rec, h.h);
        store_le64(rec + 8, h.l);
        out.write(reinterpret_cast<const char*>(rec), 16);
    }
}

template <class H>
std::vector<H> read_records(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary | std::ios::ate);
    if (!in) throw BuildError(BuildError::Code::kInvalid, "cannot read shard file " + p.string());
    const std::streamsize size = in.tellg();
    in.seekg(0);
    constexpr size_t rec = sizeof(H) == 8 ? 8 : 16;
    std::vector<H> out(static_cast<size_t>(size) / rec);
    std::vector<uint8_t> raw(static_cast<size_t>(size));
    in.read(reinterpret_cast<char*>(raw.data()), size);
    if (!in) throw BuildError(BuildError::Code::kInvalid, "shard file read failed");
    for (size_t i = 0; i < out.size(); i++) {
        if constexpr (sizeof(H) == 8) {
            out[i] = H64{load_le64(raw.data() + i * 8)};
        } else {
            out[i] = H128{load_le64(raw.data() + i * 16), load_le64(raw.data() + i * 16 + 8)};
        }
    }
    return out;
}

// Writes hashes of shards [first, first+count) to their files, one pass over
// the keys.
template <class H>
void spill_shards(const KeySource& source, uint64_t seed, HashAlgo algo, uint64_t shards,
                  uint64_t first, uint64_t count, ShardFiles& files) {
    std::vector<std::ofstream> outs(count);
    std::vector<std::vector<H>> bufs(count);
    constexpr size_t kFlushAt = 1 << 14;
    for (uint64_t i = 0; i < count; i++) {
        outs[i].open(files.path(first + i), std::ios::binary | std::ios::trunc);
        if (!outs[i])
            throw BuildError(BuildError::Code::kInvalid, "cannot create shard file");
        files.note_created(first + i);
        bufs[i].reserve(kFlushAt);
    }
    hash_source<H>(source, seed, algo, [&](const H& h) {
        const uint64_t s = shard_of(h.hi(), shards);
        if (s < first || s >= first + count) return;
        auto& buf = bufs[s - first];
        buf.push_back(h);
        if (buf.size() >= kFlushAt) {
            append_records<H>(outs[s - first], buf);
            buf.clear();
        }
    });
    for (uint64_t i = 0; i < count; i++) {
        append_records<H>(outs[i], bufs[i]);
        outs[i].close();
        if (!outs[i]) throw BuildError(BuildError::Code::kInvalid, "shard file write failed");
    }
}

template <class H>
struct ShardedAttempt {
    std::vector<uint8_t> pilots;
    RemapTable remap;
    EvictionStats ev;
    bool remap_fell_back = false;
    Timings timings;

    // Builds the parts of one shard from its (unsorted) hashes.
    AttemptFail process_shard(const Shape& shape, const BuildParams& params, uint64_t seed,
                              unsigned threads, uint64_t shards, uint64_t shard,
                              std::vector<H>&& hashes, std::vector<PartOutput>& outputs) {
        const uint64_t parts_per_shard = shape.parts / shards;
        const uint64_t first_part = shard * parts_per_shard;

        StopWatch sw_scatter;
        std::vector<uint64_t> offsets;
        AttemptFail fail = detail::scatter_to_parts<H>(shape, hashes, first_part,
                                                       parts_per_shard,
                                                       detail::effective_threads(threads),
                                                       offsets);
        timings.scatter_ns.fetch_add(sw_scatter.ns());
        if (fail != AttemptFail::kNone) return fail;

        StopWatch sw_parts;
        fail = detail::build_parts<H>(shape, params.bucket_fn, seed, hashes, offsets,
                                      first_part, parts_per_shard, threads, pilots.data(),
                                      outputs, ev, timings);
        timings.parts_wall_ns.fetch_add(sw_parts.ns());
        return fail;
    }

    AttemptFail run(const KeySource& source, const BuildParams& params, const ShardPlan& plan,
                    const Shape& shape, uint64_t seed, HashAlgo algo, unsigned threads) {
        const uint64_t n = source.size();
        const uint64_t shards = shard_count(n, plan);
        pilots.assign(shape.total_buckets(), 0);
        ev = EvictionStats{};
        std::vector<PartOutput> outputs(shape.parts);

        AttemptFail fail = AttemptFail::kNone;
        switch (plan.strategy) {
            case ShardStrategy::kInMemory: {
                for (uint64_t s = 0; s < shards && fail == AttemptFail::kNone; s++) {
                    StopWatch sw_hash;
                    std::vector<H> hashes;
                    hash_source<H>(source, seed, algo, [&](const H& h) {
                        if (shard_of(h.hi(), shards) == s) hashes.push_back(h);
                    });
                    timings.hash_ns.fetch_add(sw_hash.ns());
                    fail = process_shard(shape, params, seed, threads, shards, s,
                                         std::move(hashes), outputs);
                }
                break;
            }
            case ShardStrategy::kOnDisk:
            case ShardStrategy::kHybrid: {
                const uint64_t batch = plan.strategy == ShardStrategy::kOnDisk
                                           ? shards
                                           : std::min<uint64_t>(plan.hybrid_disk_shards, shards);
                if (batch == 0)
                    throw BuildError(BuildError::Code::kInvalid,
                                     "hybrid sharding needs 1 <= D < shard count");
                ShardFiles files(plan.shard_dir, mix64(seed ^ n));
                for (uint64_t base = 0; base < shards && fail == AttemptFail::kNone;
                     base += batch) {
                    const uint64_t count = std::min(batch, shards - base);
                    StopWatch sw_hash;
                    spill_shards<H>(source, seed, algo, shards, base, count, files);
                    timings.hash_ns.fetch_add(sw_hash.ns());
                    for (uint64_t s = base; s < base + count && fail == AttemptFail::kNone;
                         s++) {
                        fail = process_shard(shape, params, seed, threads, shards, s,
                                             read_records<H>(files.path(s)), outputs);
                        files.remove(s);
                    }
                }
                break;
            }
        }
        if (fail != AttemptFail::kNone) return fail;

        StopWatch sw_remap;
        remap = detail::assemble_remap(shape, params.remap_kind, outputs, &remap_fell_back);
        timings.remap_ns.fetch_add(sw_remap.ns());
        return AttemptFail::kNone;
    }
};

template <class H>
PtrHashIndex build_sharded_impl(const KeySource& source, const BuildParams& params,
                                const ShardPlan& plan, const Shape& shape, HashAlgo algo,
                                unsigned threads, BuildStats* stats) {
    uint64_t seed = params.seed;
    for (uint32_t attempt = 0; attempt <= params.max_seed_retries; attempt++) {
        ShardedAttempt<H> art;
        const AttemptFail fail = art.run(source, params, plan, shape, seed, algo, threads);
        if (fail == AttemptFail::kNone) {
            if (stats) {
                stats->n = shape.n;
                stats->shape = shape;
                stats->seed = seed;
                stats->attempts = attempt + 1;
                stats->key_kind = source.kind();
                stats->hash_algo = algo;
                stats->bucket_fn = params.bucket_fn;
                stats->remap_kind = art.remap.kind();
                stats->reduce_kind = params.reduce_kind;
                stats->remap_fell_back = art.remap_fell_back;
                stats->total_evictions = art.ev.total;
                stats->evictions_by_percentile = art.ev.by_percentile;
                stats->bucket_size_counts = art.ev.bucket_size_counts;
                stats->pilot_bytes = art.pilots.size();
                stats->remap_payload_bytes = art.remap.payload_bytes();
                const double dn = static_cast<double>(shape.n);
                stats->hash_ns_per_key = double(art.timings.hash_ns.load()) / dn;
                stats->sort_ns_per_key = art.timings.sort_wall_ns() / dn;
                stats->search_ns_per_key = art.timings.search_wall_ns() / dn;
                stats->remap_ns_per_key = double(art.timings.remap_ns.load()) / dn;
                stats->total_ns_per_key = stats->hash_ns_per_key + stats->sort_ns_per_key +
                                          stats->search_ns_per_key + stats->remap_ns_per_key;
            }
            return PtrHashIndex(shape, params, seed, source.kind(), algo,
                                std::move(art.pilots), std::move(art.remap));
        }
        if (fail == AttemptFail::kDuplicateHashes && source.kind() == KeyKind::kU64)
            throw BuildError(BuildError::Code::kDuplicateKeys, "duplicate keys in input");
        // Reseeding changes every hash, so sharded iteration restarts from
        // shard zero.
        seed = next_seed(seed, attempt);
    }
    throw BuildError(BuildError::Code::kFailed,
                     "sharded construction failed after " +
                         std::to_string(params.max_seed_retries + 1) + " seed attempts");
}

}  // namespace

const char* shard_strategy_name(ShardStrategy s) {
    switch (s) {
        case ShardStrategy::kInMemory: return "memory";
        case ShardStrategy::kOnDisk: return "disk";
        case ShardStrategy::kHybrid: return "hybrid";
    }
    return "?";
}

void KeySource::for_each_u64(const std::function<void(uint64_t)>&) const {
    throw BuildError(BuildError::Code::kInvalid, "key source holds no u64 keys");
}
void KeySource::for_each_str(const std::function<void(std::string_view)>&) const {
    throw BuildError(BuildError::Code::kInvalid, "key source holds no string keys");
}

void GeneratedU64Source::for_each_u64(const std::function<void(uint64_t)>& fn) const {
    for (uint64_t i = 0; i < count_; i++) fn(corpus_u64(i, gen_seed_));
}

PtrHashIndex build_sharded(const KeySource& source, const BuildParams& params,
                           const ShardPlan& plan, unsigned threads, BuildStats* stats) {
    params.validate();
    const uint64_t n = source.size();
    if (n == 0) throw BuildError(BuildError::Code::kInvalid, "key set is empty");

    const uint64_t shards = shard_count(n, plan);
    if (plan.strategy == ShardStrategy::kHybrid &&
        (plan.hybrid_disk_shards < 1 || plan.hybrid_disk_shards >= std::max<uint64_t>(2, shards)))
        throw BuildError(BuildError::Code::kInvalid, "hybrid sharding needs 1 <= D < shards");

    // Parts must nest inside shards: round P up to a multiple of the shard
    // count so each part's hash interval lies in exactly one shard.
    const Shape shape = compute_shape(n, params, shards);

    if (source.kind() == KeyKind::kU64)
        return build_sharded_impl<H64>(source, params, plan, shape, HashAlgo::kFx64, threads,
                                       stats);
    const HashAlgo algo = pick_string_hash(n);
    if (hash_algo_is_wide(algo))
        return build_sharded_impl<H128>(source, params, plan, shape, algo, threads, stats);
    return build_sharded_impl<H64>(source, params, plan, shape, algo, threads, stats);
}

}  // namespace ptrhash
