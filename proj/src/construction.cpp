#include <functional>

#include "engine.hpp"
#include "ptrhash/build.hpp"

namespace ptrhash {

namespace {

using detail::AttemptFail;
using detail::EvictionStats;
using detail::H128;
using detail::H64;
using detail::PartOutput;
using detail::StopWatch;
using detail::Timings;

struct AttemptArtifacts {
    std::vector<uint8_t> pilots;
    RemapTable remap;
    EvictionStats ev;
    bool remap_fell_back = false;
    Timings timings;
};

// One full construction attempt under a fixed seed: hash, partition, place
// all parts, assemble the remap.
template <class H, class HashAll>
AttemptFail run_attempt(const Shape& shape, const BuildParams& params, uint64_t seed,
                        unsigned threads, HashAll&& hash_all, AttemptArtifacts& art) {
    art.pilots.assign(shape.total_buckets(), 0);
    art.ev = EvictionStats{};
    art.remap_fell_back = false;
    art.timings.reset();

    StopWatch sw_hash;
    std::vector<H> hashes;
    hash_all(seed, hashes);
    art.timings.hash_ns.store(sw_hash.ns());

    StopWatch sw_scatter;
    std::vector<uint64_t> offsets;
    const AttemptFail scatter_fail = detail::scatter_to_parts<H>(
        shape, hashes, 0, shape.parts, detail::effective_threads(threads), offsets);
    art.timings.scatter_ns.store(sw_scatter.ns());
    if (scatter_fail != AttemptFail::kNone) return scatter_fail;

    std::vector<PartOutput> outputs(shape.parts);
    StopWatch sw_parts;
    const AttemptFail parts_fail = detail::build_parts<H>(
        shape, params.bucket_fn, seed, hashes, offsets, 0, shape.parts, threads,
        art.pilots.data(), outputs, art.ev, art.timings);
    art.timings.parts_wall_ns.store(sw_parts.ns());
    if (parts_fail != AttemptFail::kNone) return parts_fail;

    StopWatch sw_remap;
    art.remap = detail::assemble_remap(shape, params.remap_kind, outputs, &art.remap_fell_back);
    art.timings.remap_ns.store(sw_remap.ns());
    return AttemptFail::kNone;
}

void fill_stats(BuildStats* stats, const Shape& shape, const BuildParams& params,
                uint64_t seed, uint32_t attempts, KeyKind kind, HashAlgo algo,
                const AttemptArtifacts& art) {
    if (!stats) return;
    stats->n = shape.n;
    stats->shape = shape;
    stats->seed = seed;
    stats->attempts = attempts;
    stats->key_kind = kind;
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
    const double n = static_cast<double>(shape.n);
    stats->hash_ns_per_key = static_cast<double>(art.timings.hash_ns.load()) / n;
    stats->sort_ns_per_key = art.timings.sort_wall_ns() / n;
    stats->search_ns_per_key = art.timings.search_wall_ns() / n;
    stats->remap_ns_per_key = static_cast<double>(art.timings.remap_ns.load()) / n;
    stats->total_ns_per_key = stats->hash_ns_per_key + stats->sort_ns_per_key +
                              stats->search_ns_per_key + stats->remap_ns_per_key;
}

PtrHashIndex build_u64_impl(std::span<const uint64_t> keys, const BuildParams& params,
                            const Shape& shape, unsigned threads, BuildStats* stats) {
    params.validate();
    if (keys.empty()) throw BuildError(BuildError::Code::kInvalid, "key set is empty");

    const unsigned t = detail::effective_threads(threads);
    const auto& ops = kernels::active_ops();

    auto hash_all = [&](uint64_t seed, std::vector<H64>& out) {
        out.resize(keys.size());
        uint64_t* words = reinterpret_cast<uint64_t*>(out.data());
        const size_t chunk = keys.size() / t + 1;
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < t; w++) {
            workers.emplace_back([&, w] {
                const size_t begin = std::min(keys.size(), w * chunk);
                const size_t end = std::min(keys.size(), begin + chunk);
                ops.hash_u64(keys.data() + begin, end - begin, seed, words + begin);
            });
        }
        for (auto& th : workers) th.join();
    };

    uint64_t seed = params.seed;
    AttemptArtifacts art;
    for (uint32_t attempt = 0; attempt <= params.max_seed_retries; attempt++) {
        const AttemptFail fail =
            run_attempt<H64>(shape, params, seed, threads, hash_all, art);
        if (fail == AttemptFail::kNone) {
            fill_stats(stats, shape, params, seed, attempt + 1, KeyKind::kU64,
                       HashAlgo::kFx64, art);
            return PtrHashIndex(shape, params, seed, KeyKind::kU64, HashAlgo::kFx64,
                                std::move(art.pilots), std::move(art.remap));
        }
        if (fail == AttemptFail::kDuplicateHashes) {
            // The integer hash is injective per seed, so equal fingerprints
            // mean equal keys.
            throw BuildError(BuildError::Code::kDuplicateKeys,
                             "duplicate keys in input");
        }
        seed = next_seed(seed, attempt);
    }
    throw BuildError(BuildError::Code::kFailed,
                     "construction failed after " +
                         std::to_string(params.max_seed_retries + 1) + " seed attempts");
}

}  // namespace

PtrHashIndex build(std::span<const uint64_t> keys, const BuildParams& params,
                   unsigned threads, BuildStats* stats) {
    const Shape shape = compute_shape(keys.size(), params);
    return build_u64_impl(keys, params, shape, threads, stats);
}

PtrHashIndex build_with_shape(std::span<const uint64_t> keys, const BuildParams& params,
                              const Shape& shape, unsigned threads, BuildStats* stats) {
    if (shape.n != keys.size())
        throw BuildError(BuildError::Code::kInvalid, "shape.n != number of keys");
    if (shape.total_slots() < keys.size())
        throw BuildError(BuildError::Code::kInvalid, "shape has fewer slots than keys");
    return build_u64_impl(keys, params, shape, threads, stats);
}

PtrHashIndex build(std::span<const std::string> keys, const BuildParams& params,
                   unsigned threads, BuildStats* stats) {
    params.validate();
    if (keys.empty()) throw BuildError(BuildError::Code::kInvalid, "key set is empty");

    const Shape shape = compute_shape(keys.size(), params);
    const unsigned t = detail::effective_threads(threads);

    HashAlgo algo = pick_string_hash(keys.size());
    uint32_t duplicate_failures = 0;

    auto hash_all_64 = [&](uint64_t seed, std::vector<H64>& out) {
        out.resize(keys.size());
        const size_t chunk = keys.size() / t + 1;
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < t; w++) {
            workers.emplace_back([&, w] {
                const size_t begin = std::min(keys.size(), w * chunk);
                const size_t end = std::min(keys.size(), begin + chunk);
                for (size_t i = begin; i < end; i++)
                    out[i] = H64{hash_bytes(keys[i], seed, algo).lo};
            });
        }
        for (auto& th : workers) th.join();
    };
    auto hash_all_128 = [&](uint64_t seed, std::vector<H128>& out) {
        out.resize(keys.size());
        const size_t chunk = keys.size() / t + 1;
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < t; w++) {
            workers.emplace_back([&, w] {
                const size_t begin = std::min(keys.size(), w * chunk);
                const size_t end = std::min(keys.size(), begin + chunk);
                for (size_t i = begin; i < end; i++) {
                    const HashValue h = hash_bytes(keys[i], seed, algo);
                    out[i] = H128{h.hi, h.lo};
                }
            });
        }
        for (auto& th : workers) th.join();
    };

    uint64_t seed = params.seed;
    AttemptArtifacts art;
    for (uint32_t attempt = 0; attempt <= params.max_seed_retries; attempt++) {
        const bool wide = hash_algo_is_wide(algo);
        const AttemptFail fail =
            wide ? run_attempt<H128>(shape, params, seed, threads, hash_all_128, art)
                 : run_attempt<H64>(shape, params, seed, threads, hash_all_64, art);
        if (fail == AttemptFail::kNone) {
            fill_stats(stats, shape, params, seed, attempt + 1, KeyKind::kBytes, algo, art);
            return PtrHashIndex(shape, params, seed, KeyKind::kBytes, algo,
                                std::move(art.pilots), std::move(art.remap));
        }
        if (fail == AttemptFail::kDuplicateHashes) {
            // Either truly duplicate keys or a fingerprint collision; retry
            // under a new seed and widen the fingerprint if it keeps
            // happening (equal keys then fail every attempt).
            duplicate_failures++;
            if (duplicate_failures >= 2 && !hash_algo_is_wide(algo))
                algo = pick_string_hash(keys.size(), /*force_wide=*/true);
        }
        seed = next_seed(seed, attempt);
    }
    throw BuildError(BuildError::Code::kFailed,
                     duplicate_failures > params.max_seed_retries / 2
                         ? "construction failed: persistent duplicate fingerprints "
                           "(duplicate keys in input?)"
                         : "construction failed after " +
                               std::to_string(params.max_seed_retries + 1) +
                               " seed attempts");
}

}  // namespace ptrhash
