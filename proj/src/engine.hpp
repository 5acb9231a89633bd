#pragma once

// Internal construction engine: hash partitioning, the hash-evict pilot
// search, and per-part placement. Shared by the plain and sharded builders;
// not part of the installed API (tests include it directly).

#include <algorithm>
#include <array>
#include <atomic>
#include <cassert>
#include <chrono>
#include <cstdint>
#include <queue>
#include <span>
#include <thread>
#include <vector>

#include "ptrhash/bucket_fn.hpp"
#include "ptrhash/build.hpp"
#include "ptrhash/hash.hpp"
#include "ptrhash/kernels.hpp"
#include "ptrhash/reduce.hpp"
#include "ptrhash/remap.hpp"

namespace ptrhash::detail {

// ---- hash storage ----------------------------------------------------------

struct H64 {
    uint64_t w;
    uint64_t hi() const { return w; }
    uint64_t lo() const { return w; }
    friend bool operator==(const H64&, const H64&) = default;
    friend auto operator<=>(const H64&, const H64&) = default;
};

struct H128 {
    uint64_t h;
    uint64_t l;
    uint64_t hi() const { return h; }
    uint64_t lo() const { return l; }
    friend bool operator==(const H128&, const H128&) = default;
    friend auto operator<=>(const H128&, const H128&) = default;
};

static_assert(sizeof(H64) == 8);
static_assert(sizeof(H128) == 16);

// ---- bitset helpers --------------------------------------------------------

inline bool bit_test(const uint64_t* words, uint64_t i) {
    return (words[i >> 6] >> (i & 63)) & 1;
}
inline void bit_set(uint64_t* words, uint64_t i) { words[i >> 6] |= uint64_t{1} << (i & 63); }
inline void bit_clear(uint64_t* words, uint64_t i) {
    words[i >> 6] &= ~(uint64_t{1} << (i & 63));
}

// ---- attempt outcome -------------------------------------------------------

enum class AttemptFail : uint8_t {
    kNone = 0,
    kOversubscribed,   // some part got more than S keys; global reseed
    kDuplicateHashes,  // equal fingerprints; fatal for ints, reseed for strings
    kPartFailed,       // eviction budget exhausted or no valid pilot
};

struct EvictionStats {
    uint64_t total = 0;
    std::array<uint64_t, 100> by_percentile{};
    std::vector<uint64_t> bucket_size_counts;

    void merge(const EvictionStats& o) {
        total += o.total;
        for (size_t i = 0; i < by_percentile.size(); i++) by_percentile[i] += o.by_percentile[i];
        if (bucket_size_counts.size() < o.bucket_size_counts.size())
            bucket_size_counts.resize(o.bucket_size_counts.size(), 0);
        for (size_t i = 0; i < o.bucket_size_counts.size(); i++)
            bucket_size_counts[i] += o.bucket_size_counts[i];
    }
};

struct PartOutput {
    std::vector<uint64_t> free_slots;      // global slot ids < n left empty
    std::vector<uint64_t> overflow_slots;  // global slot ids >= n holding a key
};

// ---- pilot search ----------------------------------------------------------

inline constexpr uint32_t kNoBucket = UINT32_MAX;
inline constexpr size_t kRecentSize = 16;

struct PilotDecision {
    int pilot = -1;           // -1: no valid pilot at all
    bool needs_eviction = false;
    uint64_t cost = 0;        // sum of squared sizes of colliding buckets
};

// Searches all 256 pilots for `bucket`. Phase one returns the smallest pilot
// whose slots are pairwise distinct and all free. If none exists, phase two
// returns the pilot with the lowest eviction cost (the weight of a collision
// with a bucket of size s is s*s), skipping pilots that hit any of the 16
// most recently displacing buckets or that self-collide; ties break to the
// smallest pilot. `slots_out` receives the chosen pilot's slots (in-part).
template <class H, class SizeFn>
PilotDecision find_pilot(std::span<const H> bucket, const uint64_t* taken,
                         const uint32_t* owner, SizeFn bucket_size,
                         std::span<const uint32_t> recent, const Reducer& reducer,
                         uint64_t seed, std::vector<uint32_t>& slots_out,
                         std::vector<uint32_t>& scratch) {
    const size_t k = bucket.size();
    slots_out.resize(k);
    scratch.resize(k);
    std::vector<uint32_t>& buf = scratch;

    auto fill_slots = [&](uint64_t hp, std::vector<uint32_t>& dst) {
        for (size_t i = 0; i < k; i++)
            dst[i] = static_cast<uint32_t>(reducer.reduce(bucket[i].lo() ^ hp));
    };
    auto pairwise_distinct = [&](const std::vector<uint32_t>& s) {
        for (size_t i = 1; i < k; i++)
            for (size_t j = 0; j < i; j++)
                if (s[i] == s[j]) return false;
        return true;
    };

    // Phase one: smallest pilot mapping to all-free, pairwise-distinct slots.
    for (uint32_t p = 0; p < 256; p++) {
        const uint64_t hp = hash_pilot(p, seed);
        bool free_ok = true;
        for (size_t i = 0; i < k; i++) {
            const uint32_t s = static_cast<uint32_t>(reducer.reduce(bucket[i].lo() ^ hp));
            if (bit_test(taken, s)) {
                free_ok = false;
                break;
            }
            buf[i] = s;
        }
        if (!free_ok) continue;
        if (!pairwise_distinct(buf)) continue;
        slots_out = buf;
        return {static_cast<int>(p), false, 0};
    }

    // Phase two: minimum total s^2 over colliding slots; never displace a
    // recently displacing bucket.
    PilotDecision best;
    uint64_t best_cost = UINT64_MAX;
    for (uint32_t p = 0; p < 256; p++) {
        const uint64_t hp = hash_pilot(p, seed);
        fill_slots(hp, buf);
        if (!pairwise_distinct(buf)) continue;
        uint64_t cost = 0;
        bool valid = true;
        for (size_t i = 0; i < k && valid; i++) {
            const uint32_t o = owner[buf[i]];
            if (o == kNoBucket) continue;
            for (uint32_t r : recent) {
                if (r == o) {
                    valid = false;
                    break;
                }
            }
            if (!valid) break;
            const uint64_t sz = bucket_size(o);
            cost += sz * sz;
            if (cost >= best_cost) valid = false;  // cannot beat the incumbent
        }
        if (!valid) continue;
        if (cost < best_cost) {
            best_cost = cost;
            best = {static_cast<int>(p), true, cost};
            slots_out = buf;
        }
    }
    return best;
}

// ---- per-part placement ----------------------------------------------------

// Places all buckets of one part: pops buckets largest-first from a priority
// queue, assigns pilots greedily, and displaces minimum-weight earlier
// buckets when no free pilot exists. One instance per worker, reused across
// parts.
class PartBuilder {
  public:
    PartBuilder(const Shape& shape, BucketFnKind fn, uint64_t seed)
        : shape_(shape),
          fn_(fn),
          seed_(seed),
          reducer_(shape.slots_per_part),
          taken_(div_ceil(shape.slots_per_part, 64)),
          owner_(shape.slots_per_part),
          bucket_starts_(shape.buckets_per_part + 1),
          placed_once_(shape.buckets_per_part) {}

    // `hashes` are the sorted fingerprints of this part. `pilots` has B
    // zeroed entries. Returns false on part failure (caller reseeds) or when
    // `cancel` reports that a sibling part already failed.
    template <class H>
    bool run(uint64_t part, std::span<const H> hashes, uint8_t* pilots, uint64_t n_total,
             PartOutput& out, EvictionStats& ev,
             const std::atomic<AttemptFail>* cancel = nullptr) {
        const uint64_t slots = shape_.slots_per_part;
        const uint64_t buckets = shape_.buckets_per_part;
        std::fill(taken_.begin(), taken_.end(), 0);
        std::fill(owner_.begin(), owner_.end(), kNoBucket);
        std::fill(placed_once_.begin(), placed_once_.end(), false);

        group_buckets(part, hashes, ev);

        auto bucket_size = [&](uint32_t b) -> uint64_t {
            return bucket_starts_[b + 1] - bucket_starts_[b];
        };
        auto bucket_span = [&](uint32_t b) {
            return hashes.subspan(bucket_starts_[b], bucket_size(b));
        };

        // Max-heap over (size, then smaller id first). Evicted buckets
        // re-enter with the same key.
        std::vector<uint64_t> heap_init;
        heap_init.reserve(buckets);
        uint64_t nonempty = 0;
        for (uint32_t b = 0; b < buckets; b++) {
            if (bucket_size(b) > 0) {
                heap_init.push_back(encode(bucket_size(b), b));
                nonempty++;
            }
        }
        std::priority_queue<uint64_t> queue(std::less<uint64_t>{}, std::move(heap_init));

        std::array<uint32_t, kRecentSize> recent;
        recent.fill(kNoBucket);
        size_t recent_pos = 0;

        const uint64_t eviction_budget = 10 * slots;
        uint64_t part_evictions = 0;
        uint64_t placed_first = 0;
        uint64_t pops = 0;

        while (!queue.empty()) {
            if (cancel && (++pops & 1023) == 0 &&
                cancel->load(std::memory_order_relaxed) != AttemptFail::kNone)
                return false;
            const uint32_t b = decode_bucket(queue.top());
            queue.pop();
            const auto bucket = bucket_span(b);

            const PilotDecision d =
                find_pilot<H>(bucket, taken_.data(), owner_.data(), bucket_size,
                              std::span<const uint32_t>(recent), reducer_, seed_, slot_buf_,
                              scratch_buf_);
            if (d.pilot < 0) return false;  // every pilot self-collides or hits recent

            pilots[b] = static_cast<uint8_t>(d.pilot);
            if (d.needs_eviction) {
                for (uint32_t s : slot_buf_) {
                    const uint32_t victim = owner_[s];
                    if (victim != kNoBucket) {
                        const uint64_t vhp = hash_pilot(pilots[victim], seed_);
                        for (const H& vh : bucket_span(victim)) {
                            const uint64_t vs = reducer_.reduce(vh.lo() ^ vhp);
                            bit_clear(taken_.data(), vs);
                            owner_[vs] = kNoBucket;
                        }
                        queue.push(encode(bucket_size(victim), victim));
                        part_evictions++;
                        ev.total++;
                        ev.by_percentile[std::min<uint64_t>(99, placed_first * 100 /
                                                                    std::max<uint64_t>(1, nonempty))]++;
                        if (part_evictions > eviction_budget) return false;
                    }
                    bit_set(taken_.data(), s);
                    owner_[s] = b;
                }
                recent[recent_pos] = b;
                recent_pos = (recent_pos + 1) % kRecentSize;
            } else {
                for (uint32_t s : slot_buf_) {
                    bit_set(taken_.data(), s);
                    owner_[s] = b;
                }
            }
            if (!placed_once_[b]) {
                placed_once_[b] = true;
                placed_first++;
            }
        }

        collect_slots(part, hashes.size(), n_total, out);
        return true;
    }

  private:
    static uint64_t encode(uint64_t size, uint32_t id) {
        return (size << 32) | (UINT32_MAX - id);
    }
    static uint32_t decode_bucket(uint64_t key) {
        return UINT32_MAX - static_cast<uint32_t>(key);
    }

    // Bucket ids are non-decreasing over sorted hashes, so bucket boundaries
    // come from one linear scan.
    template <class H>
    void group_buckets(uint64_t part, std::span<const H> hashes, EvictionStats& ev) {
        const uint64_t buckets = shape_.buckets_per_part;
        uint64_t cur = 0;
        bucket_starts_[0] = 0;
        for (size_t i = 0; i < hashes.size(); i++) {
            const PartAndBucket pb = part_and_bucket(hashes[i].hi(), shape_, fn_);
            assert(pb.part == part);
            assert(pb.bucket >= cur);  // gamma monotone => bucket ids non-decreasing
            while (cur < pb.bucket) bucket_starts_[++cur] = static_cast<uint32_t>(i);
        }
        (void)part;
        while (cur < buckets) bucket_starts_[++cur] = static_cast<uint32_t>(hashes.size());

        for (uint32_t b = 0; b < buckets; b++) {
            const uint64_t sz = bucket_starts_[b + 1] - bucket_starts_[b];
            if (sz >= ev.bucket_size_counts.size()) ev.bucket_size_counts.resize(sz + 1, 0);
            ev.bucket_size_counts[sz]++;
        }
    }

    void collect_slots(uint64_t part, size_t keys_here, uint64_t n_total, PartOutput& out) {
        const uint64_t base = part * shape_.slots_per_part;
        out.free_slots.clear();
        out.overflow_slots.clear();
        uint64_t placed = 0;
        for (uint64_t s = 0; s < shape_.slots_per_part; s++) {
            const uint64_t global = base + s;
            if (bit_test(taken_.data(), s)) {
                placed++;
                if (global >= n_total) out.overflow_slots.push_back(global);
            } else if (global < n_total) {
                out.free_slots.push_back(global);
            }
        }
        assert(placed == keys_here);  // every key holds exactly one slot
        (void)keys_here;
        (void)placed;
    }

    const Shape& shape_;
    BucketFnKind fn_;
    uint64_t seed_;
    Reducer reducer_;
    std::vector<uint64_t> taken_;
    std::vector<uint32_t> owner_;
    std::vector<uint32_t> bucket_starts_;
    std::vector<bool> placed_once_;
    std::vector<uint32_t> slot_buf_;
    std::vector<uint32_t> scratch_buf_;
};

// ---- partitioning ----------------------------------------------------------

struct Timings {
    std::atomic<uint64_t> hash_ns{0};
    std::atomic<uint64_t> scatter_ns{0};    // wall: partitioning into parts
    std::atomic<uint64_t> sort_ns{0};       // summed over workers
    std::atomic<uint64_t> search_ns{0};     // summed over workers
    std::atomic<uint64_t> parts_wall_ns{0}; // wall: the parallel part phase
    std::atomic<uint64_t> remap_ns{0};

    void reset() {
        hash_ns = 0;
        scatter_ns = 0;
        sort_ns = 0;
        search_ns = 0;
        parts_wall_ns = 0;
        remap_ns = 0;
    }

    // The per-worker sums overstate wall time; attribute the measured wall
    // of the part phase proportionally.
    double sort_wall_ns() const {
        const double sum = double(sort_ns.load()) + double(search_ns.load());
        if (sum == 0) return double(scatter_ns.load());
        return double(scatter_ns.load()) +
               double(parts_wall_ns.load()) * double(sort_ns.load()) / sum;
    }
    double search_wall_ns() const {
        const double sum = double(sort_ns.load()) + double(search_ns.load());
        if (sum == 0) return 0;
        return double(parts_wall_ns.load()) * double(search_ns.load()) / sum;
    }
};

class StopWatch {
  public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}
    uint64_t ns() const {
        return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                         std::chrono::steady_clock::now() - start_)
                                         .count());
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

inline unsigned effective_threads(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Groups `hashes` (keys of parts [first_part, first_part+part_count)) by
// part. On success `hashes` is reordered part-major and `offsets` holds the
// part boundaries. Fails with kOversubscribed when a part exceeds S keys.
template <class H>
AttemptFail scatter_to_parts(const Shape& shape, std::vector<H>& hashes, uint64_t first_part,
                             uint64_t part_count, unsigned threads,
                             std::vector<uint64_t>& offsets) {
    const uint64_t t = std::min<uint64_t>(std::max(1u, threads), 8);
    const size_t n = hashes.size();
    const size_t chunk = n / t + 1;

    // Per-chunk part counts, so each thread can scatter into its own region.
    std::vector<std::vector<uint64_t>> counts(t, std::vector<uint64_t>(part_count, 0));
    {
        std::vector<std::thread> workers;
        for (uint64_t w = 0; w < t; w++) {
            workers.emplace_back([&, w] {
                const size_t begin = std::min(n, w * chunk);
                const size_t end = std::min(n, begin + chunk);
                auto& local = counts[w];
                for (size_t i = begin; i < end; i++) {
                    const uint64_t part = mul_hi(shape.parts, hashes[i].hi());
                    local[part - first_part]++;
                }
            });
        }
        for (auto& th : workers) th.join();
    }

    offsets.assign(part_count + 1, 0);
    for (uint64_t p = 0; p < part_count; p++) {
        uint64_t total = 0;
        for (uint64_t w = 0; w < t; w++) total += counts[w][p];
        if (total > shape.slots_per_part) return AttemptFail::kOversubscribed;
        offsets[p + 1] = offsets[p] + total;
    }

    // Each (chunk, part) gets a disjoint destination range.
    std::vector<std::vector<uint64_t>> dest(t, std::vector<uint64_t>(part_count, 0));
    for (uint64_t p = 0; p < part_count; p++) {
        uint64_t cursor = offsets[p];
        for (uint64_t w = 0; w < t; w++) {
            dest[w][p] = cursor;
            cursor += counts[w][p];
        }
    }

    std::vector<H> scratch(n);
    {
        std::vector<std::thread> workers;
        for (uint64_t w = 0; w < t; w++) {
            workers.emplace_back([&, w] {
                const size_t begin = std::min(n, w * chunk);
                const size_t end = std::min(n, begin + chunk);
                auto& cursors = dest[w];
                for (size_t i = begin; i < end; i++) {
                    const uint64_t part = mul_hi(shape.parts, hashes[i].hi()) - first_part;
                    scratch[cursors[part]++] = hashes[i];
                }
            });
        }
        for (auto& th : workers) th.join();
    }
    hashes.swap(scratch);
    return AttemptFail::kNone;
}

// Sorts each part slice, rejects duplicate fingerprints, and runs the pilot
// placement, in parallel over parts. Pilots land in pilots_base (global
// array); outputs are indexed by absolute part id.
template <class H>
AttemptFail build_parts(const Shape& shape, BucketFnKind fn, uint64_t seed,
                        std::span<H> part_major_hashes, const std::vector<uint64_t>& offsets,
                        uint64_t first_part, uint64_t part_count, unsigned threads,
                        uint8_t* pilots_base, std::vector<PartOutput>& outputs,
                        EvictionStats& ev, Timings& timings) {
    const unsigned t = static_cast<unsigned>(
        std::min<uint64_t>(effective_threads(threads), std::max<uint64_t>(1, part_count)));
    std::atomic<uint64_t> next{0};
    std::atomic<AttemptFail> fail{AttemptFail::kNone};
    std::vector<EvictionStats> local_ev(t);
    std::vector<std::thread> workers;

    for (unsigned w = 0; w < t; w++) {
        workers.emplace_back([&, w] {
            PartBuilder builder(shape, fn, seed);
            uint64_t sort_ns = 0;
            uint64_t search_ns = 0;
            while (true) {
                const uint64_t rel = next.fetch_add(1);
                if (rel >= part_count) break;
                if (fail.load(std::memory_order_relaxed) != AttemptFail::kNone) break;

                const uint64_t part = first_part + rel;
                auto slice = part_major_hashes.subspan(offsets[rel], offsets[rel + 1] - offsets[rel]);

                StopWatch sw_sort;
                std::sort(slice.begin(), slice.end());
                bool dup = false;
                for (size_t i = 1; i < slice.size(); i++) {
                    if (slice[i] == slice[i - 1]) {
                        dup = true;
                        break;
                    }
                }
                sort_ns += sw_sort.ns();
                if (dup) {
                    AttemptFail expected = AttemptFail::kNone;
                    fail.compare_exchange_strong(expected, AttemptFail::kDuplicateHashes);
                    break;
                }

                StopWatch sw_search;
                const bool ok = builder.run<H>(
                    part, slice, pilots_base + part * shape.buckets_per_part, shape.n,
                    outputs[part], local_ev[w], &fail);
                search_ns += sw_search.ns();
                if (!ok) {
                    AttemptFail expected = AttemptFail::kNone;
                    fail.compare_exchange_strong(expected, AttemptFail::kPartFailed);
                    break;
                }
            }
            timings.sort_ns.fetch_add(sort_ns, std::memory_order_relaxed);
            timings.search_ns.fetch_add(search_ns, std::memory_order_relaxed);
        });
    }
    for (auto& th : workers) th.join();

    const AttemptFail f = fail.load();
    if (f != AttemptFail::kNone) return f;
    for (auto& le : local_ev) ev.merge(le);
    return AttemptFail::kNone;
}

// Concatenates per-part slot lists (already globally ordered), checks the
// free/overflow balance, and encodes the remap table.
inline RemapTable assemble_remap(const Shape& shape, RemapKind requested,
                                 const std::vector<PartOutput>& outputs, bool* fell_back) {
    std::vector<uint64_t> free_slots;
    std::vector<uint64_t> overflow_slots;
    for (const auto& po : outputs) {
        free_slots.insert(free_slots.end(), po.free_slots.begin(), po.free_slots.end());
        overflow_slots.insert(overflow_slots.end(), po.overflow_slots.begin(),
                              po.overflow_slots.end());
    }
    const std::vector<uint64_t> values = build_filled_remap_values(
        free_slots, overflow_slots, shape.n, shape.total_slots());
    return RemapTable::build(requested, values, shape.n, fell_back);
}

}  // namespace ptrhash::detail
