#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <vector>

#include "oracles.hpp"
#include "ptrhash/corpus.hpp"
#include "ptrhash/serde.hpp"
#include "ptrhash/sharding.hpp"

using namespace ptrhash;

namespace {

std::vector<uint64_t> corpus(uint64_t n, uint64_t gen_seed = 4) {
    std::vector<uint64_t> keys(n);
    for (uint64_t i = 0; i < n; i++) keys[i] = corpus_u64(i, gen_seed);
    return keys;
}

}  // namespace

TEST_CASE("shard_of splits the hash space") {
    CHECK(shard_of(0, 1) == 0);
    CHECK(shard_of(UINT64_MAX, 1) == 0);
    CHECK(shard_of((uint64_t{1} << 63) - 1, 2) == 0);
    CHECK(shard_of(uint64_t{1} << 63, 2) == 1);

    // counts stay within 5 sigma of n/s on random hashes
    oracles::Rng rng(90);
    const uint64_t s = 24;
    const uint64_t n = 1'000'000;
    std::vector<uint64_t> counts(s, 0);
    for (uint64_t i = 0; i < n; i++) counts[shard_of(rng.next(), s)]++;
    const double mean = double(n) / double(s);
    const double sigma = std::sqrt(mean * (1.0 - 1.0 / double(s)));
    for (uint64_t c : counts) {
        CHECK(double(c) > mean - 5 * sigma);
        CHECK(double(c) < mean + 5 * sigma);
    }
}

TEST_CASE("single shard, any strategy, equals the unsharded build") {
    const uint64_t n = 200'000;
    const auto keys = corpus(n);
    const BuildParams p = preset("default");
    const auto plain = serialize(build(keys, p));

    U64SpanSource source(keys);
    for (ShardStrategy strat :
         {ShardStrategy::kInMemory, ShardStrategy::kOnDisk, ShardStrategy::kHybrid}) {
        ShardPlan plan;
        plan.strategy = strat;
        plan.hybrid_disk_shards = 1;
        // target larger than n: one shard
        const auto sharded = serialize(build_sharded(source, p, plan));
        CHECK(sharded == plain);
    }
}

TEST_CASE("strategies produce byte-identical indexes") {
    const uint64_t n = 1'000'000;
    const auto keys = corpus(n, 5);
    const BuildParams p = preset("default");
    U64SpanSource source(keys);

    ShardPlan plan;
    plan.target_shard_keys = 100'000;  // 10 shards
    plan.strategy = ShardStrategy::kInMemory;
    BuildStats stats;
    const PtrHashIndex mem_idx = build_sharded(source, p, plan, 0, &stats);
    const auto in_memory = serialize(mem_idx);

    plan.strategy = ShardStrategy::kOnDisk;
    const auto on_disk = serialize(build_sharded(source, p, plan));

    plan.strategy = ShardStrategy::kHybrid;
    plan.hybrid_disk_shards = 3;
    const auto hybrid = serialize(build_sharded(source, p, plan));

    CHECK(in_memory == on_disk);
    CHECK(in_memory == hybrid);

    // parts nest in shards
    CHECK(stats.shape.parts % 10 == 0);

    // and the result is a valid mphf
    std::vector<uint64_t> out(n);
    mem_idx.index_stream(keys, 32, out.data());
    CHECK(oracles::is_bijection(out, n));
}

TEST_CASE("generated source replays identically") {
    GeneratedU64Source source(50'000, 42);
    std::vector<uint64_t> first, second;
    source.for_each_u64([&](uint64_t k) { first.push_back(k); });
    source.for_each_u64([&](uint64_t k) { second.push_back(k); });
    CHECK(first == second);
    CHECK(first.size() == 50'000);

    // matches the materialized corpus
    for (size_t i = 0; i < 100; i++) CHECK(first[i] == corpus_u64(i, 42));
}

TEST_CASE("sharded string build") {
    std::vector<std::string> keys(120'000);
    for (size_t i = 0; i < keys.size(); i++) keys[i] = corpus_string(i, 23);
    StringSpanSource source(keys);
    ShardPlan plan;
    plan.target_shard_keys = 50'000;
    plan.strategy = ShardStrategy::kInMemory;
    const PtrHashIndex idx = build_sharded(source, preset("default"), plan);
    std::vector<uint64_t> out(keys.size());
    idx.index_loop(keys, out.data());
    CHECK(oracles::is_bijection(out, keys.size()));
}

TEST_CASE("disk strategies clean up their scratch files") {
    const auto keys = corpus(100'000, 6);
    U64SpanSource source(keys);
    const auto dir = std::filesystem::temp_directory_path() / "ptrhash-shard-test";
    std::filesystem::create_directories(dir);
    BuildParams p = preset("fast");
    p.alpha = {95, 100};
    ShardPlan plan;
    plan.strategy = ShardStrategy::kOnDisk;
    plan.target_shard_keys = 20'000;
    plan.shard_dir = dir;
    (void)build_sharded(source, p, plan);
    CHECK(std::filesystem::is_empty(dir));
    std::filesystem::remove_all(dir);
}

TEST_CASE("hybrid plan validation") {
    const auto keys = corpus(10'000, 7);
    U64SpanSource source(keys);
    // forcing many tiny parts needs load-factor slack to absorb their size
    // variance, so keep alpha low here
    BuildParams p = preset("fast");
    p.alpha = {90, 100};
    ShardPlan plan;
    plan.strategy = ShardStrategy::kHybrid;
    plan.target_shard_keys = 1000;  // 10 shards
    plan.hybrid_disk_shards = 0;
    CHECK_THROWS_AS((void)build_sharded(source, p, plan), BuildError);
    plan.hybrid_disk_shards = 10;  // D must stay below s
    CHECK_THROWS_AS((void)build_sharded(source, p, plan), BuildError);
    plan.hybrid_disk_shards = 4;
    CHECK_NOTHROW((void)build_sharded(source, p, plan));
}

TEST_CASE("duplicate keys are fatal through the sharded path too") {
    auto keys = corpus(10'000, 8);
    keys[5000] = keys[17];
    U64SpanSource source(keys);
    BuildParams p = preset("fast");
    p.alpha = {90, 100};
    ShardPlan plan;
    plan.target_shard_keys = 2000;
    try {
        (void)build_sharded(source, p, plan);
        FAIL("expected BuildError");
    } catch (const BuildError& e) {
        CHECK(e.code() == BuildError::Code::kDuplicateKeys);
    }
}
