#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ptrhash/build.hpp"

namespace ptrhash {

// Construction for key sets whose hashes do not fit in memory: the hash space
// [0, 2^64) is cut into `s` equal intervals (shards) processed one at a time.
// Shards exist only during construction; the finished index is byte-identical
// whichever strategy produced it.

enum class ShardStrategy : uint8_t {
    kInMemory = 0,  // iterate the keys s times, keeping one shard per pass
    kOnDisk = 1,    // hash once, spill every shard to its own file
    kHybrid = 2,    // spill D < s shards per pass, iterating ceil(s/D) times
};

const char* shard_strategy_name(ShardStrategy s);

struct ShardPlan {
    ShardStrategy strategy = ShardStrategy::kInMemory;
    uint64_t target_shard_keys = uint64_t{1} << 32;
    uint32_t hybrid_disk_shards = 0;  // D; required for kHybrid, 1 <= D < s
    std::filesystem::path shard_dir = std::filesystem::temp_directory_path();
};

inline uint64_t shard_count(uint64_t n, const ShardPlan& plan) {
    return std::max<uint64_t>(1, div_ceil(n, std::max<uint64_t>(1, plan.target_shard_keys)));
}

// Shard of a hash: hi(s * h.hi), i.e. interval [2^64*i/s, 2^64*(i+1)/s).
inline uint64_t shard_of(uint64_t hash_hi, uint64_t shards) {
    return mul_hi(shards, hash_hi);
}

// A key stream the sharded builder can traverse several times from the start.
class KeySource {
  public:
    virtual ~KeySource() = default;
    virtual uint64_t size() const = 0;
    virtual KeyKind kind() const = 0;
    virtual void for_each_u64(const std::function<void(uint64_t)>& fn) const;
    virtual void for_each_str(const std::function<void(std::string_view)>& fn) const;
};

class U64SpanSource final : public KeySource {
  public:
    explicit U64SpanSource(std::span<const uint64_t> keys) : keys_(keys) {}
    uint64_t size() const override { return keys_.size(); }
    KeyKind kind() const override { return KeyKind::kU64; }
    void for_each_u64(const std::function<void(uint64_t)>& fn) const override {
        for (uint64_t k : keys_) fn(k);
    }

  private:
    std::span<const uint64_t> keys_;
};

class StringSpanSource final : public KeySource {
  public:
    explicit StringSpanSource(std::span<const std::string> keys) : keys_(keys) {}
    uint64_t size() const override { return keys_.size(); }
    KeyKind kind() const override { return KeyKind::kBytes; }
    void for_each_str(const std::function<void(std::string_view)>& fn) const override {
        for (const auto& k : keys_) fn(k);
    }

  private:
    std::span<const std::string> keys_;
};

// Deterministic distinct 64-bit corpus; re-iterable without storing the keys.
class GeneratedU64Source final : public KeySource {
  public:
    GeneratedU64Source(uint64_t count, uint64_t gen_seed) : count_(count), gen_seed_(gen_seed) {}
    uint64_t size() const override { return count_; }
    KeyKind kind() const override { return KeyKind::kU64; }
    void for_each_u64(const std::function<void(uint64_t)>& fn) const override;

  private:
    uint64_t count_;
    uint64_t gen_seed_;
};

PtrHashIndex build_sharded(const KeySource& source, const BuildParams& params,
                           const ShardPlan& plan, unsigned threads = 0,
                           BuildStats* stats = nullptr);

}  // namespace ptrhash
