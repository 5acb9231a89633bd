#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ptrhash/hash.hpp"
#include "ptrhash/reduce.hpp"

using namespace ptrhash;

TEST_CASE("hash_int basics") {
    CHECK(hash_int(0, 0) == 0);  // zero annihilates the multiply
    // Multiplying by the inverse constant undoes the hash.
    const uint64_t inv = mix_constant_inverse();
    CHECK(inv * kMixConstant == 1);
    oracles::Rng rng(1);
    for (int i = 0; i < 1000; i++) {
        const uint64_t k = rng.next();
        CHECK(inv * hash_int(k, 0) == k);
        const uint64_t seed = rng.next();
        CHECK((inv * hash_int(k, seed)) == (k ^ seed));
    }
}

TEST_CASE("hash_int is injective on a large sample") {
    oracles::Rng rng(2);
    const uint64_t seed = 0xfeedface;
    std::vector<uint64_t> keys(1'000'000);
    for (auto& k : keys) k = rng.next();
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    std::vector<uint64_t> hashes(keys.size());
    for (size_t i = 0; i < keys.size(); i++) hashes[i] = hash_int(keys[i], seed);
    std::sort(hashes.begin(), hashes.end());
    CHECK(std::adjacent_find(hashes.begin(), hashes.end()) == hashes.end());
}

TEST_CASE("hash_pilot") {
    CHECK(hash_pilot(0, 0) == 0);
    CHECK(hash_pilot(1, 0) == kMixConstant);
    // function of p xor seed only
    CHECK(hash_pilot(3, 5) == hash_pilot(5, 3));
    // 256 distinct values under any fixed seed
    for (uint64_t seed : {uint64_t{0}, uint64_t{0xdeadbeef}, UINT64_MAX}) {
        std::set<uint64_t> vals;
        for (uint64_t p = 0; p < 256; p++) vals.insert(hash_pilot(p, seed));
        CHECK(vals.size() == 256);
    }
}

TEST_CASE("string hash determinism and seed sensitivity") {
    const HashAlgo algo = pick_string_hash(1000);
    oracles::Rng rng(3);
    std::vector<std::string> keys;
    for (int i = 0; i < 100'000; i++) {
        std::string s(8 + rng.below(24), 'x');
        for (auto& c : s) c = static_cast<char>('a' + rng.below(26));
        keys.push_back(std::move(s));
    }

    int seed_collisions = 0;
    for (const auto& k : keys) {
        const HashValue a = hash_bytes(k, 123, algo);
        const HashValue b = hash_bytes(k, 123, algo);
        CHECK(a == b);
        if (a == hash_bytes(k, 456, algo)) seed_collisions++;
    }
    // different seeds agree only by (vanishing) chance
    CHECK(seed_collisions <= 2);
}

TEST_CASE("string hash has few collisions across a corpus") {
    for (HashAlgo algo : {pick_string_hash(1000), HashAlgo::kPortable64}) {
        oracles::Rng rng(4);
        std::vector<uint64_t> hs;
        hs.reserve(200'000);
        for (int i = 0; i < 200'000; i++) {
            const std::string s = "key-" + std::to_string(i) + "-" + std::to_string(rng.next());
            hs.push_back(hash_bytes(s, 99, algo).lo);
        }
        std::sort(hs.begin(), hs.end());
        // birthday bound: expect ~1e-9 collisions for 2e5 64-bit values
        CHECK(std::adjacent_find(hs.begin(), hs.end()) == hs.end());
    }
}

TEST_CASE("128-bit halves look independent") {
    const HashAlgo algo = cpu_has_aes() ? HashAlgo::kAes128 : HashAlgo::kPortable128;
    // chi-square over the 16x16 table of (hi&15, lo&15)
    std::array<uint64_t, 256> cells{};
    const int samples = 100'000;
    for (int i = 0; i < samples; i++) {
        const std::string s = "independence-" + std::to_string(i);
        const HashValue h = hash_bytes(s, 7, algo);
        CHECK(h.hi != h.lo);
        cells[(h.hi & 15) * 16 + (h.lo & 15)]++;
    }
    const double expected = double(samples) / 256.0;
    double chi2 = 0;
    for (uint64_t c : cells) {
        const double d = double(c) - expected;
        chi2 += d * d / expected;
    }
    // 255 degrees of freedom; 99.99th percentile is ~340
    CHECK(chi2 < 340.0);
}

TEST_CASE("portable and aes variants differ and both work") {
    const HashValue p = hash_bytes("hello world", 1, HashAlgo::kPortable64);
    CHECK(p.hi == p.lo);
    if (cpu_has_aes()) {
        const HashValue a = hash_bytes("hello world", 1, HashAlgo::kAes64);
        CHECK(a.hi == a.lo);
        CHECK(a.lo != p.lo);
    }
}

TEST_CASE("string hash width policy") {
    CHECK(!hash_algo_is_wide(pick_string_hash(1'000'000)));
    CHECK(hash_algo_is_wide(pick_string_hash(uint64_t{1} << 32)));
    CHECK(hash_algo_is_wide(pick_string_hash(100, true)));
}

TEST_CASE("reduce: power of two") {
    Reducer r1(1);
    for (uint64_t x : {uint64_t{0}, uint64_t{17}, UINT64_MAX}) CHECK(r1.reduce(x) == 0);

    const uint64_t s = uint64_t{1} << 13;
    Reducer r(s);
    CHECK(r.uses_power_of_two());
    oracles::Rng rng(5);
    for (int i = 0; i < 10'000; i++) {
        const uint64_t x = rng.next();
        CHECK(r.reduce(x) == (mul_hi(kMixConstant, x) & (s - 1)));  // definitional
        CHECK(r.reduce(x) < s);
    }
}

TEST_CASE("reduce: fastmod equals the division oracle") {
    oracles::Rng rng(6);
    for (uint64_t s : {uint64_t{3}, uint64_t{1000}, (uint64_t{1} << 31) - 1}) {
        Reducer r(s);
        CHECK(!r.uses_power_of_two());
        for (int i = 0; i < 1'000'000; i++) {
            const uint64_t x = rng.next();
            CHECK(r.fastmod().mod(x, s) == oracles::mod_div(x, s));
        }
        // boundary values
        CHECK(r.fastmod().mod(UINT64_MAX, s) == oracles::mod_div(UINT64_MAX, s));
        CHECK(r.fastmod().mod(0, s) == 0);
    }
}

TEST_CASE("reduce rejects invalid sizes") {
    CHECK_THROWS_AS(Reducer(0), std::invalid_argument);
    CHECK_THROWS_AS(Reducer((uint64_t{1} << 32) + 1), std::invalid_argument);
    CHECK_NOTHROW(Reducer(uint64_t{1} << 40));  // powers of two use the mask path
}
