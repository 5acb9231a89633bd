#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "ptrhash/shape.hpp"

using namespace ptrhash;

TEST_CASE("keys_per_part at alpha 0.99") {
    const Ratio a{99, 100};
    CHECK(keys_per_part(50'000, a) == 80'000);
    CHECK(keys_per_part(80'000, a) == 80'000);
    CHECK(keys_per_part(1, a) == 80'000);
    // ceil(80000*ln(12500)) = 754679; allow +-1 for the log rounding.
    const uint64_t kpp = keys_per_part(1'000'000'000, a);
    CHECK(kpp >= 754'678);
    CHECK(kpp <= 754'680);
}

TEST_CASE("keys_per_part at other load factors") {
    // eps = (1-alpha)/2 and a part minimum of 2/eps^2 keys
    CHECK(keys_per_part(1'000'000, Ratio{98, 100}) == 78'241);   // 20000*ln(1e6/20000)
    CHECK(keys_per_part(1'000'000, Ratio{95, 100}) == 18'383);   // 3200*ln(1e6/3200)
    CHECK(keys_per_part(10'000, Ratio{98, 100}) == 20'000);      // below the minimum
    CHECK(keys_per_part(123, Ratio{1, 1}) == 123);               // alpha = 1: one part
}

TEST_CASE("keys_per_part is monotone in n") {
    const Ratio a{99, 100};
    oracles::Rng rng(11);
    for (int i = 0; i < 2000; i++) {
        const uint64_t n = 1 + rng.below(uint64_t{1} << 40);
        const uint64_t m = n + 1 + rng.below(n);
        CHECK(keys_per_part(n, a) <= keys_per_part(m, a));
    }
}

TEST_CASE("power-of-two shape examples") {
    BuildParams p;
    p.reduce_kind = ReduceKind::kPowerOfTwoMul;
    p.alpha = {99, 100};

    p.lambda = {30, 10};
    Shape s1 = compute_shape(1, p);
    CHECK(s1.parts == 1);
    CHECK(s1.slots_per_part == 131'072);  // 2^17 >= 80000/0.99
    CHECK(s1.buckets_per_part == 43'254);

    p.lambda = {35, 10};
    Shape s9 = compute_shape(1'000'000'000, p);
    CHECK(s9.slots_per_part == uint64_t{1} << 20);
    CHECK(s9.parts == 964);
    CHECK(s9.buckets_per_part == 296'598);  // ceil(0.99*2^20/3.5)
}

TEST_CASE("B formula at S=2^18") {
    // ceil(0.99 * 2^18 / 3.5)
    const uint64_t b = div_ceil_u128(u128{99} * (1 << 18) * 10, u128{100} * 35);
    CHECK(b == 74'150);
}

TEST_CASE("single-part shape avoids powers of two") {
    BuildParams p;
    p.reduce_kind = ReduceKind::kFastModSinglePart;
    p.alpha = {99, 100};
    p.lambda = {30, 10};
    const Shape s = compute_shape(1000, p);
    CHECK(s.parts == 1);
    CHECK(s.slots_per_part >= div_ceil(1000 * 100, 99));
    CHECK(!is_power_of_two(s.slots_per_part));

    // ceil(n/alpha) landing on a power of two gets bumped.
    const Shape s2 = compute_shape(507904, p);  // 507904/0.99 -> 513034.3
    CHECK(!is_power_of_two(s2.slots_per_part));
}

TEST_CASE("presets") {
    const BuildParams fast = preset("fast");
    CHECK(fast.bucket_fn == BucketFnKind::kLinear);
    CHECK(fast.lambda == Ratio{30, 10});
    CHECK(fast.alpha == Ratio{99, 100});
    CHECK(fast.remap_kind == RemapKind::kPlainArray32);
    CHECK(fast.lookahead == 32);

    const BuildParams def = preset("default");
    CHECK(def.bucket_fn == BucketFnKind::kCubic);
    CHECK(def.lambda == Ratio{35, 10});
    CHECK(def.remap_kind == RemapKind::kCacheLineEF);

    const BuildParams compact = preset("compact");
    CHECK(compact.bucket_fn == BucketFnKind::kCubic);
    CHECK(compact.lambda == Ratio{40, 10});
    CHECK(compact.remap_kind == RemapKind::kCacheLineEF);

    CHECK_THROWS_AS((void)preset("turbo"), std::invalid_argument);
}

TEST_CASE("shape invariants over random n, all modes") {
    oracles::Rng rng(42);
    for (ReduceKind rk :
         {ReduceKind::kPowerOfTwoMul, ReduceKind::kFastModMultiPart}) {
        for (const char* name : {"fast", "default", "compact"}) {
            BuildParams p = preset(name);
            p.reduce_kind = rk;
            for (int i = 0; i < 300; i++) {
                const uint64_t n = 1 + rng.below(uint64_t{1} << 40);
                const Shape s = compute_shape(n, p);
                // P*alpha*S >= n, exactly in rationals
                CHECK(u128{s.parts} * p.alpha.num * s.slots_per_part >= u128{n} * p.alpha.den);
                CHECK(u128{s.parts} * s.slots_per_part >= n);
                // B = ceil(alpha*S/lambda) exactly
                CHECK(s.buckets_per_part ==
                      div_ceil_u128(u128{p.alpha.num} * s.slots_per_part * p.lambda.den,
                                    u128{p.alpha.den} * p.lambda.num));
                if (rk == ReduceKind::kPowerOfTwoMul) {
                    CHECK(is_power_of_two(s.slots_per_part));
                    CHECK(s.slots_per_part >=
                          div_ceil_u128(u128{keys_per_part(n, p.alpha)} * p.alpha.den,
                                        p.alpha.num));
                } else {
                    CHECK(!is_power_of_two(s.slots_per_part));
                }
            }
        }
    }
}

TEST_CASE("pilot space approaches 8/lambda for presets at n >= 1e7") {
    for (const char* name : {"fast", "default", "compact"}) {
        const BuildParams p = preset(name);
        for (uint64_t n : {uint64_t{10'000'000}, uint64_t{100'000'000}, uint64_t{1'000'000'000}}) {
            const Shape s = compute_shape(n, p);
            const double bits = 8.0 * double(s.parts) * double(s.buckets_per_part) / double(n);
            const double target = 8.0 * p.lambda.den / p.lambda.num;
            CHECK(bits == doctest::Approx(target).epsilon(0.02));
        }
    }
}

TEST_CASE("sharded part rounding") {
    BuildParams p = preset("default");
    const Shape s = compute_shape(1'000'000, p, 10);
    CHECK(s.parts % 10 == 0);
    CHECK(u128{s.parts} * s.slots_per_part >= 1'000'000);
}

TEST_CASE("parameter validation") {
    BuildParams p;
    p.alpha = {0, 100};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.alpha = {101, 100};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = BuildParams{};
    p.lambda = {5, 10};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = BuildParams{};
    p.lookahead = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    // CacheLineEF needs alpha <= 0.99
    p = BuildParams{};
    p.remap_kind = RemapKind::kCacheLineEF;
    p.alpha = {995, 1000};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.alpha = {99, 100};
    CHECK_NOTHROW(p.validate());
}
