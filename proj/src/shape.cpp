#include "ptrhash/shape.hpp"

#include <string>

namespace ptrhash {

const char* bucket_fn_name(BucketFnKind k) {
    switch (k) {
        case BucketFnKind::kLinear: return "linear";
        case BucketFnKind::kQuadratic: return "quadratic";
        case BucketFnKind::kCubic: return "cubic";
        case BucketFnKind::kSkewed: return "skewed";
        case BucketFnKind::kOptimal: return "optimal";
    }
    return "?";
}

const char* remap_kind_name(RemapKind k) {
    switch (k) {
        case RemapKind::kPlainArray32: return "plain32";
        case RemapKind::kCacheLineEF: return "cacheline-ef";
        case RemapKind::kEliasFano: return "elias-fano";
    }
    return "?";
}

const char* reduce_kind_name(ReduceKind k) {
    switch (k) {
        case ReduceKind::kPowerOfTwoMul: return "pow2-mul";
        case ReduceKind::kFastModSinglePart: return "fastmod-single";
        case ReduceKind::kFastModMultiPart: return "fastmod-multi";
    }
    return "?";
}

BucketFnKind bucket_fn_from_name(std::string_view name) {
    if (name == "linear") return BucketFnKind::kLinear;
    if (name == "quadratic") return BucketFnKind::kQuadratic;
    if (name == "cubic") return BucketFnKind::kCubic;
    if (name == "skewed") return BucketFnKind::kSkewed;
    if (name == "optimal") return BucketFnKind::kOptimal;
    throw std::invalid_argument("unknown bucket function: " + std::string(name));
}

RemapKind remap_kind_from_name(std::string_view name) {
    if (name == "plain32") return RemapKind::kPlainArray32;
    if (name == "cacheline-ef" || name == "clef") return RemapKind::kCacheLineEF;
    if (name == "elias-fano" || name == "ef") return RemapKind::kEliasFano;
    throw std::invalid_argument("unknown remap kind: " + std::string(name));
}

void BuildParams::validate() const {
    if (alpha.num == 0 || alpha.den == 0 || alpha.num > alpha.den)
        throw std::invalid_argument("alpha must be in (0, 1]");
    if (lambda.den == 0 || lambda.num < lambda.den)
        throw std::invalid_argument("lambda must be >= 1");
    if (lookahead < 1) throw std::invalid_argument("lookahead must be >= 1");
    // CacheLineEF blocks span at most 21504; at alpha <= 0.99 the average gap
    // between remap values stays well under that.
    if (remap_kind == RemapKind::kCacheLineEF &&
        uint64_t{alpha.num} * 100 > uint64_t{alpha.den} * 99)
        throw std::invalid_argument("CacheLineEF remap requires alpha <= 0.99");
}

BuildParams preset(std::string_view name) {
    BuildParams p;
    if (name == "fast") {
        p.bucket_fn = BucketFnKind::kLinear;
        p.lambda = {30, 10};
        p.remap_kind = RemapKind::kPlainArray32;
    } else if (name == "default") {
        p.bucket_fn = BucketFnKind::kCubic;
        p.lambda = {35, 10};
        p.remap_kind = RemapKind::kCacheLineEF;
    } else if (name == "compact") {
        p.bucket_fn = BucketFnKind::kCubic;
        p.lambda = {40, 10};
        p.remap_kind = RemapKind::kCacheLineEF;
    } else {
        throw std::invalid_argument("unknown preset: " + std::string(name));
    }
    p.alpha = {99, 100};
    p.lookahead = 32;
    return p;
}

uint64_t keys_per_part(uint64_t n, Ratio alpha) {
    if (n == 0) throw std::invalid_argument("n must be >= 1");
    if (alpha.num == alpha.den) {
        // alpha = 1: no slack; a single part avoids over-subscription.
        return n;
    }
    // eps = (1-alpha)/2, minimum part size M = 2/eps^2 = 8*den^2/(den-num)^2.
    const double den = alpha.den;
    const double gap = static_cast<double>(alpha.den - alpha.num);
    const double m = 8.0 * den * den / (gap * gap);
    if (static_cast<double>(n) <= m) return static_cast<uint64_t>(std::ceil(m));
    const double v = m * std::log(static_cast<double>(n) / m);
    return static_cast<uint64_t>(std::ceil(std::max(m, v)));
}

Shape compute_shape(uint64_t n, const BuildParams& params, uint64_t part_multiple) {
    params.validate();
    if (n == 0) throw std::invalid_argument("n must be >= 1");
    if (part_multiple == 0) part_multiple = 1;

    const uint64_t a_num = params.alpha.num;
    const uint64_t a_den = params.alpha.den;

    Shape shape;
    shape.n = n;

    switch (params.reduce_kind) {
        case ReduceKind::kPowerOfTwoMul: {
            const uint64_t kpp = keys_per_part(n, params.alpha);
            uint64_t s = std::bit_ceil(div_ceil_u128(u128{kpp} * a_den, a_num));
            shape.slots_per_part = s;
            shape.parts = div_ceil_u128(u128{n} * a_den, u128{a_num} * s);
            shape.parts = div_ceil(shape.parts, part_multiple) * part_multiple;
            break;
        }
        case ReduceKind::kFastModSinglePart: {
            if (part_multiple != 1)
                throw std::invalid_argument("single-part mode cannot be sharded");
            uint64_t s = div_ceil_u128(u128{n} * a_den, a_num);
            while (is_power_of_two(s)) s++;
            if (s >= (uint64_t{1} << 32))
                throw std::overflow_error("single-part mode needs n/alpha < 2^32");
            shape.parts = 1;
            shape.slots_per_part = s;
            break;
        }
        case ReduceKind::kFastModMultiPart: {
            const uint64_t kpp = keys_per_part(n, params.alpha);
            uint64_t p = div_ceil(n, kpp);
            p = div_ceil(p, part_multiple) * part_multiple;
            uint64_t s = div_ceil_u128(u128{n} * a_den, u128{a_num} * p);
            if (is_power_of_two(s)) s++;
            if (s >= (uint64_t{1} << 32))
                throw std::overflow_error("fastmod reduce needs slots per part < 2^32");
            shape.parts = p;
            shape.slots_per_part = s;
            break;
        }
    }

    // B = ceil(alpha*S/lambda), exact in rationals.
    shape.buckets_per_part =
        div_ceil_u128(u128{a_num} * shape.slots_per_part * params.lambda.den,
                      u128{a_den} * params.lambda.num);

    if (shape.parts > (uint64_t{1} << 40) ||
        u128{shape.parts} * shape.slots_per_part > (u128{1} << 62) ||
        u128{shape.parts} * shape.buckets_per_part > (u128{1} << 62))
        throw std::overflow_error("shape: slot index range overflow");

    return shape;
}

}  // namespace ptrhash
