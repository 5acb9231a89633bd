#include "ptrhash/bucket_fn.hpp"

#include <array>
#include <cmath>

namespace ptrhash::gamma {

namespace {

constexpr int kTableBits = 16;
constexpr size_t kTableSize = size_t{1} << kTableBits;

struct OptimalTable {
    std::array<uint64_t, kTableSize + 1> v;

    OptimalTable() {
        constexpr double eps = 1.0 / 256.0;
        const double scale = std::ldexp(1.0, 64);
        uint64_t prev = 0;
        for (size_t i = 0; i <= kTableSize; i++) {
            const double x = static_cast<double>(i) / kTableSize;
            double y = x;
            if (x < 1.0) y = x + (1.0 - eps) * (1.0 - x) * std::log(1.0 - x);
            double scaled = y * scale;
            uint64_t u;
            if (scaled >= scale) {
                u = UINT64_MAX;
            } else if (scaled <= 0.0) {
                u = 0;
            } else {
                u = static_cast<uint64_t>(scaled);
            }
            // Rounding can locally invert the trend; clamp to keep the table
            // non-decreasing.
            if (u < prev) u = prev;
            v[i] = u;
            prev = u;
        }
    }
};

const OptimalTable& table() {
    static const OptimalTable t;
    return t;
}

}  // namespace

uint64_t optimal(uint64_t x) {
    const auto& t = table().v;
    const uint64_t idx = x >> (64 - kTableBits);
    const uint64_t frac = x & ((uint64_t{1} << (64 - kTableBits)) - 1);
    const uint64_t lo = t[idx];
    const uint64_t hi = t[idx + 1];
    return lo + static_cast<uint64_t>((u128{hi - lo} * frac) >> (64 - kTableBits));
}

}  // namespace ptrhash::gamma
