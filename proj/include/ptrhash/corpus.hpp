#pragma once

#include <cstdint>
#include <string>

#include "ptrhash/common.hpp"

namespace ptrhash {

// Reproducible key corpora for benchmarks and the CLI's --generate mode.

// i'th key of the u64 corpus under gen_seed. Distinct for distinct i (the
// finalizer is a bijection applied to distinct inputs).
inline uint64_t corpus_u64(uint64_t i, uint64_t gen_seed) {
    return mix64(gen_seed + (i + 1) * kGoldenGamma);
}

// i'th key of the string corpus: lowercase letters, length uniform in
// [10, 50].
inline std::string corpus_string(uint64_t i, uint64_t gen_seed) {
    uint64_t state = mix64(gen_seed ^ (i + 1) * kGoldenGamma);
    const size_t len = 10 + state % 41;
    std::string s(len, 'a');
    for (size_t j = 0; j < len; j++) {
        state = mix64(state + kGoldenGamma);
        s[j] = static_cast<char>('a' + state % 26);
    }
    return s;
}

}  // namespace ptrhash
