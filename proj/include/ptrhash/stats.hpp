#pragma once

#include <string>
#include <vector>

#include "ptrhash/build.hpp"

namespace ptrhash {

struct QueryBenchResult {
    std::string mode;  // "loop", "batch:N", "stream:N"
    unsigned threads = 1;
    bool minimal = true;
    double ns_per_key = 0;
    uint64_t keys = 0;
};

// Build + bench numbers, written as line-delimited key=value groups so that
// any toolchain can parse them without a schema.
struct StatsRecord {
    BuildStats build;
    // Where the keys came from, for reproducibility (e.g. "generate:u64:1000000
    // gen-seed=42" or "file:keys.txt").
    std::string corpus;
    std::vector<QueryBenchResult> queries;
};

std::string stats_to_text(const StatsRecord& record);
StatsRecord stats_from_text(const std::string& text);

}  // namespace ptrhash
