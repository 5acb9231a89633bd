#include "ptrhash/stats.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace ptrhash {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string stats_to_text(const StatsRecord& record) {
    const BuildStats& b = record.build;
    std::ostringstream out;
    out << "[build]\n";
    if (!record.corpus.empty()) out << "corpus=" << record.corpus << "\n";
    out << "n=" << b.n << "\n";
    out << "seed=" << b.seed << "\n";
    out << "attempts=" << b.attempts << "\n";
    out << "key_kind=" << key_kind_name(b.key_kind) << "\n";
    out << "hash_algo=" << hash_algo_name(b.hash_algo) << "\n";
    out << "bucket_fn=" << bucket_fn_name(b.bucket_fn) << "\n";
    out << "remap_kind=" << remap_kind_name(b.remap_kind) << "\n";
    out << "reduce_kind=" << reduce_kind_name(b.reduce_kind) << "\n";
    out << "remap_fell_back=" << (b.remap_fell_back ? 1 : 0) << "\n";
    out << "parts=" << b.shape.parts << "\n";
    out << "slots_per_part=" << b.shape.slots_per_part << "\n";
    out << "buckets_per_part=" << b.shape.buckets_per_part << "\n";
    out << "total_evictions=" << b.total_evictions << "\n";
    out << "\n[space]\n";
    out << "pilot_bytes=" << b.pilot_bytes << "\n";
    out << "remap_bytes=" << b.remap_payload_bytes << "\n";
    out << "pilots_bits_per_key=" << fmt(b.pilots_bits_per_key()) << "\n";
    out << "remap_bits_per_key=" << fmt(b.remap_bits_per_key()) << "\n";
    out << "total_bits_per_key=" << fmt(b.total_bits_per_key()) << "\n";
    out << "\n[construction_ns_per_key]\n";
    out << "hash=" << fmt(b.hash_ns_per_key) << "\n";
    out << "sort=" << fmt(b.sort_ns_per_key) << "\n";
    out << "search=" << fmt(b.search_ns_per_key) << "\n";
    out << "remap=" << fmt(b.remap_ns_per_key) << "\n";
    out << "total=" << fmt(b.total_ns_per_key) << "\n";
    out << "\n[evictions_by_percentile]\n";
    out << "values=";
    for (size_t i = 0; i < b.evictions_by_percentile.size(); i++) {
        if (i) out << ",";
        out << b.evictions_by_percentile[i];
    }
    out << "\n";
    out << "\n[bucket_sizes]\n";
    for (size_t s = 0; s < b.bucket_size_counts.size(); s++) {
        out << "size_" << s << "=" << b.bucket_size_counts[s] << "\n";
    }
    for (const auto& q : record.queries) {
        out << "\n[query]\n";
        out << "mode=" << q.mode << "\n";
        out << "threads=" << q.threads << "\n";
        out << "minimal=" << (q.minimal ? 1 : 0) << "\n";
        out << "keys=" << q.keys << "\n";
        out << "ns_per_key=" << fmt(q.ns_per_key) << "\n";
    }
    return out.str();
}

namespace {

uint64_t to_u64(const std::string& v) {
    uint64_t x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{}) throw std::invalid_argument("stats: bad integer '" + v + "'");
    (void)p;
    return x;
}

double to_f64(const std::string& v) { return std::stod(v); }

}  // namespace

StatsRecord stats_from_text(const std::string& text) {
    StatsRecord rec;
    BuildStats& b = rec.build;
    std::istringstream in(text);
    std::string line;
    std::string section;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            if (section == "query") rec.queries.emplace_back();
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);

        if (section == "build") {
            if (key == "corpus") rec.corpus = val;
            else if (key == "n") b.n = to_u64(val);
            else if (key == "seed") b.seed = to_u64(val);
            else if (key == "attempts") b.attempts = static_cast<uint32_t>(to_u64(val));
            else if (key == "key_kind") b.key_kind = val == "str" ? KeyKind::kBytes : KeyKind::kU64;
            else if (key == "bucket_fn") b.bucket_fn = bucket_fn_from_name(val);
            else if (key == "remap_kind") b.remap_kind = remap_kind_from_name(val);
            else if (key == "remap_fell_back") b.remap_fell_back = val == "1";
            else if (key == "parts") b.shape.parts = to_u64(val);
            else if (key == "slots_per_part") b.shape.slots_per_part = to_u64(val);
            else if (key == "buckets_per_part") b.shape.buckets_per_part = to_u64(val);
            else if (key == "total_evictions") b.total_evictions = to_u64(val);
        } else if (section == "space") {
            if (key == "pilot_bytes") b.pilot_bytes = to_u64(val);
            else if (key == "remap_bytes") b.remap_payload_bytes = to_u64(val);
        } else if (section == "construction_ns_per_key") {
            if (key == "hash") b.hash_ns_per_key = to_f64(val);
            else if (key == "sort") b.sort_ns_per_key = to_f64(val);
            else if (key == "search") b.search_ns_per_key = to_f64(val);
            else if (key == "remap") b.remap_ns_per_key = to_f64(val);
            else if (key == "total") b.total_ns_per_key = to_f64(val);
        } else if (section == "evictions_by_percentile") {
            if (key == "values") {
                size_t idx = 0;
                std::istringstream vs(val);
                std::string item;
                while (std::getline(vs, item, ',') && idx < b.evictions_by_percentile.size())
                    b.evictions_by_percentile[idx++] = to_u64(item);
            }
        } else if (section == "bucket_sizes") {
            if (key.rfind("size_", 0) == 0) {
                const size_t s = static_cast<size_t>(to_u64(key.substr(5)));
                if (b.bucket_size_counts.size() <= s) b.bucket_size_counts.resize(s + 1, 0);
                b.bucket_size_counts[s] = to_u64(val);
            }
        } else if (section == "query" && !rec.queries.empty()) {
            QueryBenchResult& q = rec.queries.back();
            if (key == "mode") q.mode = val;
            else if (key == "threads") q.threads = static_cast<unsigned>(to_u64(val));
            else if (key == "minimal") q.minimal = val == "1";
            else if (key == "keys") q.keys = to_u64(val);
            else if (key == "ns_per_key") q.ns_per_key = to_f64(val);
        }
    }
    b.shape.n = b.n;
    return rec;
}

}  // namespace ptrhash
