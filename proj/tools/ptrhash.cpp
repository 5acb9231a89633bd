// Command-line front end: build, verify, query, bench and stats over index
// files or generated corpora.

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "ptrhash/build.hpp"
#include "ptrhash/corpus.hpp"
#include "ptrhash/serde.hpp"
#include "ptrhash/sharding.hpp"
#include "ptrhash/stats.hpp"

using namespace ptrhash;

namespace {

// ---- argument helpers -------------------------------------------------------

Ratio parse_ratio(const std::string& text) {
    const size_t dot = text.find('.');
    if (dot == std::string::npos) {
        return Ratio{static_cast<uint32_t>(std::stoul(text)), 1};
    }
    const std::string whole = text.substr(0, dot);
    std::string frac = text.substr(dot + 1);
    if (frac.size() > 6) frac = frac.substr(0, 6);
    uint32_t den = 1;
    for (size_t i = 0; i < frac.size(); i++) den *= 10;
    const uint32_t num = static_cast<uint32_t>(std::stoul(whole.empty() ? "0" : whole)) * den +
                         static_cast<uint32_t>(frac.empty() ? 0 : std::stoul(frac));
    return Ratio{num, den};
}

struct QueryMode {
    enum class Kind { kLoop, kBatch, kStream } kind = Kind::kLoop;
    size_t width = 32;  // batch size or lookahead
    std::string text = "loop";
};

QueryMode parse_mode(const std::string& text) {
    QueryMode m;
    m.text = text;
    if (text == "loop") {
        m.kind = QueryMode::Kind::kLoop;
        return m;
    }
    const size_t colon = text.find(':');
    const std::string head = text.substr(0, colon);
    if (colon != std::string::npos) m.width = std::stoul(text.substr(colon + 1));
    if (head == "batch") {
        m.kind = QueryMode::Kind::kBatch;
    } else if (head == "stream") {
        m.kind = QueryMode::Kind::kStream;
        if (colon == std::string::npos) m.width = 32;
    } else {
        throw CLI::ValidationError("--mode", "expected loop, batch:N or stream:N");
    }
    if (m.width < 1) throw CLI::ValidationError("--mode", "batch/lookahead must be >= 1");
    return m;
}

struct GenerateSpec {
    KeyKind kind = KeyKind::kU64;
    uint64_t count = 0;
};

GenerateSpec parse_generate(const std::string& text) {
    const size_t colon = text.find(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError("--generate", "expected u64:COUNT or str:COUNT");
    const std::string kind = text.substr(0, colon);
    GenerateSpec spec;
    if (kind == "u64") {
        spec.kind = KeyKind::kU64;
    } else if (kind == "str") {
        spec.kind = KeyKind::kBytes;
    } else {
        throw CLI::ValidationError("--generate", "key kind must be u64 or str");
    }
    spec.count = std::stoull(text.substr(colon + 1));
    if (spec.count == 0) throw CLI::ValidationError("--generate", "count must be >= 1");
    return spec;
}

// ---- key input --------------------------------------------------------------

struct KeySet {
    KeyKind kind = KeyKind::kU64;
    std::vector<uint64_t> u64s;
    std::vector<std::string> strings;

    uint64_t size() const {
        return kind == KeyKind::kU64 ? u64s.size() : strings.size();
    }
};

KeySet load_keys_file(const std::string& path, const std::string& type,
                      const std::string& format) {
    KeySet keys;
    if (type == "u64") {
        keys.kind = KeyKind::kU64;
        if (format == "binary") {
            std::ifstream in(path, std::ios::binary | std::ios::ate);
            if (!in) throw std::runtime_error("cannot open key file: " + path);
            const std::streamsize size = in.tellg();
            if (size % 8 != 0)
                throw std::runtime_error("binary u64 key file must be a multiple of 8 bytes");
            in.seekg(0);
            keys.u64s.resize(static_cast<size_t>(size) / 8);
            in.read(reinterpret_cast<char*>(keys.u64s.data()), size);
            if (!in) throw std::runtime_error("key file read failed: " + path);
        } else {
            std::ifstream in(path);
            if (!in) throw std::runtime_error("cannot open key file: " + path);
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                uint64_t v = 0;
                const auto [p, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
                if (ec != std::errc{} || p != line.data() + line.size())
                    throw std::runtime_error("bad integer key line: '" + line + "'");
                keys.u64s.push_back(v);
            }
        }
    } else if (type == "str") {
        keys.kind = KeyKind::kBytes;
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open key file: " + path);
        std::string line;
        while (std::getline(in, line)) keys.strings.push_back(line);
    } else {
        throw std::runtime_error("--type must be u64 or str");
    }
    if (keys.size() == 0) throw std::runtime_error("key file is empty: " + path);
    return keys;
}

KeySet generate_keys(const GenerateSpec& spec, uint64_t gen_seed) {
    KeySet keys;
    keys.kind = spec.kind;
    if (spec.kind == KeyKind::kU64) {
        keys.u64s.resize(spec.count);
        for (uint64_t i = 0; i < spec.count; i++) keys.u64s[i] = corpus_u64(i, gen_seed);
    } else {
        keys.strings.resize(spec.count);
        for (uint64_t i = 0; i < spec.count; i++) keys.strings[i] = corpus_string(i, gen_seed);
    }
    return keys;
}

// ---- shared query driving ----------------------------------------------------

template <class Key>
void run_mode(const PtrHashIndex& idx, std::span<const Key> keys, const QueryMode& mode,
              uint64_t* out, bool minimal) {
    switch (mode.kind) {
        case QueryMode::Kind::kLoop:
            idx.index_loop(keys, out, minimal);
            break;
        case QueryMode::Kind::kBatch:
            idx.index_batched(keys, mode.width, out, minimal);
            break;
        case QueryMode::Kind::kStream:
            idx.index_stream(keys, mode.width, out, minimal);
            break;
    }
}

void run_mode_keys(const PtrHashIndex& idx, const KeySet& keys, const QueryMode& mode,
                   uint64_t* out, bool minimal) {
    if (keys.kind == KeyKind::kU64) {
        run_mode<uint64_t>(idx, keys.u64s, mode, out, minimal);
    } else {
        run_mode<std::string>(idx, keys.strings, mode, out, minimal);
    }
}

// Full bijectivity check: the outputs over all keys must hit [0, n) exactly.
bool verify_bijection(const PtrHashIndex& idx, const KeySet& keys, std::string& error) {
    const uint64_t n = keys.size();
    if (idx.n() != n) {
        error = "index was built over " + std::to_string(idx.n()) + " keys, got " +
                std::to_string(n);
        return false;
    }
    std::vector<uint64_t> out(n);
    run_mode_keys(idx, keys, parse_mode("stream:32"), out.data(), true);

    std::vector<uint64_t> seen(div_ceil(n, 64), 0);
    for (uint64_t i = 0; i < n; i++) {
        const uint64_t v = out[i];
        if (v >= n) {
            error = "index " + std::to_string(v) + " out of range";
            return false;
        }
        if ((seen[v >> 6] >> (v & 63)) & 1) {
            error = "slot " + std::to_string(v) + " hit twice";
            return false;
        }
        seen[v >> 6] |= uint64_t{1} << (v & 63);
    }
    return true;
}

double time_ns_per_key(const std::function<void()>& fn, uint64_t keys, int repeats) {
    double best = 1e300;
    for (int r = 0; r < repeats; r++) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        const double ns =
            double(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
        best = std::min(best, ns / double(keys));
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PtrHash: minimal perfect hashing with byte-sized pilots"};
    app.require_subcommand(1);

    // common options
    std::string keys_path, keys_type = "u64", keys_format = "decimal";
    std::string generate_text;
    uint64_t gen_seed = 42;
    unsigned threads = 0;

    auto add_key_opts = [&](CLI::App* cmd) {
        cmd->add_option("--keys", keys_path, "key file (one key per line; u64 also binary)");
        cmd->add_option("--type", keys_type, "key type for --keys: u64|str")
            ->check(CLI::IsMember({"u64", "str"}));
        cmd->add_option("--format", keys_format, "u64 key file format: decimal|binary")
            ->check(CLI::IsMember({"decimal", "binary"}));
        cmd->add_option("--generate", generate_text, "generate keys, e.g. u64:1000000");
        cmd->add_option("--gen-seed", gen_seed, "seed for --generate corpora");
    };
    auto get_keys = [&]() -> KeySet {
        if (!generate_text.empty()) return generate_keys(parse_generate(generate_text), gen_seed);
        if (!keys_path.empty()) return load_keys_file(keys_path, keys_type, keys_format);
        throw std::runtime_error("need --keys or --generate");
    };
    auto corpus_description = [&]() -> std::string {
        if (!generate_text.empty())
            return "generate:" + generate_text + " gen-seed=" + std::to_string(gen_seed);
        return "file:" + keys_path;
    };

    // ---- build ----
    auto* cmd_build = app.add_subcommand("build", "build an index over a key set");
    std::string preset_name = "default", out_path, stats_path;
    std::string alpha_text, lambda_text, gamma_name, remap_name, reduce_name;
    std::optional<uint64_t> seed_opt;
    std::string shard_strategy_text;
    uint64_t shard_size = uint64_t{1} << 32;
    std::string shard_dir;
    add_key_opts(cmd_build);
    cmd_build->add_option("--preset", preset_name, "fast|default|compact")
        ->check(CLI::IsMember({"fast", "default", "compact"}));
    cmd_build->add_option("-o,--output", out_path, "index file to write")->required();
    cmd_build->add_option("--stats-out", stats_path, "write build stats to this file");
    cmd_build->add_option("--alpha", alpha_text, "load factor override, e.g. 0.99");
    cmd_build->add_option("--lambda", lambda_text, "bucket size override, e.g. 3.5");
    cmd_build->add_option("--gamma", gamma_name,
                          "bucket fn: linear|quadratic|cubic|skewed|optimal");
    cmd_build->add_option("--remap", remap_name, "remap: plain32|cacheline-ef|elias-fano");
    cmd_build->add_option("--reduce", reduce_name,
                          "reduce: pow2-mul|fastmod-single|fastmod-multi");
    cmd_build->add_option("--seed", seed_opt, "initial construction seed");
    cmd_build->add_option("--threads", threads, "worker threads (0 = all cores)");
    cmd_build->add_option("--shard-strategy", shard_strategy_text,
                          "sharded construction: memory|disk|hybrid:D");
    cmd_build->add_option("--shard-size", shard_size, "target keys per shard");
    cmd_build->add_option("--shard-dir", shard_dir, "scratch dir for disk sharding");

    // ---- verify ----
    auto* cmd_verify = app.add_subcommand("verify", "check an index is a bijection onto [0,n)");
    std::string verify_index;
    cmd_verify->add_option("--index", verify_index, "index file")->required();
    add_key_opts(cmd_verify);
    cmd_verify->add_option("--threads", threads, "worker threads");

    // ---- query ----
    auto* cmd_query = app.add_subcommand("query", "stream keys from stdin, indices to stdout");
    std::string query_index, mode_text = "stream:32";
    cmd_query->add_option("--index", query_index, "index file")->required();
    cmd_query->add_option("--mode", mode_text, "loop|batch:N|stream:N");

    // ---- bench ----
    auto* cmd_bench = app.add_subcommand("bench", "measure query throughput");
    std::string bench_index, bench_modes = "loop,stream:32";
    std::string minimal_text = "true";
    unsigned bench_threads = 1;
    int repeats = 3;
    std::string bench_stats_path;
    std::string bench_preset = "default";
    cmd_bench->add_option("--index", bench_index, "prebuilt index (else builds one)");
    add_key_opts(cmd_bench);
    cmd_bench->add_option("--preset", bench_preset, "preset when building here")
        ->check(CLI::IsMember({"fast", "default", "compact"}));
    cmd_bench->add_option("--mode", bench_modes, "comma-separated: loop|batch:N|stream:N");
    cmd_bench->add_option("--threads", bench_threads, "query threads");
    cmd_bench->add_option("--minimal", minimal_text, "true|false|both (remap or not)")
        ->check(CLI::IsMember({"true", "false", "both"}));
    cmd_bench->add_option("--repeat", repeats, "timing repetitions, best taken");
    cmd_bench->add_option("--stats-out", bench_stats_path, "append results to a stats file");

    // ---- stats ----
    auto* cmd_stats = app.add_subcommand("stats", "print a stats file");
    std::string stats_file;
    cmd_stats->add_option("--file", stats_file, "stats file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_build) {
            BuildParams params = preset(preset_name);
            if (!alpha_text.empty()) params.alpha = parse_ratio(alpha_text);
            if (!lambda_text.empty()) params.lambda = parse_ratio(lambda_text);
            if (!gamma_name.empty()) params.bucket_fn = bucket_fn_from_name(gamma_name);
            if (!remap_name.empty()) params.remap_kind = remap_kind_from_name(remap_name);
            if (!reduce_name.empty()) {
                if (reduce_name == "pow2-mul") params.reduce_kind = ReduceKind::kPowerOfTwoMul;
                else if (reduce_name == "fastmod-single")
                    params.reduce_kind = ReduceKind::kFastModSinglePart;
                else if (reduce_name == "fastmod-multi")
                    params.reduce_kind = ReduceKind::kFastModMultiPart;
                else throw std::runtime_error("unknown --reduce: " + reduce_name);
            }
            if (seed_opt) params.seed = *seed_opt;

            StatsRecord record;
            record.corpus = corpus_description();
            PtrHashIndex idx;
            if (!shard_strategy_text.empty()) {
                ShardPlan plan;
                plan.target_shard_keys = shard_size;
                if (!shard_dir.empty()) plan.shard_dir = shard_dir;
                if (shard_strategy_text == "memory") {
                    plan.strategy = ShardStrategy::kInMemory;
                } else if (shard_strategy_text == "disk") {
                    plan.strategy = ShardStrategy::kOnDisk;
                } else if (shard_strategy_text.rfind("hybrid:", 0) == 0) {
                    plan.strategy = ShardStrategy::kHybrid;
                    plan.hybrid_disk_shards =
                        static_cast<uint32_t>(std::stoul(shard_strategy_text.substr(7)));
                } else {
                    throw std::runtime_error("--shard-strategy must be memory|disk|hybrid:D");
                }
                if (!generate_text.empty() &&
                    parse_generate(generate_text).kind == KeyKind::kU64) {
                    // generated corpora re-iterate without materializing
                    GeneratedU64Source source(parse_generate(generate_text).count, gen_seed);
                    idx = build_sharded(source, params, plan, threads, &record.build);
                } else {
                    const KeySet keys = get_keys();
                    if (keys.kind == KeyKind::kU64) {
                        U64SpanSource source(keys.u64s);
                        idx = build_sharded(source, params, plan, threads, &record.build);
                    } else {
                        StringSpanSource source(keys.strings);
                        idx = build_sharded(source, params, plan, threads, &record.build);
                    }
                }
            } else {
                const KeySet keys = get_keys();
                idx = keys.kind == KeyKind::kU64
                          ? build(keys.u64s, params, threads, &record.build)
                          : build(keys.strings, params, threads, &record.build);
            }

            save_index(idx, out_path);
            std::fprintf(stderr,
                         "built: n=%llu parts=%llu %0.3f bits/key "
                         "(%0.3f pilots + %0.3f remap), %0.1f ns/key, %u attempt(s)\n",
                         static_cast<unsigned long long>(record.build.n),
                         static_cast<unsigned long long>(record.build.shape.parts),
                         record.build.total_bits_per_key(),
                         record.build.pilots_bits_per_key(),
                         record.build.remap_bits_per_key(), record.build.total_ns_per_key,
                         record.build.attempts);
            if (!stats_path.empty()) {
                std::ofstream out(stats_path, std::ios::trunc);
                out << stats_to_text(record);
                if (!out) throw std::runtime_error("cannot write stats file: " + stats_path);
            }
            return 0;
        }

        if (*cmd_verify) {
            const PtrHashIndex idx = load_index(verify_index);
            const KeySet keys = get_keys();
            if (keys.kind != idx.key_kind())
                throw std::runtime_error("key type does not match the index");
            std::string error;
            if (!verify_bijection(idx, keys, error)) {
                std::fprintf(stderr, "verify FAILED: %s\n", error.c_str());
                return 2;
            }
            std::fprintf(stderr, "verify OK: %llu keys map bijectively onto [0, n)\n",
                         static_cast<unsigned long long>(keys.size()));
            return 0;
        }

        if (*cmd_query) {
            const PtrHashIndex idx = load_index(query_index);
            const QueryMode mode = parse_mode(mode_text);
            // stdin keys are answered in chunks so streaming/batching applies
            constexpr size_t kChunk = 1 << 14;
            std::vector<std::string> lines;
            std::vector<uint64_t> u64s;
            std::vector<uint64_t> out;
            std::string line;
            auto flush = [&] {
                const size_t m = idx.key_kind() == KeyKind::kU64 ? u64s.size() : lines.size();
                if (m == 0) return;
                out.resize(m);
                if (idx.key_kind() == KeyKind::kU64) {
                    run_mode<uint64_t>(idx, u64s, mode, out.data(), true);
                } else {
                    run_mode<std::string>(idx, lines, mode, out.data(), true);
                }
                for (size_t i = 0; i < m; i++)
                    std::printf("%llu\n", static_cast<unsigned long long>(out[i]));
                lines.clear();
                u64s.clear();
            };
            while (std::getline(std::cin, line)) {
                if (idx.key_kind() == KeyKind::kU64) {
                    uint64_t v = 0;
                    const auto [p, ec] =
                        std::from_chars(line.data(), line.data() + line.size(), v);
                    if (ec != std::errc{} || p != line.data() + line.size()) {
                        std::fprintf(stderr, "bad integer key: '%s'\n", line.c_str());
                        return 1;
                    }
                    u64s.push_back(v);
                    if (u64s.size() >= kChunk) flush();
                } else {
                    lines.push_back(line);
                    if (lines.size() >= kChunk) flush();
                }
            }
            flush();
            return 0;
        }

        if (*cmd_bench) {
            StatsRecord record;
            record.corpus = corpus_description();
            PtrHashIndex idx;
            KeySet keys = get_keys();
            if (!bench_index.empty()) {
                idx = load_index(bench_index);
            } else {
                idx = keys.kind == KeyKind::kU64
                          ? build(keys.u64s, preset(bench_preset), threads, &record.build)
                          : build(keys.strings, preset(bench_preset), threads, &record.build);
            }
            if (keys.kind != idx.key_kind())
                throw std::runtime_error("key type does not match the index");

            std::vector<bool> minimal_variants;
            if (minimal_text == "both") {
                minimal_variants = {true, false};
            } else {
                minimal_variants = {minimal_text == "true"};
            }

            const uint64_t n_keys = keys.size();
            std::vector<uint64_t> out(n_keys);
            std::istringstream modes_in(bench_modes);
            std::string mode_item;
            while (std::getline(modes_in, mode_item, ',')) {
                const QueryMode mode = parse_mode(mode_item);
                for (const bool minimal : minimal_variants) {
                    auto run_once = [&] {
                        if (bench_threads <= 1) {
                            run_mode_keys(idx, keys, mode, out.data(), minimal);
                            return;
                        }
                        std::vector<std::thread> workers;
                        const uint64_t chunk = n_keys / bench_threads + 1;
                        for (unsigned w = 0; w < bench_threads; w++) {
                            workers.emplace_back([&, w] {
                                const uint64_t begin = std::min<uint64_t>(n_keys, w * chunk);
                                const uint64_t end = std::min<uint64_t>(n_keys, begin + chunk);
                                if (begin == end) return;
                                if (keys.kind == KeyKind::kU64) {
                                    run_mode<uint64_t>(
                                        idx,
                                        std::span(keys.u64s).subspan(begin, end - begin),
                                        mode, out.data() + begin, minimal);
                                } else {
                                    run_mode<std::string>(
                                        idx,
                                        std::span<const std::string>(keys.strings)
                                            .subspan(begin, end - begin),
                                        mode, out.data() + begin, minimal);
                                }
                            });
                        }
                        for (auto& t : workers) t.join();
                    };
                    run_once();  // warmup
                    const double ns = time_ns_per_key(run_once, n_keys, repeats);
                    std::printf("mode=%s threads=%u minimal=%d ns_per_key=%.2f\n",
                                mode.text.c_str(), bench_threads, int(minimal), ns);
                    record.queries.push_back({mode.text, bench_threads, minimal, ns, n_keys});
                }
            }
            if (!bench_stats_path.empty()) {
                std::ofstream sout(bench_stats_path, std::ios::trunc);
                sout << stats_to_text(record);
                if (!sout)
                    throw std::runtime_error("cannot write stats file: " + bench_stats_path);
            }
            return 0;
        }

        if (*cmd_stats) {
            std::ifstream in(stats_file);
            if (!in) throw std::runtime_error("cannot open stats file: " + stats_file);
            std::stringstream buf;
            buf << in.rdbuf();
            const StatsRecord rec = stats_from_text(buf.str());
            // parse, then re-emit canonically
            std::cout << stats_to_text(rec);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
