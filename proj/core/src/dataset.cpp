#include <algorithm>
#include <fstream>
#include <thread>
#include <unordered_set>

#include "json.hpp"

#include "cotlab/datagen.hpp"
#include "cotlab/errors.hpp"

namespace cotlab {

namespace {

constexpr std::uint64_t kTestStream = 1ull << 63;

nlohmann::json params_json(const GenConfig& cfg) {
    return {{"p", cfg.p}, {"ops", cfg.ops}, {"vars", cfg.vars}, {"length", cfg.length}};
}

std::uint64_t problem_hash(const CotSample& s) { return fnv1a(join(s.problem)); }

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    for (const auto& l : lines) f << l << '\n';
    if (!f) throw IoError("write failed for " + path);
}

std::uint64_t hash_lines(const std::vector<std::string>& lines) {
    std::string all;
    for (const auto& l : lines) {
        all += l;
        all += '\n';
    }
    return fnv1a(all);
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string plain_line(const CotSample& s, Format f) { return serialize(s, f) + " " + std::string(kEos); }

std::string structured_line(const CotSample& s, const GenConfig& cfg, std::uint64_t sample_seed) {
    nlohmann::json j;
    j["task"] = std::string(task_name(s.task));
    j["params"] = params_json(cfg);
    j["problem_tokens"] = s.problem;
    j["step_tokens"] = cfg.format == Format::cot ? s.steps : std::vector<Tokens>{};
    j["answer_tokens"] = s.answer;
    j["seed"] = sample_seed;
    return j.dump();
}

std::vector<std::string> gen_lines(const GenConfig& cfg, std::size_t begin, std::size_t end, bool structured,
                                   const std::vector<std::uint64_t>* exclude) {
    std::unordered_set<std::uint64_t> skip;
    if (exclude) skip.insert(exclude->begin(), exclude->end());
    std::vector<std::string> out;
    out.reserve(end > begin ? end - begin : 0);
    for (std::size_t i = begin; i < end; ++i) {
        CotSample s = gen_sample(cfg, i);
        if (!skip.empty() && skip.count(problem_hash(s))) continue;
        out.push_back(structured ? structured_line(s, cfg, derive_seed(cfg.seed, i)) : plain_line(s, cfg.format));
    }
    return out;
}

std::vector<CotSample> gen_samples(const GenConfig& cfg, std::size_t count, std::size_t shards) {
    std::vector<CotSample> out(count);
    shards = std::clamp<std::size_t>(shards, 1, std::max<std::size_t>(count, 1));
    auto work = [&](std::size_t shard) {
        const std::size_t lo = count * shard / shards, hi = count * (shard + 1) / shards;
        for (std::size_t i = lo; i < hi; ++i) out[i] = gen_sample(cfg, i);
    };
    if (shards == 1) {
        work(0);
        return out;
    }
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < shards; ++k) pool.emplace_back(work, k);
    for (auto& t : pool) t.join();
    return out;
}

DatasetSummary build_dataset(const GenConfig& cfg, const std::string& out_prefix, std::size_t shards) {
    cfg.validate();
    DatasetSummary sum;
    std::vector<std::uint64_t> test_hashes;
    std::vector<std::string> test_plain, test_struct;
    for (std::size_t i = 0; i < cfg.test_count; ++i) {
        CotSample s = gen_sample(cfg, kTestStream | i);
        test_hashes.push_back(problem_hash(s));
        test_plain.push_back(plain_line(s, cfg.format));
        test_struct.push_back(structured_line(s, cfg, derive_seed(cfg.seed, kTestStream | i)));
    }
    const std::unordered_set<std::uint64_t> skip(test_hashes.begin(), test_hashes.end());
    std::vector<std::string> train_plain, train_struct;
    const std::vector<CotSample> samples = gen_samples(cfg, cfg.count, shards);
    for (std::size_t i = 0; i < cfg.count; ++i) {
        const CotSample& s = samples[i];
        if (skip.count(problem_hash(s))) continue;
        train_plain.push_back(plain_line(s, cfg.format));
        train_struct.push_back(structured_line(s, cfg, derive_seed(cfg.seed, i)));
    }
    sum.train_written = train_plain.size();
    sum.test_written = test_plain.size();
    sum.removed_duplicates = cfg.count - train_plain.size();
    sum.train_hash = hash_lines(train_plain);
    sum.test_hash = hash_lines(test_plain);

    write_lines(out_prefix + ".train.txt", train_plain);
    write_lines(out_prefix + ".train.jsonl", train_struct);
    if (cfg.test_count > 0) {
        write_lines(out_prefix + ".test.txt", test_plain);
        write_lines(out_prefix + ".test.jsonl", test_struct);
    }
    nlohmann::json m;
    m["task"] = std::string(task_name(cfg.task));
    m["format"] = cfg.format == Format::cot ? "cot" : "direct";
    m["seed"] = cfg.seed;
    m["params"] = params_json(cfg);
    m["requested"] = {{"train", cfg.count}, {"test", cfg.test_count}};
    m["written"] = {{"train", sum.train_written}, {"test", sum.test_written}};
    m["removed_duplicates"] = sum.removed_duplicates;
    m["prng"] = "splitmix64";
    m["hash"] = "fnv1a64";
    m["content_hashes"] = {{"train", sum.train_hash}, {"test", sum.test_hash}};
    write_lines(out_prefix + ".manifest.json", {m.dump(2)});
    return sum;
}

}  // namespace cotlab
