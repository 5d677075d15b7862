#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <spdlog/spdlog.h>

#include "qexp/chat.hpp"
#include "qexp/cluster.hpp"
#include "qexp/concurrency.hpp"
#include "qexp/corpus_io.hpp"
#include "qexp/dense.hpp"
#include "qexp/embed.hpp"
#include "qexp/harvest.hpp"
#include "qexp/hash.hpp"
#include "qexp/index.hpp"
#include "qexp/metrics.hpp"
#include "qexp/pipeline.hpp"
#include "qexp/rerank.hpp"
#include "qexp/stats.hpp"
#include "qexp/transport.hpp"

#ifndef QEXP_DATA_DIR
#define QEXP_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace qexp::cli {

namespace {

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + p.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Content hash of a file, or of every regular file in a directory in name
/// order. Empty for an unset path.
std::string hash_path(const std::string& path)
{
    if (path.empty()) {
        return "";
    }
    fs::path p(path);
    if (!fs::exists(p)) {
        return "missing";
    }
    if (!fs::is_directory(p)) {
        return content_hash(read_file(p));
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file()) {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::uint64_t h = fnv1a64("");
    for (const auto& f : files) {
        h = fnv1a64(f.filename().string(), h);
        h = fnv1a64(read_file(f), h);
    }
    return hex64(h);
}

void require(const std::string& value, const std::string& flag, const std::string& what)
{
    if (value.empty()) {
        throw UsageError(flag + " is required for " + what);
    }
}

void require_file(const std::string& value, const std::string& flag, const std::string& what)
{
    require(value, flag, what);
    if (!fs::exists(value)) {
        throw UsageError(flag + ": no such file or directory: " + value);
    }
}

fs::path out_path(const Manifest& m, const std::string& explicit_path, const std::string& name)
{
    fs::path p = explicit_path.empty() ? fs::path(m.output_dir) / name : fs::path(explicit_path);
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
    return p;
}

// ---- sidecars and stage caching ----

json read_meta(const fs::path& artifact)
{
    auto p = meta_path(artifact);
    if (!fs::exists(p)) {
        return nullptr;
    }
    try {
        return json::parse(read_file(p));
    } catch (const json::exception&) {
        return nullptr;
    }
}

void write_meta(const fs::path& artifact, const std::string& stage, const std::string& stage_key, const Manifest& m,
                json extra = json::object())
{
    json meta = {{"artifact", artifact.filename().string()},
                 {"stage", stage},
                 {"stage_key", stage_key},
                 {"manifest_hash", m.hash()},
                 {"seed", m.seed}};
    for (auto& [k, v] : extra.items()) {
        meta[k] = v;
    }
    std::ofstream out(meta_path(artifact), std::ios::binary);
    out << meta.dump(2) << "\n";
    if (!out) {
        throw Error("cannot write " + meta_path(artifact).string());
    }
}

std::string stage_key(const std::string& stage, const json& inputs)
{
    json k = {{"stage", stage}, {"inputs", inputs}};
    return content_hash(k.dump());
}

bool is_fresh(const fs::path& artifact, const std::string& key)
{
    if (!fs::exists(artifact)) {
        return false;
    }
    auto meta = read_meta(artifact);
    return meta.is_object() && meta.value("stage_key", "") == key;
}

// ---- backends ----

struct Session {
    std::shared_ptr<Cassette> cassette;
    bool replay = false;
    HttpOptions http;
};

Session open_session(const Manifest& m)
{
    Session s;
    if (const char* key = std::getenv("QEXP_API_KEY"); key != nullptr && *key != '\0') {
        s.http.bearer_token = key;
    }
    if (m.cassette.empty()) {
        return s;
    }
    if (m.cassette_mode == "replay") {
        if (!fs::exists(m.cassette)) {
            throw UsageError("--cassette: replay needs an existing cassette: " + m.cassette);
        }
        s.replay = true;
    } else if (m.cassette_mode == "record") {
        s.replay = false;
    } else if (m.cassette_mode == "auto") {
        s.replay = fs::exists(m.cassette);
    } else {
        throw UsageError("--cassette-mode must be record, replay or auto");
    }
    s.cassette = std::make_shared<Cassette>(m.cassette);
    spdlog::info("cassette {} ({})", m.cassette, s.replay ? "replay" : "record");
    return s;
}

std::shared_ptr<JsonTransport> make_transport(const Session& s, const std::string& url)
{
    if (s.cassette && s.replay) {
        return std::make_shared<ReplayTransport>(s.cassette, url);
    }
    auto http = std::make_shared<HttpTransport>(url, s.http);
    if (s.cassette) {
        return std::make_shared<RecordingTransport>(http, s.cassette);
    }
    return http;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

std::unique_ptr<ChatBackend> make_chat(const Session& s, const std::string& url, const std::string& flag)
{
    if (url == "stub:echo") {
        return std::make_unique<EchoChat>();
    }
    if (url == "stub:merge") {
        return std::make_unique<MergeChat>();
    }
    if (starts_with(url, "stub:canned=")) {
        auto file = url.substr(std::string_view("stub:canned=").size());
        if (!fs::exists(file)) {
            throw UsageError(flag + ": no such canned-answer file: " + file);
        }
        return std::make_unique<CannedChat>(CannedChat::load(file));
    }
    if (starts_with(url, "stub:")) {
        throw UsageError(flag + ": unknown chat stub " + url);
    }
    return std::make_unique<HttpChat>(make_transport(s, url));
}

std::shared_ptr<Embedder> make_embedder(const Session& s, const std::string& url)
{
    if (url == "stub:hash") {
        return std::make_shared<HashEmbedder>();
    }
    if (starts_with(url, "stub:hash=")) {
        auto dim = std::stoul(url.substr(std::string_view("stub:hash=").size()));
        return std::make_shared<HashEmbedder>(dim);
    }
    if (starts_with(url, "stub:")) {
        throw UsageError("--embed-url: unknown embedding stub " + url);
    }
    return std::make_shared<HttpEmbedder>(make_transport(s, url));
}

std::unique_ptr<Reranker> make_reranker(const Session& s, const std::string& url)
{
    if (url == "stub:hash") {
        return std::make_unique<HashReranker>();
    }
    if (starts_with(url, "stub:scores=")) {
        auto file = url.substr(std::string_view("stub:scores=").size());
        if (!fs::exists(file)) {
            throw UsageError("--rerank-url: no such score file: " + file);
        }
        return std::make_unique<ScoreFileReranker>(file);
    }
    if (starts_with(url, "stub:")) {
        throw UsageError("--rerank-url: unknown reranker stub " + url);
    }
    return std::make_unique<HttpReranker>(make_transport(s, url));
}

Mode manifest_mode(const Manifest& m)
{
    try {
        return parse_mode(m.mode);
    } catch (const Error&) {
        throw UsageError("--mode: unknown mode " + m.mode);
    }
}

RetrieverKind manifest_retriever(const Manifest& m)
{
    try {
        return parse_retriever(m.retriever);
    } catch (const Error&) {
        throw UsageError("--retriever must be bm25 or dense");
    }
}

Bm25Params bm25_params(const Manifest& m)
{
    Bm25Params p{m.k1, m.b};
    p.validate();
    return p;
}

PipelineConfig pipeline_config(const Manifest& m)
{
    PipelineConfig c;
    c.mode = manifest_mode(m);
    c.retriever = manifest_retriever(m);
    c.k_exemplars = m.k_exemplars;
    c.query_copies = m.copies;
    c.top_k = m.top_k;
    c.workers = m.workers;
    c.tag = m.tag;
    c.bm25 = bm25_params(m);
    c.rocchio = RocchioParams{m.rocchio_alpha, m.rocchio_beta, m.fb_docs, m.fb_terms};
    c.expansion_generation.max_new_tokens = m.max_new_tokens;
    c.expansion_generation.num_beams = m.num_beams;
    c.expansion_generation.repetition_penalty = m.repetition_penalty;
    c.expansion_generation.no_repeat_ngram = m.no_repeat_ngram;
    c.expansion_generation.context_budget_tokens = m.context_budget;
    c.refine_generation = c.expansion_generation;
    c.refine_generation.max_new_tokens = m.refine_max_new_tokens;
    if (!m.templates.empty()) {
        c.templates = PromptTemplates::load(m.templates);
    }
    return c;
}

json generation_json(const Manifest& m)
{
    return {{"max_new_tokens", m.max_new_tokens},       {"refine_max_new_tokens", m.refine_max_new_tokens},
            {"num_beams", m.num_beams},                 {"repetition_penalty", m.repetition_penalty},
            {"no_repeat_ngram", m.no_repeat_ngram},     {"context_budget", m.context_budget}};
}

fs::path default_fixed_exemplars() { return fs::path(QEXP_DATA_DIR) / "fewshot_fixed.jsonl"; }

// ---- stages ----

std::string index_key(const Manifest& m, const std::string& corpus)
{
    json in = {{"corpus", hash_path(corpus)}, {"retriever", m.retriever}};
    if (m.retriever == "dense") {
        in["embed_url"] = m.embed_url;
    }
    return stage_key("index", in);
}

void stage_index(const Manifest& m, const std::string& corpus, const fs::path& dir, bool use_cache)
{
    auto key = index_key(m, corpus);
    if (use_cache && is_fresh(dir, key)) {
        spdlog::info("index: reusing {}", dir.string());
        return;
    }
    auto docs = load_corpus(corpus);
    spdlog::info("index: {} documents", docs.size());
    auto index = InvertedIndex::build(docs);
    index.save(dir);
    if (manifest_retriever(m) == RetrieverKind::dense) {
        require(m.embed_url, "--embed-url", "a dense index");
        auto session = open_session(m);
        auto embedder = make_embedder(session, m.embed_url);
        std::vector<std::string> texts;
        std::vector<std::string> ids;
        for (const auto& d : docs) {
            texts.push_back(d.index_text());
            ids.push_back(d.doc_id);
        }
        auto vectors = embedder->embed(texts);
        DenseIndex::build(ids, vectors).save(dir / "dense.jsonl");
    }
    write_meta(dir, "index", key, m,
               {{"num_docs", index.num_docs()}, {"num_terms", index.num_terms()}});
}

struct HarvestOutcome {
    std::size_t seeds = 0;
    std::size_t failed = 0;
    bool aborted = false;
};

HarvestOutcome stage_harvest(const Manifest& m, const fs::path& index_dir, const std::string& seeds_path,
                             const fs::path& pool_out, bool use_cache)
{
    require(m.rerank_url, "--rerank-url", "harvest");
    json in = {{"index", hash_path(index_dir.string())},
               {"seeds", hash_path(seeds_path)},
               {"rerank_url", m.rerank_url},
               {"top_n", m.harvest_top_n},
               {"keep_per_query", m.keep_per_query},
               {"k1", m.k1},
               {"b", m.b}};
    auto key = stage_key("harvest", in);
    HarvestOutcome outcome;
    if (use_cache && is_fresh(pool_out, key)) {
        spdlog::info("harvest: reusing {}", pool_out.string());
        auto meta = read_meta(pool_out);
        outcome.seeds = meta.value("seeds", std::size_t{0});
        outcome.failed = meta.value("failed", std::size_t{0});
        return outcome;
    }
    auto index = InvertedIndex::load(index_dir);
    auto seeds = load_queries(seeds_path);
    auto session = open_session(m);
    auto reranker = make_reranker(session, m.rerank_url);
    HarvestConfig config{m.harvest_top_n, m.keep_per_query, m.workers};

    HarvestResult result;
    try {
        result = harvest_pool(index, bm25_params(m), *reranker, seeds, config);
    } catch (const HarvestError& e) {
        spdlog::error("{}", e.what());
        result = e.partial();
        outcome.aborted = true;
    }
    write_pool(result.pool, pool_out);
    auto report_path = pool_out;
    report_path.replace_extension(".report.jsonl");
    result.report.write_jsonl(report_path);
    const auto& r = result.report;
    spdlog::info("harvest: {} seeds, {} harvested, {} without hits, {} empty, {} failed, {} pairs", r.seeds,
                 r.harvested, r.skipped_no_hits, r.skipped_empty, r.failed, r.pairs);
    outcome.seeds = r.seeds;
    outcome.failed = r.seeds - r.harvested - r.skipped_no_hits - r.skipped_empty;
    bool complete = !outcome.aborted && !interrupted();
    // Partial pools are flushed but never marked reusable.
    write_meta(pool_out, "harvest", complete ? key : "", m,
               {{"seeds", r.seeds}, {"pairs", r.pairs}, {"failed", outcome.failed}});
    return outcome;
}

void stage_select(const Manifest& m, const std::string& pool_path, const fs::path& exemplars_out, bool use_cache)
{
    require(m.embed_url, "--embed-url", "exemplar selection");
    if (m.k_exemplars == 0) {
        throw UsageError("--k-exemplars must be at least 1");
    }
    json in = {{"pool", hash_path(pool_path)},
               {"embed_url", m.embed_url},
               {"k", m.k_exemplars},
               {"seed", m.seed},
               {"restarts", m.restarts}};
    auto key = stage_key("select", in);
    if (use_cache && is_fresh(exemplars_out, key)) {
        spdlog::info("select: reusing {}", exemplars_out.string());
        return;
    }
    auto pool = load_pool(pool_path);
    if (pool.empty()) {
        throw Error("select: pool " + pool_path + " is empty");
    }
    auto session = open_session(m);
    auto embedder = make_embedder(session, m.embed_url);
    auto embeddings = embed_pool(*embedder, pool);
    KMeansOptions opts;
    opts.k = m.k_exemplars;
    opts.seed = m.seed;
    opts.restarts = m.restarts;
    auto selection = select_exemplars(pool, embeddings, opts);
    write_pool(selection.exemplars, exemplars_out);
    json indices = selection.indices;
    write_meta(exemplars_out, "select", key, m, {{"pool_size", pool.size()}, {"indices", indices}});
    spdlog::info("select: {} exemplars from a pool of {}", selection.exemplars.size(), pool.size());
}

struct ExpandOutcome {
    std::size_t queries = 0;
    std::size_t degraded = 0;
    bool interrupted = false;
};

struct OwnedBackends {
    Session session;
    std::unique_ptr<ChatBackend> llm1;
    std::unique_ptr<ChatBackend> llm2;
    std::unique_ptr<ChatBackend> refiner;
    std::shared_ptr<Embedder> embedder;

    Backends view() const { return {llm1.get(), llm2.get(), refiner.get(), embedder.get()}; }
};

OwnedBackends make_backends(const Manifest& m, Mode mode, bool need_embedder)
{
    OwnedBackends b;
    b.session = open_session(m);
    if (uses_llm(mode)) {
        require(m.llm1_url, "--llm1-url", "mode " + m.mode);
        b.llm1 = make_chat(b.session, m.llm1_url, "--llm1-url");
    }
    if (mode == Mode::concat || mode == Mode::refine) {
        require(m.llm2_url, "--llm2-url", "mode " + m.mode);
        b.llm2 = make_chat(b.session, m.llm2_url, "--llm2-url");
    }
    if (mode == Mode::refine && !m.refiner_url.empty()) {
        b.refiner = make_chat(b.session, m.refiner_url, "--refiner-url");
    }
    if (need_embedder) {
        require(m.embed_url, "--embed-url", "dense retrieval");
        b.embedder = make_embedder(b.session, m.embed_url);
    }
    return b;
}

ExpandOutcome stage_expand(const Manifest& m, const std::string& queries_path, const std::string& exemplars_path,
                           const fs::path& expansions_out, bool use_cache)
{
    auto config = pipeline_config(m);
    json in = {{"queries", hash_path(queries_path)},
               {"exemplars", hash_path(exemplars_path)},
               {"mode", m.mode},
               {"llm1_url", m.llm1_url},
               {"llm2_url", m.llm2_url},
               {"refiner_url", m.refiner_url},
               {"generation", generation_json(m)},
               {"templates", config.templates.to_json()}};
    auto key = stage_key("expand", in);
    ExpandOutcome outcome;
    if (use_cache && is_fresh(expansions_out, key)) {
        spdlog::info("expand: reusing {}", expansions_out.string());
        auto meta = read_meta(expansions_out);
        outcome.queries = meta.value("queries", std::size_t{0});
        outcome.degraded = meta.value("degraded", std::size_t{0});
        return outcome;
    }
    auto queries = load_queries(queries_path);
    std::vector<ExemplarPair> exemplars;
    if (uses_exemplars(config.mode)) {
        exemplars = load_pool(exemplars_path);
    }
    auto backends = make_backends(m, config.mode, config.retriever == RetrieverKind::dense);
    auto records = expand_all(config, backends.view(), queries, exemplars);
    outcome.queries = queries.size();
    outcome.interrupted = interrupted();
    for (const auto& r : records) {
        outcome.degraded += r.degraded ? 1 : 0;
    }
    write_expansions(records, expansions_out);
    write_meta(expansions_out, "expand", outcome.interrupted ? "" : key, m,
               {{"queries", outcome.queries}, {"completed", records.size()}, {"degraded", outcome.degraded}});
    spdlog::info("expand: {} of {} queries, {} degraded", records.size(), queries.size(), outcome.degraded);
    return outcome;
}

void stage_retrieve(const Manifest& m, const fs::path& index_dir, const std::string& queries_path,
                    const std::string& expansions_path, const fs::path& run_out, bool use_cache)
{
    auto config = pipeline_config(m);
    json in = {{"index", hash_path(index_dir.string())},
               {"queries", hash_path(queries_path)},
               {"expansions", hash_path(expansions_path)},
               {"mode", m.mode},
               {"retriever", m.retriever},
               {"embed_url", m.embed_url},
               {"copies", m.copies},
               {"top_k", m.top_k},
               {"k1", m.k1},
               {"b", m.b},
               {"rocchio", {m.rocchio_alpha, m.rocchio_beta, m.fb_docs, m.fb_terms}},
               {"tag", config.run_tag()}};
    auto key = stage_key("retrieve", in);
    if (use_cache && is_fresh(run_out, key)) {
        spdlog::info("retrieve: reusing {}", run_out.string());
        return;
    }
    if (config.mode == Mode::rocchio && config.retriever == RetrieverKind::dense) {
        throw UsageError("--retriever dense cannot be combined with --mode rocchio");
    }
    auto queries = load_queries(queries_path);
    std::vector<ExpansionRecord> expansions;
    if (uses_llm(config.mode)) {
        require_file(expansions_path, "--expansions", "mode " + m.mode);
        expansions = read_expansions(expansions_path);
    }
    auto index = InvertedIndex::load(index_dir);
    std::optional<DenseIndex> dense;
    bool want_dense = config.retriever == RetrieverKind::dense;
    if (want_dense) {
        auto file = index_dir / "dense.jsonl";
        if (!fs::exists(file)) {
            throw UsageError("--index-dir: " + index_dir.string() + " has no dense index; rebuild with --retriever dense");
        }
        dense = DenseIndex::load(file);
    }
    auto backends = make_backends(m, Mode::none, want_dense);
    RetrievalInputs inputs{&index, dense ? &*dense : nullptr};
    auto run = retrieve_all(config, backends.view(), inputs, queries, expansions);
    write_run(run, run_out);

    if (uses_llm(config.mode)) {
        std::unordered_map<std::string, std::string> by_id;
        for (const auto& e : expansions) {
            by_id.emplace(e.query_id, e.expansion);
        }
        std::vector<Query> augmented;
        for (const auto& q : queries) {
            auto it = by_id.find(q.query_id);
            augmented.push_back({q.query_id, augment_query(q.text, it == by_id.end() ? "" : it->second, m.copies)});
        }
        auto aug_path = run_out;
        aug_path.replace_extension(".augmented.tsv");
        write_queries(augmented, aug_path);
    }
    write_meta(run_out, "retrieve", key, m, {{"queries", queries.size()}, {"tag", run.tag()}});
    spdlog::info("retrieve: {} queries into {}", run.size(), run_out.string());
}

EvalOptions eval_options(const Manifest& m)
{
    EvalOptions o;
    o.rel_threshold = m.rel_threshold;
    return o;
}

double degraded_fraction(std::size_t degraded, std::size_t total)
{
    return total == 0 ? 0.0 : static_cast<double>(degraded) / static_cast<double>(total);
}

int budget_exit(const Manifest& m, const std::string& stage, std::size_t degraded, std::size_t total)
{
    double frac = degraded_fraction(degraded, total);
    if (frac > m.failure_budget) {
        spdlog::error("{}: {} of {} items degraded ({:.3f}) exceeds --failure-budget {:.3f}", stage, degraded, total,
                      frac, m.failure_budget);
        return kExitDegraded;
    }
    return kExitOk;
}

}  // namespace

fs::path meta_path(const fs::path& artifact)
{
    auto p = artifact;
    if (p.filename().empty()) {
        p = p.parent_path();
    }
    return p.parent_path() / (p.filename().string() + ".meta.json");
}

json Manifest::to_json() const
{
    return {{"inputs",
             {{"corpus", hash_path(corpus)},
              {"queries", hash_path(queries)},
              {"qrels", hash_path(qrels)},
              {"seeds", hash_path(seeds)},
              {"templates", hash_path(templates)}}},
            {"mode", mode},
            {"retriever", retriever},
            {"k_exemplars", k_exemplars},
            {"copies", copies},
            {"top_k", top_k},
            {"harvest_top_n", harvest_top_n},
            {"keep_per_query", keep_per_query},
            {"restarts", restarts},
            {"generation", generation_json(*this)},
            {"bm25", {{"k1", k1}, {"b", b}}},
            {"rocchio", {{"alpha", rocchio_alpha}, {"beta", rocchio_beta}, {"fb_docs", fb_docs}, {"fb_terms", fb_terms}}},
            {"backends",
             {{"llm1", llm1_url}, {"llm2", llm2_url}, {"refiner", refiner_url}, {"embed", embed_url}, {"rerank", rerank_url}}},
            {"seed", seed},
            {"rel_threshold", rel_threshold},
            {"tag", tag}};
}

std::string Manifest::hash() const { return content_hash(to_json().dump()); }

int cmd_index(const Manifest& m)
{
    require_file(m.corpus, "--corpus", "index");
    fs::path dir = m.index_dir.empty() ? fs::path(m.output_dir) / "index" : fs::path(m.index_dir);
    stage_index(m, m.corpus, dir, false);
    return kExitOk;
}

int cmd_harvest(const Manifest& m)
{
    require_file(m.index_dir, "--index-dir", "harvest");
    require_file(m.seeds, "--seeds", "harvest");
    auto out = out_path(m, m.pool, "pool.jsonl");
    auto outcome = stage_harvest(m, m.index_dir, m.seeds, out, false);
    if (interrupted()) {
        return kExitInterrupted;
    }
    return budget_exit(m, "harvest", outcome.failed, outcome.seeds);
}

int cmd_select(const Manifest& m)
{
    require_file(m.pool, "--pool", "select");
    stage_select(m, m.pool, out_path(m, m.exemplars, "exemplars.jsonl"), false);
    return kExitOk;
}

int cmd_expand(const Manifest& m)
{
    require_file(m.queries, "--queries", "expand");
    auto mode = manifest_mode(m);
    if (!uses_llm(mode)) {
        throw UsageError("--mode " + m.mode + " does not generate expansions");
    }
    std::string exemplars = m.exemplars;
    if (mode == Mode::fewshot_fixed && exemplars.empty()) {
        exemplars = default_fixed_exemplars().string();
    }
    if (uses_exemplars(mode)) {
        require_file(exemplars, "--exemplars", "mode " + m.mode);
    }
    auto outcome = stage_expand(m, m.queries, exemplars, out_path(m, m.expansions, "expansions.jsonl"), false);
    if (outcome.interrupted) {
        return kExitInterrupted;
    }
    return budget_exit(m, "expand", outcome.degraded, outcome.queries);
}

int cmd_retrieve(const Manifest& m)
{
    require_file(m.index_dir, "--index-dir", "retrieve");
    require_file(m.queries, "--queries", "retrieve");
    stage_retrieve(m, m.index_dir, m.queries, m.expansions, out_path(m, m.run, "run.trec"), false);
    return interrupted() ? kExitInterrupted : kExitOk;
}

int cmd_eval(const Manifest& m)
{
    require_file(m.qrels, "--qrels", "eval");
    std::vector<std::string> runs = m.runs;
    if (!m.run.empty()) {
        runs.insert(runs.begin(), m.run);
    }
    if (runs.empty()) {
        throw UsageError("--run is required for eval");
    }
    auto qrels = load_qrels(m.qrels);
    std::vector<MetricReport> reports;
    for (const auto& r : runs) {
        if (!fs::exists(r)) {
            throw UsageError("--run: no such file: " + r);
        }
        auto report = evaluate(read_run(r), qrels, eval_options(m));
        if (report.run_tag.empty()) {
            report.run_tag = fs::path(r).stem().string();
        }
        reports.push_back(std::move(report));
    }
    std::cout << format_report_table(reports);
    if (reports.size() == 1) {
        auto out = out_path(m, "", fs::path(runs.front()).stem().string() + ".eval.jsonl");
        write_report_jsonl(reports.front(), out);
    }
    return kExitOk;
}

int cmd_compare(const Manifest& m)
{
    require_file(m.qrels, "--qrels", "compare");
    if (m.runs.size() != 2) {
        throw UsageError("compare takes exactly two run files");
    }
    for (const auto& r : m.runs) {
        if (!fs::exists(r)) {
            throw UsageError("compare: no such run file: " + r);
        }
    }
    auto qrels = load_qrels(m.qrels);
    auto opts = eval_options(m);
    auto a = evaluate(read_run(m.runs[0]), qrels, opts);
    auto b = evaluate(read_run(m.runs[1]), qrels, opts);
    auto names = opts.metric_names();
    if (std::find(names.begin(), names.end(), m.metric) == names.end()) {
        throw UsageError("--metric must be one of ndcg@10, p@10, recall@100");
    }
    auto result = compare_reports(a, b, m.metric, m.alpha);
    std::cout << m.runs[0] << " vs " << m.runs[1] << "\n" << result.describe() << "\n";
    return kExitOk;
}

int cmd_run_all(const Manifest& m)
{
    require_file(m.corpus, "--corpus", "run-all");
    require_file(m.queries, "--queries", "run-all");
    auto mode = manifest_mode(m);
    manifest_retriever(m);
    fs::path out(m.output_dir);
    fs::create_directories(out);

    fs::path index_dir = m.index_dir.empty() ? out / "index" : fs::path(m.index_dir);
    stage_index(m, m.corpus, index_dir, true);
    int status = kExitOk;

    std::string exemplars;
    if (mode == Mode::fewshot_fixed) {
        exemplars = m.exemplars.empty() ? default_fixed_exemplars().string() : m.exemplars;
        require_file(exemplars, "--exemplars", "mode fewshot-fixed");
    } else if (uses_exemplars(mode)) {
        if (!m.exemplars.empty()) {
            require_file(m.exemplars, "--exemplars", "mode " + m.mode);
            exemplars = m.exemplars;
        } else {
            std::string pool = m.pool;
            if (pool.empty()) {
                if (m.seeds.empty()) {
                    throw UsageError("--pool or --seeds is required for mode " + m.mode);
                }
                require_file(m.seeds, "--seeds", "harvest");
                auto pool_out = out / "pool.jsonl";
                auto h = stage_harvest(m, index_dir, m.seeds, pool_out, true);
                if (interrupted()) {
                    return kExitInterrupted;
                }
                status = std::max(status, budget_exit(m, "harvest", h.failed, h.seeds));
                pool = pool_out.string();
            } else {
                require_file(pool, "--pool", "mode " + m.mode);
            }
            auto ex_out = out / "exemplars.jsonl";
            stage_select(m, pool, ex_out, true);
            exemplars = ex_out.string();
        }
    }

    std::string expansions;
    if (uses_llm(mode)) {
        auto exp_out = out / "expansions.jsonl";
        auto e = stage_expand(m, m.queries, exemplars, exp_out, true);
        if (e.interrupted) {
            return kExitInterrupted;
        }
        status = std::max(status, budget_exit(m, "expand", e.degraded, e.queries));
        expansions = exp_out.string();
    }

    auto run_out = out / "run.trec";
    stage_retrieve(m, index_dir, m.queries, expansions, run_out, true);
    if (interrupted()) {
        return kExitInterrupted;
    }

    if (!m.qrels.empty()) {
        require_file(m.qrels, "--qrels", "evaluation");
        auto report = evaluate(read_run(run_out), load_qrels(m.qrels), eval_options(m));
        write_report_jsonl(report, out / "eval.jsonl");
        write_per_query(report, out / "eval.per_query.tsv");
        std::vector<MetricReport> reports{report};
        std::cout << format_report_table(reports);
    }
    return status;
}

}  // namespace qexp::cli
