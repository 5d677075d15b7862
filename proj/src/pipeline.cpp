#include "qexp/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "qexp/concurrency.hpp"
#include "qexp/tokenize.hpp"

namespace qexp {

using nlohmann::json;

std::string to_string(Mode mode)
{
    switch (mode) {
    case Mode::none:
        return "none";
    case Mode::rocchio:
        return "rocchio";
    case Mode::zeroshot:
        return "zeroshot";
    case Mode::fewshot_fixed:
        return "fewshot-fixed";
    case Mode::cluster_icl:
        return "cluster-icl";
    case Mode::concat:
        return "concat";
    case Mode::refine:
        return "refine";
    }
    return "none";
}

Mode parse_mode(std::string_view s)
{
    for (auto m : {Mode::none, Mode::rocchio, Mode::zeroshot, Mode::fewshot_fixed, Mode::cluster_icl, Mode::concat,
                   Mode::refine}) {
        if (to_string(m) == s) {
            return m;
        }
    }
    throw ValidationError("unknown mode '" + std::string(s) + "'");
}

bool uses_llm(Mode mode) noexcept { return mode != Mode::none && mode != Mode::rocchio; }

bool uses_exemplars(Mode mode) noexcept
{
    return mode == Mode::fewshot_fixed || mode == Mode::cluster_icl || mode == Mode::concat || mode == Mode::refine;
}

std::string to_string(RetrieverKind kind) { return kind == RetrieverKind::bm25 ? "bm25" : "dense"; }

RetrieverKind parse_retriever(std::string_view s)
{
    if (s == "bm25") {
        return RetrieverKind::bm25;
    }
    if (s == "dense") {
        return RetrieverKind::dense;
    }
    throw ValidationError("unknown retriever '" + std::string(s) + "'");
}

json ExpansionRecord::to_json() const
{
    json out = {{"query_id", query_id},     {"mode", to_string(mode)},        {"expansion", expansion},
                {"models", models},         {"prompt_tokens", prompt_tokens}, {"degraded", degraded}};
    if (!errors.empty()) {
        out["errors"] = errors;
    }
    return out;
}

ExpansionRecord ExpansionRecord::from_json(const json& obj)
{
    ExpansionRecord r;
    r.query_id = obj.at("query_id").get<std::string>();
    r.mode = parse_mode(obj.at("mode").get<std::string>());
    r.expansion = obj.at("expansion").get<std::string>();
    r.models = obj.value("models", std::vector<std::string>{});
    r.prompt_tokens = obj.value("prompt_tokens", std::size_t{0});
    r.degraded = obj.value("degraded", false);
    r.errors = obj.value("errors", std::vector<std::string>{});
    return r;
}

void write_expansions(const std::vector<ExpansionRecord>& records, const std::filesystem::path& path)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    for (const auto& r : records) {
        out << r.to_json().dump() << '\n';
    }
    if (!out) {
        throw Error("cannot write expansions to " + path.string());
    }
}

std::vector<ExpansionRecord> read_expansions(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(path.string(), 0, "cannot open expansions file");
    }
    std::vector<ExpansionRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            out.push_back(ExpansionRecord::from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
    }
    return out;
}

void PipelineConfig::validate(const Backends& backends) const
{
    if (query_copies < 1) {
        throw ValidationError("query_copies must be >= 1");
    }
    if (top_k < 1) {
        throw ValidationError("top_k must be >= 1");
    }
    bm25.validate();
    if (mode == Mode::rocchio) {
        rocchio.validate();
        if (retriever == RetrieverKind::dense) {
            throw ValidationError("rocchio mode is lexical; it cannot run with the dense retriever");
        }
    }
    if (uses_llm(mode)) {
        expansion_generation.validate();
        if (backends.llm1 == nullptr) {
            throw ValidationError("mode " + to_string(mode) + " needs an llm1 backend");
        }
    }
    if (mode == Mode::concat || mode == Mode::refine) {
        if (backends.llm2 == nullptr) {
            throw ValidationError("mode " + to_string(mode) + " needs an llm2 backend");
        }
        if (backends.llm1->tag() == backends.llm2->tag()) {
            throw ValidationError("mode " + to_string(mode) + " needs two distinct generator backends, got "
                                  + backends.llm1->tag() + " twice");
        }
    }
    if (mode == Mode::refine) {
        refine_generation.validate();
    }
    if (retriever == RetrieverKind::dense && backends.embedder == nullptr) {
        throw ValidationError("dense retrieval needs an embedding backend");
    }
}

std::string augment_query(std::string_view query, std::string_view expansion, std::size_t copies)
{
    if (query.empty()) {
        throw ValidationError("cannot augment an empty query");
    }
    if (copies < 1) {
        throw ValidationError("copies must be >= 1");
    }
    std::string out;
    out.reserve(copies * (query.size() + 1) + expansion.size());
    for (std::size_t i = 0; i < copies; ++i) {
        if (i > 0) {
            out.push_back(' ');
        }
        out.append(query);
    }
    if (!expansion.empty()) {
        out.push_back(' ');
        out.append(expansion);
    }
    return out;
}

namespace {

struct Generation {
    std::optional<std::string> text;
    std::size_t prompt_tokens = 0;
};

Generation generate(ChatBackend& backend, std::span<const ChatMessage> messages, const GenerationConfig& gen,
                    ExpansionRecord& record)
{
    Generation g;
    g.prompt_tokens = estimate_prompt_tokens(messages);
    record.models.push_back(backend.tag());
    try {
        g.text = chat(backend, messages, gen).text;
    } catch (const Error& e) {
        record.errors.push_back(backend.tag() + ": " + e.what());
    }
    return g;
}

}  // namespace

ExpansionRecord expand_query(const PipelineConfig& config, const Backends& backends, const Query& query,
                             std::span<const ExemplarPair> exemplars)
{
    auto start = std::chrono::steady_clock::now();
    ExpansionRecord record;
    record.query_id = query.query_id;
    record.mode = config.mode;
    if (!uses_llm(config.mode)) {
        return record;
    }

    std::span<const ExemplarPair> demos = uses_exemplars(config.mode) ? exemplars : std::span<const ExemplarPair>{};
    auto budget = static_cast<std::size_t>(std::max(0, config.expansion_generation.prompt_budget()));
    std::vector<ChatMessage> prompt;
    try {
        prompt = build_expansion_prompt(query.text, demos, budget, config.templates);
    } catch (const ValidationError& e) {
        record.degraded = true;
        record.errors.push_back(e.what());
        return record;
    }

    auto first = generate(*backends.llm1, prompt, config.expansion_generation, record);
    record.prompt_tokens = first.prompt_tokens;

    if (config.mode == Mode::concat || config.mode == Mode::refine) {
        auto second = generate(*backends.llm2, prompt, config.expansion_generation, record);
        record.prompt_tokens += second.prompt_tokens;
        if (first.text && second.text) {
            if (config.mode == Mode::concat) {
                record.expansion = *first.text + " " + *second.text;
            } else {
                ChatBackend& refiner = backends.refiner != nullptr ? *backends.refiner : *backends.llm1;
                auto refine_prompt = build_refine_prompt(query.text, *first.text, *second.text, config.templates);
                auto merged = generate(refiner, refine_prompt, config.refine_generation, record);
                record.prompt_tokens += merged.prompt_tokens;
                if (merged.text) {
                    record.expansion = *merged.text;
                } else {
                    record.expansion = *first.text + " " + *second.text;
                    record.degraded = true;
                }
            }
        } else if (first.text || second.text) {
            record.expansion = first.text ? *first.text : *second.text;
            record.degraded = true;
        } else {
            record.degraded = true;
        }
    } else if (first.text) {
        record.expansion = *first.text;
    } else {
        record.degraded = true;
    }

    record.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return record;
}

RunEntry retrieve_query(const PipelineConfig& config, const Backends& backends, const RetrievalInputs& inputs,
                        const Query& query, const ExpansionRecord* expansion)
{
    if (config.mode == Mode::rocchio) {
        if (inputs.index == nullptr) {
            throw ValidationError("rocchio mode needs a BM25 index");
        }
        return rocchio_retrieve(*inputs.index, config.bm25, config.rocchio, query, config.top_k);
    }
    std::string text = query.text;
    if (uses_llm(config.mode)) {
        text = augment_query(query.text, expansion != nullptr ? expansion->expansion : "", config.query_copies);
    }
    if (config.retriever == RetrieverKind::dense) {
        if (inputs.dense == nullptr || backends.embedder == nullptr) {
            throw ValidationError("dense retrieval needs a dense index and an embedder");
        }
        auto qvec = backends.embedder->embed_one(text);
        return RunEntry{query.query_id, dense_retrieve(*inputs.dense, qvec, config.top_k)};
    }
    if (inputs.index == nullptr) {
        throw ValidationError("bm25 retrieval needs an index");
    }
    auto terms = tokenize(text);
    return RunEntry{query.query_id, retrieve_terms(*inputs.index, config.bm25, terms, config.top_k)};
}

std::vector<ExpansionRecord> expand_all(const PipelineConfig& config, const Backends& backends,
                                        std::span<const Query> queries, std::span<const ExemplarPair> exemplars)
{
    config.validate(backends);
    std::vector<ExpansionRecord> records(queries.size());
    if (!uses_llm(config.mode)) {
        return {};
    }
    std::vector<char> done(queries.size(), 0);
    parallel_for(queries.size(), config.workers, [&](std::size_t i) {
        records[i] = expand_query(config, backends, queries[i], exemplars);
        done[i] = 1;
        if (records[i].degraded) {
            spdlog::warn("expansion for query {} degraded: {}", queries[i].query_id,
                         records[i].errors.empty() ? "no text" : records[i].errors.front());
        }
    });
    // After an interrupt only finished queries are kept.
    std::vector<ExpansionRecord> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (done[i]) {
            out.push_back(std::move(records[i]));
        }
    }
    return out;
}

RunList retrieve_all(const PipelineConfig& config, const Backends& backends, const RetrievalInputs& inputs,
                     std::span<const Query> queries, std::span<const ExpansionRecord> expansions)
{
    std::unordered_map<std::string, const ExpansionRecord*> by_id;
    for (const auto& r : expansions) {
        by_id.emplace(r.query_id, &r);
    }
    std::vector<RunEntry> entries(queries.size());
    parallel_for(queries.size(), config.workers, [&](std::size_t i) {
        auto it = by_id.find(queries[i].query_id);
        entries[i] = retrieve_query(config, backends, inputs, queries[i], it == by_id.end() ? nullptr : it->second);
    });
    if (interrupted()) {
        throw Error("interrupted during retrieval");
    }
    RunList run(config.run_tag());
    for (auto& e : entries) {
        run.add(std::move(e));
    }
    return run;
}

PipelineResult run_pipeline(const PipelineConfig& config, const Backends& backends, const RetrievalInputs& inputs,
                            std::span<const Query> queries, std::span<const ExemplarPair> exemplars)
{
    PipelineResult result;
    result.expansions = expand_all(config, backends, queries, exemplars);
    if (interrupted()) {
        throw Error("interrupted during expansion");
    }
    for (const auto& r : result.expansions) {
        result.degraded += r.degraded ? 1 : 0;
    }
    result.run = retrieve_all(config, backends, inputs, queries, result.expansions);
    return result;
}

}  // namespace qexp
