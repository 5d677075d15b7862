#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qexp/chat.hpp"
#include "qexp/dense.hpp"
#include "qexp/embed.hpp"
#include "qexp/index.hpp"
#include "qexp/rocchio.hpp"

namespace qexp {

enum class Mode { none, rocchio, zeroshot, fewshot_fixed, cluster_icl, concat, refine };

std::string to_string(Mode mode);
Mode parse_mode(std::string_view s);
/// Modes that call a generator LLM.
bool uses_llm(Mode mode) noexcept;
/// Modes that put exemplars in the prompt.
bool uses_exemplars(Mode mode) noexcept;

enum class RetrieverKind { bm25, dense };

std::string to_string(RetrieverKind kind);
RetrieverKind parse_retriever(std::string_view s);

struct ExpansionRecord {
    std::string query_id;
    Mode mode = Mode::zeroshot;
    std::string expansion;
    std::vector<std::string> models;
    std::size_t prompt_tokens = 0;
    double elapsed_ms = 0.0;
    bool degraded = false;
    std::vector<std::string> errors;

    /// Persisted form. Timing is left out so expansion files are reproducible.
    nlohmann::json to_json() const;
    static ExpansionRecord from_json(const nlohmann::json& obj);
};

void write_expansions(const std::vector<ExpansionRecord>& records, const std::filesystem::path& path);
std::vector<ExpansionRecord> read_expansions(const std::filesystem::path& path);

/// Non-owning backend handles. Unused ones may be null.
struct Backends {
    ChatBackend* llm1 = nullptr;
    ChatBackend* llm2 = nullptr;
    /// Falls back to llm1 when null.
    ChatBackend* refiner = nullptr;
    Embedder* embedder = nullptr;
};

struct PipelineConfig {
    Mode mode = Mode::none;
    std::size_t k_exemplars = 4;
    std::size_t query_copies = 5;
    RetrieverKind retriever = RetrieverKind::bm25;
    std::size_t top_k = 100;
    GenerationConfig expansion_generation = GenerationConfig::expansion();
    GenerationConfig refine_generation = GenerationConfig::refinement();
    PromptTemplates templates = PromptTemplates::defaults();
    Bm25Params bm25;
    RocchioParams rocchio;
    std::string tag;
    std::size_t workers = 4;

    /// Checks the knobs and that the backends the mode needs are present.
    void validate(const Backends& backends) const;
    std::string run_tag() const { return tag.empty() ? "qexp-" + to_string(mode) : tag; }
};

/// `copies` repetitions of q joined by spaces, then the expansion if any.
std::string augment_query(std::string_view query, std::string_view expansion, std::size_t copies);

/// Produces the expansion for one query per the configured mode. Generator
/// failures never throw: they degrade the record (see `degraded`, `errors`).
ExpansionRecord expand_query(const PipelineConfig& config, const Backends& backends, const Query& query,
                             std::span<const ExemplarPair> exemplars);

/// Retrieval side only, from stored expansions (matched by query_id).
struct RetrievalInputs {
    const InvertedIndex* index = nullptr;
    const DenseIndex* dense = nullptr;
};

RunEntry retrieve_query(const PipelineConfig& config, const Backends& backends, const RetrievalInputs& inputs,
                        const Query& query, const ExpansionRecord* expansion);

struct PipelineResult {
    RunList run;
    std::vector<ExpansionRecord> expansions;
    std::size_t degraded = 0;
};

std::vector<ExpansionRecord> expand_all(const PipelineConfig& config, const Backends& backends,
                                        std::span<const Query> queries, std::span<const ExemplarPair> exemplars);

RunList retrieve_all(const PipelineConfig& config, const Backends& backends, const RetrievalInputs& inputs,
                     std::span<const Query> queries, std::span<const ExpansionRecord> expansions);

/// Expand (when the mode needs it), augment, retrieve. The run covers every
/// input query in input order.
PipelineResult run_pipeline(const PipelineConfig& config, const Backends& backends, const RetrievalInputs& inputs,
                            std::span<const Query> queries, std::span<const ExemplarPair> exemplars);

}  // namespace qexp
