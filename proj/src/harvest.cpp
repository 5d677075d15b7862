#include "qexp/harvest.hpp"

#include <fstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "qexp/concurrency.hpp"
#include "qexp/tokenize.hpp"

namespace qexp {

using nlohmann::json;

void HarvestConfig::validate() const
{
    if (keep_per_query < 1 || keep_per_query > top_n) {
        throw ValidationError("harvest needs 1 <= keep_per_query <= top_n");
    }
}

std::string to_string(SeedStatus status)
{
    switch (status) {
    case SeedStatus::harvested:
        return "harvested";
    case SeedStatus::no_hits:
        return "no_hits";
    case SeedStatus::empty_query:
        return "empty_query";
    case SeedStatus::failed:
        return "failed";
    case SeedStatus::not_attempted:
        return "not_attempted";
    }
    return "unknown";
}

void HarvestReport::write_jsonl(const std::filesystem::path& path) const
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    for (const auto& o : outcomes) {
        json line = {{"query_id", o.query_id}, {"status", to_string(o.status)}, {"pairs", o.pairs}};
        if (!o.error.empty()) {
            line["error"] = o.error;
        }
        out << line.dump() << '\n';
    }
    out << json{{"summary",
                 {{"seeds", seeds},
                  {"harvested", harvested},
                  {"skipped_no_hits", skipped_no_hits},
                  {"skipped_empty", skipped_empty},
                  {"failed", failed},
                  {"pairs", pairs}}}}
               .dump()
        << '\n';
}

HarvestResult harvest_pool(const InvertedIndex& index, const Bm25Params& bm25, Reranker& reranker,
                           std::span<const Query> seeds, const HarvestConfig& config)
{
    config.validate();
    std::vector<std::vector<ExemplarPair>> per_seed(seeds.size());
    std::vector<SeedOutcome> outcomes(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        outcomes[i].query_id = seeds[i].query_id;
    }

    std::string first_error;
    try {
        parallel_for(seeds.size(), config.workers, [&](std::size_t i) {
            const auto& seed = seeds[i];
            auto& outcome = outcomes[i];
            auto terms = tokenize(seed.text);
            if (terms.empty()) {
                spdlog::warn("harvest: seed {} is empty after tokenization, skipped", seed.query_id);
                outcome.status = SeedStatus::empty_query;
                return;
            }
            auto hits = retrieve_terms(index, bm25, terms, config.top_n);
            if (hits.empty()) {
                outcome.status = SeedStatus::no_hits;
                return;
            }
            RerankRequest request;
            request.query_text = seed.text;
            request.query_id = seed.query_id;
            std::vector<std::uint32_t> ords;
            for (const auto& h : hits) {
                auto ord = *index.ordinal(h.doc_id);
                ords.push_back(ord);
                request.candidates.push_back({h.doc_id, index.document(ord).index_text()});
            }
            RerankResponse response;
            try {
                response = reranker.rerank(request);
            } catch (const std::exception& e) {
                outcome.status = SeedStatus::failed;
                outcome.error = e.what();
                throw;
            }
            if (response.scores.size() != request.candidates.size()) {
                outcome.status = SeedStatus::failed;
                outcome.error = "reranker returned a misaligned score list";
                throw ProtocolError(outcome.error);
            }
            auto order = rerank_order(response);
            std::size_t keep = std::min(config.keep_per_query, order.size());
            for (std::size_t r = 0; r < keep; ++r) {
                const auto& doc = index.document(ords[order[r]]);
                ExemplarPair pair;
                pair.query_text = seed.text;
                pair.passage_text = doc.text.empty() ? doc.title.value_or("") : doc.text;
                pair.source_query_id = seed.query_id;
                pair.reranker_score = response.scores[order[r]];
                per_seed[i].push_back(std::move(pair));
            }
            outcome.status = SeedStatus::harvested;
            outcome.pairs = keep;
        });
    } catch (const std::exception& e) {
        first_error = e.what();
    }

    HarvestResult result;
    auto& report = result.report;
    report.seeds = seeds.size();
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        switch (outcomes[i].status) {
        case SeedStatus::harvested:
            ++report.harvested;
            break;
        case SeedStatus::no_hits:
            ++report.skipped_no_hits;
            break;
        case SeedStatus::empty_query:
            ++report.skipped_empty;
            break;
        case SeedStatus::failed:
            ++report.failed;
            break;
        case SeedStatus::not_attempted:
            break;
        }
        for (auto& p : per_seed[i]) {
            result.pool.push_back(std::move(p));
        }
    }
    report.pairs = result.pool.size();
    report.outcomes = std::move(outcomes);

    if (!first_error.empty()) {
        throw HarvestError("harvest aborted: " + first_error, std::move(result));
    }
    return result;
}

}  // namespace qexp
