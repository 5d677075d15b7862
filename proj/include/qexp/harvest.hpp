#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qexp/index.hpp"
#include "qexp/rerank.hpp"

namespace qexp {

struct HarvestConfig {
    std::size_t top_n = 100;
    std::size_t keep_per_query = 1;
    std::size_t workers = 4;

    void validate() const;
};

enum class SeedStatus { harvested, no_hits, empty_query, failed, not_attempted };

std::string to_string(SeedStatus status);

struct SeedOutcome {
    std::string query_id;
    SeedStatus status = SeedStatus::not_attempted;
    std::size_t pairs = 0;
    std::string error;
};

struct HarvestReport {
    std::size_t seeds = 0;
    std::size_t harvested = 0;
    std::size_t skipped_no_hits = 0;
    std::size_t skipped_empty = 0;
    std::size_t failed = 0;
    std::size_t pairs = 0;
    std::vector<SeedOutcome> outcomes;

    /// One line per seed, then a summary line.
    void write_jsonl(const std::filesystem::path& path) const;
};

struct HarvestResult {
    std::vector<ExemplarPair> pool;
    HarvestReport report;
};

/// Thrown when the reranker fails for some seed. Carries everything that
/// completed, in seed order, plus the per-seed accounting.
class HarvestError : public Error {
  public:
    HarvestError(const std::string& message, HarvestResult partial)
        : Error(message), m_partial(std::move(partial))
    {}
    const HarvestResult& partial() const noexcept { return m_partial; }

  private:
    HarvestResult m_partial;
};

/// For each seed: BM25 top_n, rerank, keep the best keep_per_query passages
/// as (seed text, passage) pairs. Output follows seed order.
HarvestResult harvest_pool(const InvertedIndex& index, const Bm25Params& bm25, Reranker& reranker,
                           std::span<const Query> seeds, const HarvestConfig& config);

}  // namespace qexp
