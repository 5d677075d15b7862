#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qexp/transport.hpp"

namespace qexp {

struct RerankCandidate {
    std::string doc_id;
    std::string text;
};

struct RerankRequest {
    std::string query_text;
    std::vector<RerankCandidate> candidates;
    /// Used by backends that look scores up by id rather than by text.
    std::optional<std::string> query_id;

    void validate() const;
};

struct RerankResponse {
    std::vector<double> scores;
};

class Reranker {
  public:
    virtual ~Reranker() = default;
    /// Scores aligned with request.candidates.
    virtual RerankResponse rerank(const RerankRequest& request) = 0;
    virtual std::string tag() const = 0;
};

/// POST /rerank {"query", "candidates":[{"id","text"}]} -> {"scores":[...]},
/// split into chunks of `chunk_size` candidates.
class HttpReranker final : public Reranker {
  public:
    explicit HttpReranker(std::shared_ptr<JsonTransport> transport, std::size_t chunk_size = 16);
    RerankResponse rerank(const RerankRequest& request) override;
    std::string tag() const override { return m_transport->describe(); }

  private:
    std::shared_ptr<JsonTransport> m_transport;
    std::size_t m_chunk_size;
};

/// Looks scores up in a jsonl file of {"query_id","doc_id","score"} lines.
/// Requests are keyed by query_id when present, otherwise by query text.
/// Unlisted pairs get `missing_score`.
class ScoreFileReranker final : public Reranker {
  public:
    explicit ScoreFileReranker(const std::filesystem::path& file, double missing_score = 0.0);
    RerankResponse rerank(const RerankRequest& request) override;
    std::string tag() const override { return m_tag; }

  private:
    std::map<std::pair<std::string, std::string>, double> m_scores;
    double m_missing;
    std::string m_tag;
};

/// Deterministic pseudo-random scores in [0, 1) from hash(query, text).
class HashReranker final : public Reranker {
  public:
    RerankResponse rerank(const RerankRequest& request) override;
    std::string tag() const override { return "stub:hash"; }
};

/// Candidate indices ordered by descending score; ties keep input order.
std::vector<std::size_t> rerank_order(const RerankResponse& response);

}  // namespace qexp
