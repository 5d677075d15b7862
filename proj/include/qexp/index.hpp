#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qexp/corpus_io.hpp"

namespace qexp {

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;

    void validate() const;
};

struct Posting {
    std::uint32_t doc = 0;
    std::uint32_t tf = 0;

    friend bool operator==(const Posting&, const Posting&) = default;
};

/// Term id with its frequency in one document.
struct TermFreq {
    std::uint32_t term = 0;
    std::uint32_t tf = 0;
};

/// Immutable BM25 index. Documents are addressed by ordinal (input order);
/// terms by id (first-occurrence order during build).
class InvertedIndex {
  public:
    static constexpr int kFormatVersion = 1;
    static constexpr std::uint32_t kNoTerm = UINT32_MAX;

    /// Throws ValidationError on an empty corpus or a repeated doc_id.
    static InvertedIndex build(std::span<const Document> docs);

    void save(const std::filesystem::path& dir) const;
    static InvertedIndex load(const std::filesystem::path& dir);

    std::size_t num_docs() const noexcept { return m_doc_ids.size(); }
    std::size_t num_terms() const noexcept { return m_terms.size(); }
    double avg_doc_length() const noexcept { return m_avgdl; }

    std::uint32_t term_id(std::string_view term) const;
    const std::string& term(std::uint32_t id) const { return m_terms[id]; }
    std::span<const Posting> postings(std::uint32_t term_id) const { return m_postings[term_id]; }
    std::uint32_t df(std::uint32_t term_id) const
    {
        return static_cast<std::uint32_t>(m_postings[term_id].size());
    }
    /// ln(1 + (N - df + 0.5) / (df + 0.5)); always positive.
    double idf(std::uint32_t term_id) const;

    std::uint32_t doc_length(std::uint32_t ord) const { return m_doc_lengths[ord]; }
    const std::string& doc_id(std::uint32_t ord) const { return m_doc_ids[ord]; }
    const std::vector<std::string>& doc_ids() const noexcept { return m_doc_ids; }
    const Document& document(std::uint32_t ord) const { return m_docs[ord]; }
    std::span<const TermFreq> doc_terms(std::uint32_t ord) const { return m_forward[ord]; }
    std::optional<std::uint32_t> ordinal(std::string_view doc_id) const;

  private:
    void finish();

    std::vector<Document> m_docs;
    std::vector<std::string> m_doc_ids;
    std::vector<std::uint32_t> m_doc_lengths;
    std::vector<std::string> m_terms;
    std::unordered_map<std::string, std::uint32_t> m_term_ids;
    std::unordered_map<std::string, std::uint32_t> m_doc_ordinals;
    std::vector<std::vector<Posting>> m_postings;
    std::vector<std::vector<TermFreq>> m_forward;
    double m_avgdl = 0.0;
};

/// Contribution of one term occurrence (in the query) to a document's score.
double bm25_term_score(const InvertedIndex& index, const Bm25Params& params, std::uint32_t term_id,
                       std::uint32_t tf, std::uint32_t doc_length);

/// Sum over query terms (with multiplicity) of the per-term BM25 weight.
/// Unknown terms contribute 0.
double bm25_score(const InvertedIndex& index, const Bm25Params& params, std::span<const std::string> query_terms,
                  std::uint32_t ord);

struct ScoredDoc {
    std::uint32_t ord = 0;
    double score = 0.0;
};

/// Sorts by descending score, then ascending doc_id, keeps the first k and
/// assigns ranks.
std::vector<RunRow> rank_top_k(std::vector<ScoredDoc> scored, std::size_t k,
                               const std::vector<std::string>& doc_ids);

/// Top-k documents that match at least one query term.
std::vector<RunRow> retrieve_terms(const InvertedIndex& index, const Bm25Params& params,
                                   std::span<const std::string> query_terms, std::size_t k);
RunEntry retrieve(const InvertedIndex& index, const Bm25Params& params, const Query& query, std::size_t k);

}  // namespace qexp
