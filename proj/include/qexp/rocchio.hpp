#pragma once

#include <string>
#include <vector>

#include "qexp/index.hpp"

namespace qexp {

struct RocchioParams {
    double alpha = 1.0;
    double beta = 0.75;
    std::size_t fb_docs = 10;
    std::size_t fb_terms = 10;

    void validate() const;
};

struct WeightedTerm {
    std::string term;
    double weight = 0.0;
};

/// Expanded query vector: original query terms first (first-occurrence
/// order), then feedback terms by descending weight, ties by term.
///
/// q' = alpha * q + beta * f, where q is the query term-count vector scaled to
/// max 1, and f is the mean tf-idf vector of the top fb_docs BM25 documents
/// scaled to max 1. Only the fb_terms strongest non-query terms of f are
/// kept. With no feedback documents the scaled query vector is returned as is.
std::vector<WeightedTerm> rocchio_expand(const InvertedIndex& index, const Bm25Params& bm25,
                                         const RocchioParams& params, const Query& query);

/// Scores each document by the weight-scaled sum of its per-term BM25
/// contributions; returns top k of the documents with a positive score.
std::vector<RunRow> retrieve_weighted(const InvertedIndex& index, const Bm25Params& bm25,
                                      const std::vector<WeightedTerm>& terms, std::size_t k);

RunEntry rocchio_retrieve(const InvertedIndex& index, const Bm25Params& bm25, const RocchioParams& params,
                          const Query& query, std::size_t k);

}  // namespace qexp
