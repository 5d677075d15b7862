#include "qexp/rocchio.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "qexp/tokenize.hpp"

namespace qexp {

void RocchioParams::validate() const
{
    if (!(alpha >= 0.0) || !(beta >= 0.0)) {
        throw ValidationError("rocchio alpha and beta must be >= 0");
    }
    if (fb_docs < 1 || fb_terms < 1) {
        throw ValidationError("rocchio fb_docs and fb_terms must be >= 1");
    }
}

std::vector<WeightedTerm> rocchio_expand(const InvertedIndex& index, const Bm25Params& bm25,
                                         const RocchioParams& params, const Query& query)
{
    params.validate();
    auto terms = tokenize(query.text);
    if (terms.empty()) {
        throw ValidationError("query " + query.query_id + " is empty after tokenization");
    }

    std::vector<WeightedTerm> out;
    std::unordered_map<std::string, std::size_t> position;
    for (const auto& t : terms) {
        auto [it, inserted] = position.emplace(t, out.size());
        if (inserted) {
            out.push_back({t, 0.0});
        }
        out[it->second].weight += 1.0;
    }
    double max_count = 0.0;
    for (const auto& wt : out) {
        max_count = std::max(max_count, wt.weight);
    }
    for (auto& wt : out) {
        wt.weight /= max_count;
    }

    auto feedback = retrieve_terms(index, bm25, terms, params.fb_docs);
    if (feedback.empty()) {
        return out;
    }

    std::map<std::uint32_t, double> centroid;
    for (const auto& row : feedback) {
        auto ord = *index.ordinal(row.doc_id);
        for (const auto& tf : index.doc_terms(ord)) {
            centroid[tf.term] += static_cast<double>(tf.tf) * index.idf(tf.term);
        }
    }
    double inv_docs = 1.0 / static_cast<double>(feedback.size());
    double max_fb = 0.0;
    for (auto& [_, w] : centroid) {
        w *= inv_docs;
        max_fb = std::max(max_fb, w);
    }

    for (auto& wt : out) {
        wt.weight *= params.alpha;
        auto id = index.term_id(wt.term);
        if (id != InvertedIndex::kNoTerm) {
            if (auto it = centroid.find(id); it != centroid.end()) {
                wt.weight += params.beta * it->second / max_fb;
            }
        }
    }

    std::vector<WeightedTerm> expansion;
    for (const auto& [id, w] : centroid) {
        const auto& t = index.term(id);
        if (!position.contains(t)) {
            expansion.push_back({t, w / max_fb});
        }
    }
    auto stronger = [](const WeightedTerm& a, const WeightedTerm& b) {
        return a.weight != b.weight ? a.weight > b.weight : a.term < b.term;
    };
    std::size_t keep = std::min(params.fb_terms, expansion.size());
    std::partial_sort(expansion.begin(), expansion.begin() + static_cast<std::ptrdiff_t>(keep), expansion.end(),
                      stronger);
    expansion.resize(keep);
    for (auto& wt : expansion) {
        wt.weight *= params.beta;
        if (wt.weight > 0.0) {
            out.push_back(std::move(wt));
        }
    }
    return out;
}

std::vector<RunRow> retrieve_weighted(const InvertedIndex& index, const Bm25Params& bm25,
                                      const std::vector<WeightedTerm>& terms, std::size_t k)
{
    if (k == 0) {
        throw ValidationError("retrieve needs k >= 1");
    }
    std::vector<double> acc(index.num_docs(), 0.0);
    std::vector<char> touched(index.num_docs(), 0);
    std::vector<ScoredDoc> hits;
    for (const auto& wt : terms) {
        if (!(wt.weight > 0.0)) {
            continue;
        }
        auto id = index.term_id(wt.term);
        if (id == InvertedIndex::kNoTerm) {
            continue;
        }
        for (const auto& p : index.postings(id)) {
            acc[p.doc] += wt.weight * bm25_term_score(index, bm25, id, p.tf, index.doc_length(p.doc));
            if (!touched[p.doc]) {
                touched[p.doc] = 1;
                hits.push_back({p.doc, 0.0});
            }
        }
    }
    for (auto& h : hits) {
        h.score = acc[h.ord];
    }
    return rank_top_k(std::move(hits), k, index.doc_ids());
}

RunEntry rocchio_retrieve(const InvertedIndex& index, const Bm25Params& bm25, const RocchioParams& params,
                          const Query& query, std::size_t k)
{
    auto terms = rocchio_expand(index, bm25, params, query);
    return RunEntry{query.query_id, retrieve_weighted(index, bm25, terms, k)};
}

}  // namespace qexp
