#include "qexp/index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "qexp/tokenize.hpp"

namespace qexp {

using nlohmann::json;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kDocs = "docs.jsonl";
constexpr const char* kPostings = "postings.jsonl";
constexpr const char* kFormatName = "qexp-bm25-index";

}  // namespace

void Bm25Params::validate() const
{
    if (!(k1 >= 0.0) || !std::isfinite(k1)) {
        throw ValidationError("bm25 k1 must be >= 0");
    }
    if (!(b >= 0.0 && b <= 1.0)) {
        throw ValidationError("bm25 b must be in [0, 1]");
    }
}

InvertedIndex InvertedIndex::build(std::span<const Document> docs)
{
    if (docs.empty()) {
        throw ValidationError("cannot index an empty corpus");
    }
    InvertedIndex idx;
    idx.m_docs.assign(docs.begin(), docs.end());
    idx.m_doc_ids.reserve(docs.size());
    idx.m_doc_lengths.reserve(docs.size());

    std::unordered_map<std::uint32_t, std::uint32_t> counts;
    for (std::size_t ord = 0; ord < docs.size(); ++ord) {
        const auto& doc = docs[ord];
        if (!idx.m_doc_ordinals.emplace(doc.doc_id, static_cast<std::uint32_t>(ord)).second) {
            throw ValidationError("duplicate doc_id " + doc.doc_id);
        }
        idx.m_doc_ids.push_back(doc.doc_id);

        auto terms = tokenize(doc.index_text());
        idx.m_doc_lengths.push_back(static_cast<std::uint32_t>(terms.size()));
        counts.clear();
        std::vector<std::uint32_t> order;
        for (auto& t : terms) {
            auto [it, inserted] = idx.m_term_ids.emplace(t, static_cast<std::uint32_t>(idx.m_terms.size()));
            if (inserted) {
                idx.m_terms.push_back(t);
                idx.m_postings.emplace_back();
            }
            if (counts[it->second]++ == 0) {
                order.push_back(it->second);
            }
        }
        std::sort(order.begin(), order.end());
        for (auto term : order) {
            idx.m_postings[term].push_back({static_cast<std::uint32_t>(ord), counts[term]});
        }
    }
    idx.finish();
    return idx;
}

void InvertedIndex::finish()
{
    double total = 0.0;
    for (auto len : m_doc_lengths) {
        total += len;
    }
    m_avgdl = m_doc_lengths.empty() ? 0.0 : total / static_cast<double>(m_doc_lengths.size());

    m_forward.assign(m_doc_ids.size(), {});
    for (std::uint32_t t = 0; t < m_postings.size(); ++t) {
        for (const auto& p : m_postings[t]) {
            m_forward[p.doc].push_back({t, p.tf});
        }
    }
}

std::uint32_t InvertedIndex::term_id(std::string_view term) const
{
    auto it = m_term_ids.find(std::string(term));
    return it == m_term_ids.end() ? kNoTerm : it->second;
}

std::optional<std::uint32_t> InvertedIndex::ordinal(std::string_view doc_id) const
{
    auto it = m_doc_ordinals.find(std::string(doc_id));
    if (it == m_doc_ordinals.end()) {
        return std::nullopt;
    }
    return it->second;
}

double InvertedIndex::idf(std::uint32_t term_id) const
{
    double n = static_cast<double>(num_docs());
    double d = static_cast<double>(df(term_id));
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

void InvertedIndex::save(const std::filesystem::path& dir) const
{
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / kDocs, std::ios::binary | std::ios::trunc);
        for (std::size_t i = 0; i < m_docs.size(); ++i) {
            json obj = {{"id", m_docs[i].doc_id}, {"length", m_doc_lengths[i]}, {"text", m_docs[i].text}};
            if (m_docs[i].title) {
                obj["title"] = *m_docs[i].title;
            }
            out << obj.dump() << '\n';
        }
    }
    {
        std::ofstream out(dir / kPostings, std::ios::binary | std::ios::trunc);
        for (std::size_t t = 0; t < m_terms.size(); ++t) {
            json list = json::array();
            for (const auto& p : m_postings[t]) {
                list.push_back({p.doc, p.tf});
            }
            out << json{{"term", m_terms[t]}, {"postings", std::move(list)}}.dump() << '\n';
        }
    }
    // The manifest goes last so a half-written directory never looks valid.
    json manifest = {{"format", kFormatName},    {"version", kFormatVersion}, {"num_docs", num_docs()},
                     {"num_terms", num_terms()}, {"avg_doc_length", m_avgdl}};
    std::ofstream out(dir / kManifest, std::ios::binary | std::ios::trunc);
    out << manifest.dump(2) << '\n';
    if (!out) {
        throw Error("failed writing index to " + dir.string());
    }
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& dir)
{
    std::ifstream min(dir / kManifest);
    if (!min) {
        throw Error("no index manifest in " + dir.string());
    }
    json manifest = json::parse(min);
    if (manifest.value("format", "") != kFormatName) {
        throw Error(dir.string() + " is not a qexp BM25 index");
    }
    if (manifest.value("version", 0) != kFormatVersion) {
        throw Error("unsupported index version " + manifest["version"].dump() + " in " + dir.string());
    }

    InvertedIndex idx;
    std::string line;
    std::ifstream din(dir / kDocs, std::ios::binary);
    while (std::getline(din, line)) {
        auto obj = json::parse(line);
        Document doc;
        doc.doc_id = obj.at("id").get<std::string>();
        doc.text = obj.at("text").get<std::string>();
        if (obj.contains("title")) {
            doc.title = obj["title"].get<std::string>();
        }
        idx.m_doc_ordinals.emplace(doc.doc_id, static_cast<std::uint32_t>(idx.m_docs.size()));
        idx.m_doc_ids.push_back(doc.doc_id);
        idx.m_doc_lengths.push_back(obj.at("length").get<std::uint32_t>());
        idx.m_docs.push_back(std::move(doc));
    }
    std::ifstream pin(dir / kPostings, std::ios::binary);
    while (std::getline(pin, line)) {
        auto obj = json::parse(line);
        auto term = obj.at("term").get<std::string>();
        idx.m_term_ids.emplace(term, static_cast<std::uint32_t>(idx.m_terms.size()));
        idx.m_terms.push_back(std::move(term));
        auto& list = idx.m_postings.emplace_back();
        for (const auto& p : obj.at("postings")) {
            Posting posting{p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>()};
            if (posting.doc >= idx.m_doc_ids.size()) {
                throw Error("posting refers to unknown document ordinal in " + dir.string());
            }
            list.push_back(posting);
        }
    }
    if (idx.m_doc_ids.size() != manifest.at("num_docs").get<std::size_t>()
        || idx.m_terms.size() != manifest.at("num_terms").get<std::size_t>()) {
        throw Error("index in " + dir.string() + " is truncated");
    }
    idx.finish();
    return idx;
}

double bm25_term_score(const InvertedIndex& index, const Bm25Params& params, std::uint32_t term_id,
                       std::uint32_t tf, std::uint32_t doc_length)
{
    if (tf == 0) {
        return 0.0;
    }
    double f = static_cast<double>(tf);
    double avgdl = index.avg_doc_length();
    double norm_len = avgdl > 0.0 ? static_cast<double>(doc_length) / avgdl : 0.0;
    double denom = f + params.k1 * (1.0 - params.b + params.b * norm_len);
    return index.idf(term_id) * f * (params.k1 + 1.0) / denom;
}

double bm25_score(const InvertedIndex& index, const Bm25Params& params, std::span<const std::string> query_terms,
                  std::uint32_t ord)
{
    if (ord >= index.num_docs()) {
        throw ValidationError("document ordinal out of range");
    }
    double score = 0.0;
    auto doc_terms = index.doc_terms(ord);
    for (const auto& qt : query_terms) {
        auto id = index.term_id(qt);
        if (id == InvertedIndex::kNoTerm) {
            continue;
        }
        // Forward lists are sorted by term id.
        auto it = std::lower_bound(doc_terms.begin(), doc_terms.end(), id,
                                   [](const TermFreq& tf, std::uint32_t t) { return tf.term < t; });
        if (it != doc_terms.end() && it->term == id) {
            score += bm25_term_score(index, params, id, it->tf, index.doc_length(ord));
        }
    }
    return score;
}

std::vector<RunRow> rank_top_k(std::vector<ScoredDoc> scored, std::size_t k, const std::vector<std::string>& doc_ids)
{
    auto better = [&](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return doc_ids[a.ord] < doc_ids[b.ord];
    };
    std::size_t keep = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), better);
    std::vector<RunRow> rows;
    rows.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        rows.push_back({doc_ids[scored[i].ord], scored[i].score, static_cast<int>(i + 1)});
    }
    return rows;
}

std::vector<RunRow> retrieve_terms(const InvertedIndex& index, const Bm25Params& params,
                                   std::span<const std::string> query_terms, std::size_t k)
{
    if (k == 0) {
        throw ValidationError("retrieve needs k >= 1");
    }
    std::vector<double> acc(index.num_docs(), 0.0);
    std::vector<char> touched(index.num_docs(), 0);
    std::vector<ScoredDoc> hits;
    // Term-at-a-time in query order, so accumulated sums match bm25_score.
    for (const auto& qt : query_terms) {
        auto id = index.term_id(qt);
        if (id == InvertedIndex::kNoTerm) {
            continue;
        }
        for (const auto& p : index.postings(id)) {
            acc[p.doc] += bm25_term_score(index, params, id, p.tf, index.doc_length(p.doc));
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

RunEntry retrieve(const InvertedIndex& index, const Bm25Params& params, const Query& query, std::size_t k)
{
    auto terms = tokenize(query.text);
    return RunEntry{query.query_id, retrieve_terms(index, params, terms, k)};
}

}  // namespace qexp
