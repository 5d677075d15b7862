#include "qexp/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "qexp/hash.hpp"

namespace qexp {

using nlohmann::json;

void RerankRequest::validate() const
{
    if (candidates.empty()) {
        throw ValidationError("rerank request has no candidates");
    }
    for (const auto& c : candidates) {
        if (c.text.empty()) {
            throw ValidationError("rerank candidate " + c.doc_id + " has empty text");
        }
    }
}

HttpReranker::HttpReranker(std::shared_ptr<JsonTransport> transport, std::size_t chunk_size)
    : m_transport(std::move(transport)), m_chunk_size(std::max<std::size_t>(1, chunk_size))
{}

RerankResponse HttpReranker::rerank(const RerankRequest& request)
{
    request.validate();
    RerankResponse out;
    out.scores.reserve(request.candidates.size());
    for (std::size_t start = 0; start < request.candidates.size(); start += m_chunk_size) {
        std::size_t end = std::min(start + m_chunk_size, request.candidates.size());
        json cands = json::array();
        for (std::size_t i = start; i < end; ++i) {
            cands.push_back({{"id", request.candidates[i].doc_id}, {"text", request.candidates[i].text}});
        }
        auto reply = m_transport->post("/rerank", json{{"query", request.query_text}, {"candidates", cands}});
        auto it = reply.find("scores");
        if (it == reply.end() || !it->is_array() || it->size() != end - start) {
            throw ProtocolError("/rerank reply must carry " + std::to_string(end - start) + " scores");
        }
        for (const auto& s : *it) {
            if (!s.is_number() || !std::isfinite(s.get<double>())) {
                throw ProtocolError("/rerank returned a non-finite or non-numeric score");
            }
            out.scores.push_back(s.get<double>());
        }
    }
    return out;
}

ScoreFileReranker::ScoreFileReranker(const std::filesystem::path& file, double missing_score)
    : m_missing(missing_score), m_tag("stub:scores=" + file.string())
{
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw ParseError(file.string(), 0, "cannot open score file");
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            auto obj = json::parse(line);
            m_scores[{obj.at("query_id").get<std::string>(), obj.at("doc_id").get<std::string>()}] =
                obj.at("score").get<double>();
        } catch (const std::exception& e) {
            throw ParseError(file.string(), line_no, e.what());
        }
    }
}

RerankResponse ScoreFileReranker::rerank(const RerankRequest& request)
{
    request.validate();
    const std::string& qkey = request.query_id ? *request.query_id : request.query_text;
    RerankResponse out;
    for (const auto& c : request.candidates) {
        auto it = m_scores.find({qkey, c.doc_id});
        out.scores.push_back(it == m_scores.end() ? m_missing : it->second);
    }
    return out;
}

RerankResponse HashReranker::rerank(const RerankRequest& request)
{
    request.validate();
    RerankResponse out;
    for (const auto& c : request.candidates) {
        auto h = fnv1a64(c.text, fnv1a64("\x1f", fnv1a64(request.query_text)));
        out.scores.push_back(static_cast<double>(splitmix64(h) >> 11) * 0x1.0p-53);
    }
    return out;
}

std::vector<std::size_t> rerank_order(const RerankResponse& response)
{
    std::vector<std::size_t> order(response.scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return response.scores[a] > response.scores[b]; });
    return order;
}

}  // namespace qexp
