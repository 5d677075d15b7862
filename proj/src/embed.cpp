#include "qexp/embed.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include "qexp/hash.hpp"
#include "qexp/tokenize.hpp"

namespace qexp {

using nlohmann::json;

Embedding Embedder::embed_one(const std::string& text)
{
    auto out = embed(std::span<const std::string>(&text, 1));
    if (out.size() != 1) {
        throw ProtocolError("embedder returned " + std::to_string(out.size()) + " vectors for 1 text");
    }
    return std::move(out.front());
}

HttpEmbedder::HttpEmbedder(std::shared_ptr<JsonTransport> transport, std::size_t batch_size,
                           std::optional<std::size_t> expected_dim)
    : m_transport(std::move(transport)), m_batch_size(std::max<std::size_t>(1, batch_size)), m_dim(expected_dim)
{}

std::vector<Embedding> HttpEmbedder::embed(std::span<const std::string> texts)
{
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += m_batch_size) {
        std::size_t end = std::min(start + m_batch_size, texts.size());
        json batch = json::array();
        for (std::size_t i = start; i < end; ++i) {
            batch.push_back(texts[i]);
        }
        auto reply = m_transport->post("/embed", json{{"texts", batch}});
        auto vectors = reply.find("vectors");
        if (vectors == reply.end() || !vectors->is_array() || vectors->size() != end - start) {
            throw ProtocolError("/embed reply must carry " + std::to_string(end - start) + " vectors");
        }
        std::optional<std::size_t> declared;
        if (auto d = reply.find("dim"); d != reply.end() && d->is_number_unsigned()) {
            declared = d->get<std::size_t>();
        }
        for (const auto& v : *vectors) {
            std::vector<double> values;
            try {
                values = v.get<std::vector<double>>();
            } catch (const json::exception&) {
                throw ProtocolError("/embed vector is not a list of numbers");
            }
            if (declared && values.size() != *declared) {
                throw ProtocolError("/embed vector has dimension " + std::to_string(values.size())
                                    + ", reply declares " + std::to_string(*declared));
            }
            if (!m_dim) {
                m_dim = values.size();
            } else if (values.size() != *m_dim) {
                throw ProtocolError("/embed dimension changed from " + std::to_string(*m_dim) + " to "
                                    + std::to_string(values.size()));
            }
            try {
                out.push_back(Embedding(std::move(values)).normalize());
            } catch (const ValidationError& e) {
                throw ProtocolError(std::string("/embed: ") + e.what());
            }
        }
    }
    return out;
}

std::vector<Embedding> HashEmbedder::embed(std::span<const std::string> texts)
{
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        std::vector<double> v(m_dim, 0.0);
        for (const auto& term : tokenize(text)) {
            auto h = splitmix64(fnv1a64(term));
            v[h % m_dim] += (h >> 63) != 0 ? -1.0 : 1.0;
        }
        double n = 0.0;
        for (double x : v) {
            n += x * x;
        }
        if (n == 0.0) {
            v[0] = 1.0;
        }
        out.push_back(Embedding(std::move(v)).normalize());
    }
    return out;
}

CachedEmbedder::CachedEmbedder(std::shared_ptr<Embedder> inner, std::filesystem::path cache_file)
    : m_inner(std::move(inner)), m_file(std::move(cache_file))
{
    std::ifstream in(m_file, std::ios::binary);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            auto obj = json::parse(line);
            m_cache.insert_or_assign(obj.at("key").get<std::string>(),
                                     Embedding(obj.at("vector").get<std::vector<double>>()));
        } catch (const std::exception& e) {
            throw ParseError(m_file.string(), line_no, e.what());
        }
    }
}

std::string CachedEmbedder::key(const std::string& text) const
{
    return hex64(fnv1a64(text, fnv1a64("\x1f", fnv1a64(m_inner->tag()))));
}

std::vector<Embedding> CachedEmbedder::embed(std::span<const std::string> texts)
{
    std::vector<std::optional<Embedding>> found(texts.size());
    std::vector<std::string> missing;
    // For each input position: index into `missing`, or npos when cached.
    std::vector<std::size_t> slot(texts.size(), std::string::npos);
    {
        std::lock_guard lock(m_mutex);
        std::unordered_map<std::string, std::size_t> pending;
        for (std::size_t i = 0; i < texts.size(); ++i) {
            auto k = key(texts[i]);
            if (auto it = m_cache.find(k); it != m_cache.end()) {
                found[i] = it->second;
                ++m_hits;
            } else if (auto p = pending.find(k); p != pending.end()) {
                slot[i] = p->second;
                ++m_hits;
            } else {
                slot[i] = missing.size();
                pending.emplace(k, missing.size());
                missing.push_back(texts[i]);
                ++m_misses;
            }
        }
    }
    if (!missing.empty()) {
        auto fresh = m_inner->embed(missing);
        if (fresh.size() != missing.size()) {
            throw ProtocolError("embedder returned a misaligned batch");
        }
        std::lock_guard lock(m_mutex);
        if (m_file.has_parent_path()) {
            std::filesystem::create_directories(m_file.parent_path());
        }
        std::ofstream out(m_file, std::ios::binary | std::ios::app);
        for (std::size_t j = 0; j < missing.size(); ++j) {
            auto k = key(missing[j]);
            auto values = fresh[j].values();
            out << json{{"key", k}, {"vector", std::vector<double>(values.begin(), values.end())}}.dump() << '\n';
            m_cache.insert_or_assign(k, fresh[j]);
        }
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (slot[i] != std::string::npos) {
                found[i] = fresh[slot[i]];
            }
        }
    }
    std::vector<Embedding> result;
    result.reserve(texts.size());
    for (auto& f : found) {
        result.push_back(std::move(*f));
    }
    return result;
}

std::string pair_text(const ExemplarPair& pair) { return pair.query_text + " " + pair.passage_text; }

Embedding embed_pair(Embedder& embedder, const ExemplarPair& pair)
{
    return embedder.embed_one(pair_text(pair)).normalize();
}

std::vector<Embedding> embed_pool(Embedder& embedder, std::span<const ExemplarPair> pool)
{
    std::vector<std::string> texts;
    texts.reserve(pool.size());
    for (const auto& p : pool) {
        texts.push_back(pair_text(p));
    }
    auto out = embedder.embed(texts);
    for (auto& e : out) {
        e.normalize();
    }
    return out;
}

}  // namespace qexp
