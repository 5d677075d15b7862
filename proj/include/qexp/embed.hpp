#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qexp/corpus_io.hpp"
#include "qexp/embedding.hpp"
#include "qexp/transport.hpp"

namespace qexp {

/// Text encoder. Returned vectors are unit-normalized and share one dimension.
class Embedder {
  public:
    virtual ~Embedder() = default;
    virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;
    virtual std::string tag() const = 0;

    Embedding embed_one(const std::string& text);
};

/// POST /embed {"texts":[...]} -> {"vectors":[[...]], "dim": n}, batched.
class HttpEmbedder final : public Embedder {
  public:
    explicit HttpEmbedder(std::shared_ptr<JsonTransport> transport, std::size_t batch_size = 32,
                          std::optional<std::size_t> expected_dim = std::nullopt);
    std::vector<Embedding> embed(std::span<const std::string> texts) override;
    std::string tag() const override { return m_transport->describe(); }

  private:
    std::shared_ptr<JsonTransport> m_transport;
    std::size_t m_batch_size;
    std::optional<std::size_t> m_dim;
};

/// Signed feature hashing of tokenized terms into `dim` buckets. Texts with
/// no terms map to the first basis vector.
class HashEmbedder final : public Embedder {
  public:
    explicit HashEmbedder(std::size_t dim = 16) : m_dim(dim) {}
    std::vector<Embedding> embed(std::span<const std::string> texts) override;
    std::string tag() const override { return "stub:hash" + std::to_string(m_dim); }

  private:
    std::size_t m_dim;
};

/// Wraps an embedder with a jsonl cache keyed by hash(backend tag, text).
class CachedEmbedder final : public Embedder {
  public:
    CachedEmbedder(std::shared_ptr<Embedder> inner, std::filesystem::path cache_file);
    std::vector<Embedding> embed(std::span<const std::string> texts) override;
    std::string tag() const override { return m_inner->tag(); }

    std::size_t hits() const noexcept { return m_hits; }
    std::size_t misses() const noexcept { return m_misses; }

  private:
    std::string key(const std::string& text) const;

    std::shared_ptr<Embedder> m_inner;
    std::filesystem::path m_file;
    std::mutex m_mutex;
    std::unordered_map<std::string, Embedding> m_cache;
    std::size_t m_hits = 0;
    std::size_t m_misses = 0;
};

/// The joint text an exemplar is encoded from: query, one space, passage.
std::string pair_text(const ExemplarPair& pair);

Embedding embed_pair(Embedder& embedder, const ExemplarPair& pair);
std::vector<Embedding> embed_pool(Embedder& embedder, std::span<const ExemplarPair> pool);

}  // namespace qexp
