#include <cmath>

#include <gtest/gtest.h>

#include "fake_server.hpp"
#include "qexp/embed.hpp"
#include "test_support.hpp"

using namespace qexp;
using nlohmann::json;

namespace {

class CountingEmbedder final : public Embedder {
  public:
    std::size_t texts_seen = 0;
    std::vector<Embedding> embed(std::span<const std::string> texts) override
    {
        texts_seen += texts.size();
        return m_inner.embed(texts);
    }
    std::string tag() const override { return m_inner.tag(); }

  private:
    HashEmbedder m_inner{8};
};

class CannedTransport final : public JsonTransport {
  public:
    explicit CannedTransport(json reply) : m_reply(std::move(reply)) {}
    json post(std::string_view, const json&) override { return m_reply; }
    std::string describe() const override { return "canned"; }

  private:
    json m_reply;
};

}  // namespace

TEST(HttpEmbedder, UnitNormsAndBatching)
{
    qexp::testing::FakeModelServer server;
    HttpEmbedder e(std::make_shared<HttpTransport>(server.url()), 4);
    std::vector<std::string> texts;
    for (int i = 0; i < 10; ++i) {
        texts.push_back("text " + std::to_string(i));
    }
    texts.push_back("text 3");
    auto out = e.embed(texts);
    ASSERT_EQ(out.size(), 11u);
    EXPECT_EQ(server.requests.load(), 3);
    for (const auto& v : out) {
        EXPECT_EQ(v.dim(), 8u);
        EXPECT_NEAR(v.norm(), 1.0, 1e-5);
    }
    EXPECT_EQ(out[3], out[10]);
    EXPECT_EQ(server.last_body().at("texts").size(), 3u);
}

TEST(HttpEmbedder, ProtocolViolations)
{
    qexp::testing::FakeModelServer server;
    server.bad_embed_dim = true;
    HttpEmbedder mismatch(std::make_shared<HttpTransport>(server.url()));
    EXPECT_THROW(mismatch.embed_one("x"), ProtocolError);

    HttpEmbedder wrong_count(std::make_shared<CannedTransport>(json{{"vectors", {{1.0, 0.0}, {0.0, 1.0}}}}));
    EXPECT_THROW(wrong_count.embed_one("x"), ProtocolError);
    HttpEmbedder zero(std::make_shared<CannedTransport>(json{{"vectors", {{0.0, 0.0}}}}));
    EXPECT_THROW(zero.embed_one("x"), ProtocolError);
    HttpEmbedder junk(std::make_shared<CannedTransport>(json{{"vectors", {"nope"}}}));
    EXPECT_THROW(junk.embed_one("x"), ProtocolError);
    HttpEmbedder expected(std::make_shared<CannedTransport>(json{{"vectors", {{1.0, 0.0}}}}), 32, 3);
    EXPECT_THROW(expected.embed_one("x"), ProtocolError);
}

TEST(HashEmbedder, DeterministicAndNormalized)
{
    HashEmbedder e(16);
    auto a = e.embed_one("vitamin d bones");
    EXPECT_EQ(a, e.embed_one("vitamin d bones"));
    EXPECT_EQ(a.dim(), 16u);
    EXPECT_NEAR(a.norm(), 1.0, 1e-12);
    auto empty = e.embed_one("the of");
    EXPECT_EQ(empty[0], 1.0);
    EXPECT_EQ(e.tag(), "stub:hash16");
}

TEST(CachedEmbedder, HitsAvoidRecompute)
{
    qexp::testing::TempDir dir;
    auto inner = std::make_shared<CountingEmbedder>();
    std::vector<std::string> texts{"a b", "c d", "a b"};
    std::vector<Embedding> first;
    {
        CachedEmbedder cache(inner, dir / "cache.jsonl");
        first = cache.embed(texts);
        EXPECT_EQ(inner->texts_seen, 2u);
        EXPECT_EQ(cache.misses(), 2u);
        EXPECT_EQ(cache.hits(), 1u);
    }
    CachedEmbedder reopened(inner, dir / "cache.jsonl");
    auto second = reopened.embed(texts);
    EXPECT_EQ(inner->texts_seen, 2u);
    EXPECT_EQ(reopened.hits(), 3u);
    ASSERT_EQ(second.size(), first.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        for (std::size_t j = 0; j < first[i].dim(); ++j) {
            EXPECT_DOUBLE_EQ(first[i][j], second[i][j]);
        }
    }
}

TEST(PairText, QueryThenPassage)
{
    ExemplarPair p{"q text", "passage text", std::nullopt, std::nullopt};
    EXPECT_EQ(pair_text(p), "q text passage text");
    HashEmbedder e;
    std::vector<ExemplarPair> pool{p, p};
    auto v = embed_pool(e, pool);
    EXPECT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0], embed_pair(e, p));
}
