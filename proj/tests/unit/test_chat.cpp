#include <gtest/gtest.h>

#include "fake_server.hpp"
#include "qexp/chat.hpp"
#include "test_support.hpp"

using namespace qexp;
using nlohmann::json;

namespace {

class CannedTransport final : public JsonTransport {
  public:
    explicit CannedTransport(json reply) : m_reply(std::move(reply)) {}
    json post(std::string_view, const json&) override { return m_reply; }
    std::string describe() const override { return "canned"; }

  private:
    json m_reply;
};

std::vector<ChatMessage> prompt_for(const std::string& q) { return build_expansion_prompt(q, {}, 960); }

}  // namespace

TEST(HttpChat, ForwardsDecodingParameters)
{
    qexp::testing::FakeModelServer server;
    HttpChat c(std::make_shared<HttpTransport>(server.url()));
    auto cfg = GenerationConfig::expansion();
    auto res = chat(c, prompt_for("coffee"), cfg);
    EXPECT_EQ(res.text, "generated for Query: coffee");
    EXPECT_EQ(res.completion_tokens, 5);
    auto body = server.last_body();
    EXPECT_EQ(body.at("max_new_tokens"), 64);
    EXPECT_EQ(body.at("num_beams"), 4);
    EXPECT_EQ(body.at("no_repeat_ngram"), 2);
    EXPECT_DOUBLE_EQ(body.at("repetition_penalty").get<double>(), 1.1);
    EXPECT_EQ(body.at("messages").size(), 2u);
    EXPECT_EQ(body.at("messages").at(0).at("role"), "system");
}

TEST(HttpChat, EmptyGenerationIsAnError)
{
    qexp::testing::FakeModelServer server;
    server.empty_chat = true;
    HttpChat c(std::make_shared<HttpTransport>(server.url()));
    EXPECT_THROW(chat(c, prompt_for("x"), GenerationConfig::expansion()), EmptyGenerationError);
}

TEST(HttpChat, ContractViolations)
{
    HttpChat no_text(std::make_shared<CannedTransport>(json{{"completion_tokens", 3}}));
    EXPECT_THROW(no_text.complete(prompt_for("x"), GenerationConfig::expansion()), ProtocolError);
    HttpChat too_long(std::make_shared<CannedTransport>(json{{"text", "t"}, {"completion_tokens", 65}}));
    EXPECT_THROW(too_long.complete(prompt_for("x"), GenerationConfig::expansion()), ProtocolError);
    EXPECT_NO_THROW(too_long.complete(prompt_for("x"), GenerationConfig::refinement()));
}

TEST(Stubs, EchoReturnsQuery)
{
    EchoChat e;
    EXPECT_EQ(chat(e, prompt_for("black hole"), {}).text, "black hole");
    EXPECT_EQ(e.tag(), "stub:echo");
}

TEST(Stubs, CannedLooksUpQuery)
{
    CannedChat c({{"a", "answer a"}}, "stub:canned=x");
    EXPECT_EQ(chat(c, prompt_for("a"), {}).text, "answer a");
    EXPECT_THROW(chat(c, prompt_for("b"), {}), EmptyGenerationError);
    auto loaded = CannedChat::load(qexp::testing::fixture("canned.jsonl"));
    EXPECT_NE(chat(loaded, prompt_for("how do vaccines work"), {}).text.find("immune"), std::string::npos);
    EXPECT_THROW(CannedChat::load("/no/such/file.jsonl"), ParseError);
}

TEST(Stubs, MergeDeduplicatesWords)
{
    MergeChat m;
    auto p = build_refine_prompt("q", "red green blue", "green yellow red");
    EXPECT_EQ(chat(m, p, GenerationConfig::refinement()).text, "red green blue yellow");
}

TEST(Stubs, FunctionChat)
{
    FunctionChat f([](std::span<const ChatMessage> m, const GenerationConfig& g) {
        return ChatResult{std::to_string(m.size()) + ":" + std::to_string(g.max_new_tokens), std::nullopt};
    }, "fn");
    EXPECT_EQ(chat(f, prompt_for("q"), GenerationConfig::refinement()).text, "2:128");
}

TEST(Chat, LastUserQuery)
{
    std::vector<ChatMessage> m{{Role::user, "Query: old"}, {Role::assistant, "x"}, {Role::user, "intro\nQuery: new one\nmore"}};
    EXPECT_EQ(last_user_query(m), "new one");
    std::vector<ChatMessage> plain{{Role::user, "no label"}};
    EXPECT_EQ(last_user_query(plain), "no label");
}

TEST(Chat, Trim)
{
    EXPECT_EQ(trim("  a b \n"), "a b");
    EXPECT_EQ(trim(" \t "), "");
}
