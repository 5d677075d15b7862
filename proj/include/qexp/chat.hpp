#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "qexp/prompt.hpp"
#include "qexp/transport.hpp"

namespace qexp {

struct ChatResult {
    std::string text;
    std::optional<int> completion_tokens;
};

class ChatBackend {
  public:
    virtual ~ChatBackend() = default;
    virtual ChatResult complete(std::span<const ChatMessage> messages, const GenerationConfig& config) = 0;
    virtual std::string tag() const = 0;
};

/// Raised when a backend answers with nothing usable.
class EmptyGenerationError : public Error {
  public:
    using Error::Error;
};

/// POST /chat with the messages and decoding parameters; expects
/// {"text": str, "completion_tokens": int}.
class HttpChat final : public ChatBackend {
  public:
    explicit HttpChat(std::shared_ptr<JsonTransport> transport);
    ChatResult complete(std::span<const ChatMessage> messages, const GenerationConfig& config) override;
    std::string tag() const override { return m_transport->describe(); }

    static nlohmann::json request_body(std::span<const ChatMessage> messages, const GenerationConfig& config);

  private:
    std::shared_ptr<JsonTransport> m_transport;
};

/// The text after "Query: " on the first such line of the last user turn, or
/// the whole turn when there is no such line.
std::string last_user_query(std::span<const ChatMessage> messages);

/// Echoes the test query back.
class EchoChat final : public ChatBackend {
  public:
    explicit EchoChat(std::string tag = "stub:echo") : m_tag(std::move(tag)) {}
    ChatResult complete(std::span<const ChatMessage> messages, const GenerationConfig& config) override;
    std::string tag() const override { return m_tag; }

  private:
    std::string m_tag;
};

/// Looks the test query up in a fixed map; unknown queries generate nothing.
class CannedChat final : public ChatBackend {
  public:
    CannedChat(std::map<std::string, std::string> answers, std::string tag);
    /// jsonl lines {"query": str, "text": str}.
    static CannedChat load(const std::filesystem::path& file);
    ChatResult complete(std::span<const ChatMessage> messages, const GenerationConfig& config) override;
    std::string tag() const override { return m_tag; }

  private:
    std::map<std::string, std::string> m_answers;
    std::string m_tag;
};

/// Refinement stub: merges the "Expansion A:" and "Expansion B:" lines of the
/// last user turn, keeping the first occurrence of each word.
class MergeChat final : public ChatBackend {
  public:
    ChatResult complete(std::span<const ChatMessage> messages, const GenerationConfig& config) override;
    std::string tag() const override { return "stub:merge"; }
};

/// Backend driven by a callable; handy in tests.
class FunctionChat final : public ChatBackend {
  public:
    using Fn = std::function<ChatResult(std::span<const ChatMessage>, const GenerationConfig&)>;
    FunctionChat(Fn fn, std::string tag) : m_fn(std::move(fn)), m_tag(std::move(tag)) {}
    ChatResult complete(std::span<const ChatMessage> messages, const GenerationConfig& config) override
    {
        return m_fn(messages, config);
    }
    std::string tag() const override { return m_tag; }

  private:
    Fn m_fn;
    std::string m_tag;
};

/// Calls the backend, trims surrounding whitespace and rejects empty output
/// with EmptyGenerationError.
ChatResult chat(ChatBackend& backend, std::span<const ChatMessage> messages, const GenerationConfig& config);

std::string trim(std::string_view s);

}  // namespace qexp
