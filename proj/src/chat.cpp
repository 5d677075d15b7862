#include "qexp/chat.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

namespace qexp {

using nlohmann::json;

namespace {

std::string_view last_user_turn(std::span<const ChatMessage> messages)
{
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == Role::user) {
            return it->content;
        }
    }
    return {};
}

std::optional<std::string> labelled_line(std::string_view content, std::string_view label)
{
    std::size_t pos = 0;
    while (pos <= content.size()) {
        auto end = content.find('\n', pos);
        auto line = content.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        if (line.starts_with(label)) {
            return std::string(line.substr(label.size()));
        }
        if (end == std::string_view::npos) {
            break;
        }
        pos = end + 1;
    }
    return std::nullopt;
}

}  // namespace

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r\n\f\v");
    if (b == std::string_view::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \t\r\n\f\v");
    return std::string(s.substr(b, e - b + 1));
}

HttpChat::HttpChat(std::shared_ptr<JsonTransport> transport) : m_transport(std::move(transport)) {}

json HttpChat::request_body(std::span<const ChatMessage> messages, const GenerationConfig& config)
{
    json msgs = json::array();
    for (const auto& m : messages) {
        msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    return {{"messages", msgs},
            {"max_new_tokens", config.max_new_tokens},
            {"num_beams", config.num_beams},
            {"repetition_penalty", config.repetition_penalty},
            {"no_repeat_ngram", config.no_repeat_ngram}};
}

ChatResult HttpChat::complete(std::span<const ChatMessage> messages, const GenerationConfig& config)
{
    auto reply = m_transport->post("/chat", request_body(messages, config));
    auto text = reply.find("text");
    if (text == reply.end() || !text->is_string()) {
        throw ProtocolError("/chat reply has no 'text' string");
    }
    ChatResult out{text->get<std::string>(), std::nullopt};
    if (auto ct = reply.find("completion_tokens"); ct != reply.end() && ct->is_number_integer()) {
        out.completion_tokens = ct->get<int>();
        if (*out.completion_tokens > config.max_new_tokens) {
            throw ProtocolError("/chat generated " + std::to_string(*out.completion_tokens)
                                + " tokens, over max_new_tokens " + std::to_string(config.max_new_tokens));
        }
    }
    return out;
}

std::string last_user_query(std::span<const ChatMessage> messages)
{
    auto turn = last_user_turn(messages);
    if (auto q = labelled_line(turn, "Query: ")) {
        return *q;
    }
    return std::string(turn);
}

ChatResult EchoChat::complete(std::span<const ChatMessage> messages, const GenerationConfig&)
{
    return {last_user_query(messages), std::nullopt};
}

CannedChat::CannedChat(std::map<std::string, std::string> answers, std::string tag)
    : m_answers(std::move(answers)), m_tag(std::move(tag))
{}

CannedChat CannedChat::load(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw ParseError(file.string(), 0, "cannot open canned responses");
    }
    std::map<std::string, std::string> answers;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            auto obj = json::parse(line);
            answers[obj.at("query").get<std::string>()] = obj.at("text").get<std::string>();
        } catch (const std::exception& e) {
            throw ParseError(file.string(), line_no, e.what());
        }
    }
    return CannedChat(std::move(answers), "stub:canned=" + file.string());
}

ChatResult CannedChat::complete(std::span<const ChatMessage> messages, const GenerationConfig&)
{
    auto it = m_answers.find(last_user_query(messages));
    return {it == m_answers.end() ? std::string() : it->second, std::nullopt};
}

ChatResult MergeChat::complete(std::span<const ChatMessage> messages, const GenerationConfig&)
{
    auto turn = last_user_turn(messages);
    std::string merged;
    std::unordered_set<std::string> seen;
    for (const char* label : {"Expansion A: ", "Expansion B: "}) {
        std::istringstream words(labelled_line(turn, label).value_or(""));
        std::string w;
        while (words >> w) {
            if (seen.insert(w).second) {
                if (!merged.empty()) {
                    merged.push_back(' ');
                }
                merged += w;
            }
        }
    }
    return {merged, std::nullopt};
}

ChatResult chat(ChatBackend& backend, std::span<const ChatMessage> messages, const GenerationConfig& config)
{
    auto result = backend.complete(messages, config);
    result.text = trim(result.text);
    if (result.text.empty()) {
        throw EmptyGenerationError("backend " + backend.tag() + " returned an empty generation");
    }
    return result;
}

}  // namespace qexp
