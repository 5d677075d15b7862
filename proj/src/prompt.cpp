#include "qexp/prompt.hpp"

#include <fstream>

#include "qexp/tokenize.hpp"

namespace qexp {

using nlohmann::json;

std::string to_string(Role role)
{
    switch (role) {
    case Role::system:
        return "system";
    case Role::user:
        return "user";
    case Role::assistant:
        return "assistant";
    }
    return "user";
}

Role parse_role(std::string_view s)
{
    if (s == "system") {
        return Role::system;
    }
    if (s == "user") {
        return Role::user;
    }
    if (s == "assistant") {
        return Role::assistant;
    }
    throw ValidationError("unknown chat role '" + std::string(s) + "'");
}

void GenerationConfig::validate() const
{
    if (max_new_tokens < 1) {
        throw ValidationError("max_new_tokens must be >= 1");
    }
    if (num_beams < 1) {
        throw ValidationError("num_beams must be >= 1");
    }
    if (prompt_budget() < 1) {
        throw ValidationError("context budget leaves no room for the prompt");
    }
}

PromptTemplates PromptTemplates::defaults()
{
    PromptTemplates t;
    t.expansion_system =
        "You are a search assistant. Given a query, write a short passage that answers it. "
        "Use the vocabulary and style of the examples.";
    t.query_turn = "Query: {query}\nWrite a passage that answers the query.";
    t.refine_system =
        "You merge two candidate query expansions into one. Keep the useful entities, relations and domain "
        "knowledge from both expansions. Remove redundancy and noise. Answer with the merged passage only.";
    t.refine_turn = "Query: {query}\nExpansion A: {a}\nExpansion B: {b}\nWrite the merged expansion.";
    return t;
}

PromptTemplates PromptTemplates::from_json(const json& obj)
{
    auto t = defaults();
    t.expansion_system = obj.value("expansion_system", t.expansion_system);
    t.query_turn = obj.value("query_turn", t.query_turn);
    t.refine_system = obj.value("refine_system", t.refine_system);
    t.refine_turn = obj.value("refine_turn", t.refine_turn);
    t.demo_passage_words = obj.value("demo_passage_words", t.demo_passage_words);
    return t;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) {
        throw Error("cannot open templates file " + file.string());
    }
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw ParseError(file.string(), 0, e.what());
    }
}

json PromptTemplates::to_json() const
{
    return {{"expansion_system", expansion_system},
            {"query_turn", query_turn},
            {"refine_system", refine_system},
            {"refine_turn", refine_turn},
            {"demo_passage_words", demo_passage_words}};
}

std::string truncate_words(std::string_view text, std::size_t n)
{
    std::string out;
    std::size_t taken = 0;
    std::size_t i = 0;
    auto space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    while (i < text.size() && taken < n) {
        while (i < text.size() && space(text[i])) {
            ++i;
        }
        std::size_t j = i;
        while (j < text.size() && !space(text[j])) {
            ++j;
        }
        if (j > i) {
            if (!out.empty()) {
                out.push_back(' ');
            }
            out.append(text.substr(i, j - i));
            ++taken;
        }
        i = j;
    }
    return out;
}

std::size_t estimate_tokens(std::string_view text) noexcept
{
    std::size_t words = count_words(text);
    return (3 * words + 1) / 2;
}

std::size_t estimate_prompt_tokens(std::span<const ChatMessage> messages) noexcept
{
    std::size_t total = 0;
    for (const auto& m : messages) {
        total += estimate_tokens(m.content) + kMessageFramingTokens;
    }
    return total;
}

std::string fill_template(std::string_view tmpl, std::string_view query, std::string_view a, std::string_view b)
{
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i);
            if (close != std::string_view::npos) {
                auto name = tmpl.substr(i + 1, close - i - 1);
                if (name == "query" || name == "a" || name == "b") {
                    out.append(name == "query" ? query : name == "a" ? a : b);
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i]);
        ++i;
    }
    return out;
}

std::vector<ChatMessage> build_expansion_prompt(std::string_view query, std::span<const ExemplarPair> exemplars,
                                                std::size_t budget, const PromptTemplates& templates)
{
    ChatMessage system{Role::system, templates.expansion_system};
    ChatMessage test{Role::user, fill_template(templates.query_turn, query)};

    std::vector<ChatMessage> demos;
    for (const auto& ex : exemplars) {
        demos.push_back({Role::user, fill_template(templates.query_turn, ex.query_text)});
        demos.push_back({Role::assistant, truncate_words(ex.passage_text, templates.demo_passage_words)});
    }

    std::size_t fixed = estimate_tokens(system.content) + estimate_tokens(test.content) + 2 * kMessageFramingTokens;
    if (fixed > budget) {
        throw ValidationError("query alone needs ~" + std::to_string(fixed) + " tokens, over the budget of "
                              + std::to_string(budget));
    }
    std::size_t total = fixed + estimate_prompt_tokens(demos);
    while (total > budget && !demos.empty()) {
        total -= estimate_tokens(demos.back().content) + kMessageFramingTokens;
        demos.pop_back();
        total -= estimate_tokens(demos.back().content) + kMessageFramingTokens;
        demos.pop_back();
    }

    std::vector<ChatMessage> out;
    out.reserve(demos.size() + 2);
    out.push_back(std::move(system));
    for (auto& m : demos) {
        out.push_back(std::move(m));
    }
    out.push_back(std::move(test));
    return out;
}

std::vector<ChatMessage> build_refine_prompt(std::string_view query, std::string_view e1, std::string_view e2,
                                             const PromptTemplates& templates)
{
    if (e1.empty() || e2.empty()) {
        throw ValidationError("refinement needs two non-empty expansions");
    }
    return {{Role::system, templates.refine_system},
            {Role::user, fill_template(templates.refine_turn, query, e1, e2)}};
}

}  // namespace qexp
