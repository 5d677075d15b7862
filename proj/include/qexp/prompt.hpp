#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qexp/corpus_io.hpp"

namespace qexp {

enum class Role { system, user, assistant };

std::string to_string(Role role);
Role parse_role(std::string_view s);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct GenerationConfig {
    int max_new_tokens = 64;
    int num_beams = 4;
    double repetition_penalty = 1.1;
    int no_repeat_ngram = 2;
    int context_budget_tokens = 1024;

    static GenerationConfig expansion() { return {}; }
    static GenerationConfig refinement()
    {
        GenerationConfig c;
        c.max_new_tokens = 128;
        return c;
    }

    /// Tokens left for the prompt once generation is reserved.
    int prompt_budget() const noexcept { return context_budget_tokens - max_new_tokens; }
    void validate() const;
};

/// Prompt wording. Placeholders: {query}; {a} and {b} in the refine turn.
struct PromptTemplates {
    std::string expansion_system;
    std::string query_turn;
    std::string refine_system;
    std::string refine_turn;
    std::size_t demo_passage_words = 60;

    static PromptTemplates defaults();
    /// JSON object with any subset of the fields above; missing fields keep
    /// their defaults.
    static PromptTemplates from_json(const nlohmann::json& obj);
    static PromptTemplates load(const std::filesystem::path& file);
    nlohmann::json to_json() const;
};

/// First n whitespace-delimited words, joined by single spaces.
std::string truncate_words(std::string_view text, std::size_t n);

/// ceil(1.5 * words). Deliberately over-counts subword tokenizers.
std::size_t estimate_tokens(std::string_view text) noexcept;
inline constexpr std::size_t kMessageFramingTokens = 4;
std::size_t estimate_prompt_tokens(std::span<const ChatMessage> messages) noexcept;

/// System turn, then a user/assistant pair per exemplar (passage cut to the
/// template's word limit), then the test query. Exemplars are dropped from
/// the end until the estimate fits `budget`; throws ValidationError if the
/// query alone does not fit.
std::vector<ChatMessage> build_expansion_prompt(std::string_view query, std::span<const ExemplarPair> exemplars,
                                                std::size_t budget,
                                                const PromptTemplates& templates = PromptTemplates::defaults());

/// System turn with the consolidation instruction and one user turn carrying
/// the query and both expansions (A = e1, B = e2).
std::vector<ChatMessage> build_refine_prompt(std::string_view query, std::string_view e1, std::string_view e2,
                                             const PromptTemplates& templates = PromptTemplates::defaults());

std::string fill_template(std::string_view tmpl, std::string_view query, std::string_view a = {},
                          std::string_view b = {});

}  // namespace qexp
