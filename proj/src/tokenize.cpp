#include "qexp/tokenize.hpp"

#include <algorithm>
#include <array>

namespace qexp {

namespace {

// Sorted for binary search.
constexpr std::array<std::string_view, 33> kStopwords = {
    "a",    "an",   "and",   "are",   "as",   "at",    "be",   "but",  "by",   "for",   "if",
    "in",   "into", "is",    "it",    "no",   "not",   "of",   "on",   "or",   "such",  "that",
    "the",  "their", "then", "there", "these", "they", "this", "to",   "was",  "will",  "with",
};

constexpr bool is_term_byte(unsigned char c) noexcept
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

}  // namespace

std::span<const std::string_view> english_stopwords() noexcept { return kStopwords; }

bool is_stopword(std::string_view term) noexcept
{
    return std::binary_search(kStopwords.begin(), kStopwords.end(), term);
}

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> out;
    std::string term;
    bool ascii = true;
    auto flush = [&] {
        if (term.empty()) {
            return;
        }
        if (!is_stopword(term)) {
            out.push_back(ascii ? porter_stem(term) : term);
        }
        term.clear();
        ascii = true;
    };
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (!is_term_byte(c)) {
            flush();
            continue;
        }
        if (c >= 0x80) {
            ascii = false;
        } else if (c >= 'A' && c <= 'Z') {
            c = static_cast<unsigned char>(c - 'A' + 'a');
        }
        term.push_back(static_cast<char>(c));
    }
    flush();
    return out;
}

std::size_t count_words(std::string_view text) noexcept
{
    std::size_t n = 0;
    bool in_word = false;
    for (char ch : text) {
        bool space = ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v';
        if (!space && !in_word) {
            ++n;
        }
        in_word = !space;
    }
    return n;
}

}  // namespace qexp
