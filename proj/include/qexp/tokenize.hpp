#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qexp {

/// Porter stemmer, following Martin Porter's reference C implementation
/// (including its `logi` and `bli` departures from the original 1980 algorithm). Input is
/// expected lowercase ASCII; words of two letters or fewer are returned as is.
std::string porter_stem(std::string_view word);

/// The English stopword set used by the Lucene/Anserini analyzer.
std::span<const std::string_view> english_stopwords() noexcept;
bool is_stopword(std::string_view term) noexcept;

/// Lowercases ASCII, splits on anything that is not an ASCII letter or digit
/// (bytes >= 0x80 are kept inside terms), drops stopwords, Porter-stems
/// pure-ASCII terms.
std::vector<std::string> tokenize(std::string_view text);

/// Number of whitespace-delimited words.
std::size_t count_words(std::string_view text) noexcept;

}  // namespace qexp
