#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qexp/error.hpp"

namespace qexp {

struct Document {
    std::string doc_id;
    std::optional<std::string> title;
    std::string text;

    /// Title and text joined by one space; what the index tokenizes.
    std::string index_text() const;
};

struct Query {
    std::string query_id;
    std::string text;
};

/// Graded judgments keyed by (query_id, doc_id). Grades are >= 0.
class Qrels {
  public:
    using Judgments = std::map<std::string, int, std::less<>>;

    /// Throws ValidationError on a conflicting duplicate or a negative grade.
    /// Re-adding an identical judgment is a no-op.
    void add(const std::string& query_id, const std::string& doc_id, int grade);

    std::optional<int> grade(std::string_view query_id, std::string_view doc_id) const;
    const Judgments* judgments(std::string_view query_id) const;
    std::vector<std::string> query_ids() const;
    std::size_t size() const noexcept { return m_size; }
    bool empty() const noexcept { return m_size == 0; }

  private:
    std::map<std::string, Judgments, std::less<>> m_entries;
    std::size_t m_size = 0;
};

struct RunRow {
    std::string doc_id;
    double score = 0.0;
    int rank = 0;
};

struct RunEntry {
    std::string query_id;
    std::vector<RunRow> rows;
};

/// Ranked results for a set of queries, in insertion order.
class RunList {
  public:
    RunList() = default;
    explicit RunList(std::string tag) : m_tag(std::move(tag)) {}

    const std::string& tag() const noexcept { return m_tag; }
    void set_tag(std::string tag) { m_tag = std::move(tag); }

    /// Throws ValidationError if the query is already present or the rows
    /// violate rank/score ordering.
    void add(RunEntry entry);
    const RunEntry* find(std::string_view query_id) const;
    const std::vector<RunEntry>& entries() const noexcept { return m_entries; }
    std::size_t size() const noexcept { return m_entries.size(); }

    friend bool operator==(const RunList&, const RunList&);

  private:
    std::string m_tag;
    std::vector<RunEntry> m_entries;
    std::unordered_map<std::string, std::size_t> m_index;
};

/// Checks the run invariants on one entry: ranks strictly increasing from 1,
/// scores non-increasing, no repeated doc_id. Throws ValidationError.
void validate_entry(const RunEntry& entry);

struct ExemplarPair {
    std::string query_text;
    std::string passage_text;
    std::optional<std::string> source_query_id;
    std::optional<double> reranker_score;

    friend bool operator==(const ExemplarPair&, const ExemplarPair&) = default;
};

enum class CorpusFormat { jsonl, tsv };

/// Picks the format from the file extension (.tsv / .tab → tsv, else jsonl).
CorpusFormat corpus_format_for(const std::filesystem::path& path);

struct LineError {
    std::size_t line = 0;
    std::string message;
};

/// Lenient parse result. Blank lines are not records and are not counted;
/// every other line lands in exactly one of `records` or `errors`.
template <typename T>
struct Parsed {
    std::vector<T> records;
    std::vector<LineError> errors;
    std::size_t lines = 0;
};

// Lenient parsers report bad lines and keep going. Duplicate ids are still
// fatal: they throw ParseError naming the id.
Parsed<Document> parse_corpus(std::istream& in, CorpusFormat format, std::string_view source = "<corpus>");
Parsed<Query> parse_queries(std::istream& in, CorpusFormat format, std::string_view source = "<queries>");
Parsed<ExemplarPair> parse_pool(std::istream& in, std::string_view source = "<pool>");

// Strict loaders throw ParseError on the first bad line.
std::vector<Document> load_corpus(const std::filesystem::path& path, CorpusFormat format);
std::vector<Document> load_corpus(const std::filesystem::path& path);
std::vector<Query> load_queries(const std::filesystem::path& path);
Qrels load_qrels(const std::filesystem::path& path);
Qrels parse_qrels(std::istream& in, std::string_view source = "<qrels>");
std::vector<ExemplarPair> load_pool(const std::filesystem::path& path);

void write_pool(const std::vector<ExemplarPair>& pairs, std::ostream& out);
void write_pool(const std::vector<ExemplarPair>& pairs, const std::filesystem::path& path);

/// TREC run lines `qid Q0 docid rank score tag`, six decimal places.
void write_run(const RunList& run, std::ostream& out);
void write_run(const RunList& run, const std::filesystem::path& path);
RunList parse_run(std::istream& in, std::string_view source = "<run>");
RunList read_run(const std::filesystem::path& path);

/// Writes queries as `qid<TAB>text`.
void write_queries(const std::vector<Query>& queries, const std::filesystem::path& path);

std::string format_score(double score);
bool is_valid_utf8(std::string_view s) noexcept;

}  // namespace qexp
