#include "qexp/corpus_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

namespace qexp {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(path.string(), 0, "cannot open file");
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    return out;
}

bool is_blank(std::string_view line)
{
    return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

void strip_cr(std::string& line)
{
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
}

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) {
            ++i;
        }
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') {
            ++j;
        }
        if (j > i) {
            out.push_back(line.substr(i, j - i));
        }
        i = j;
    }
    return out;
}

std::vector<std::string_view> split_tabs(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

/// Ids may be JSON strings or integers (some corpora ship numeric ids).
std::optional<std::string> json_id(const json& obj, std::initializer_list<const char*> keys)
{
    for (const char* key : keys) {
        auto it = obj.find(key);
        if (it == obj.end()) {
            continue;
        }
        if (it->is_string()) {
            return it->get<std::string>();
        }
        if (it->is_number_integer()) {
            return std::to_string(it->get<long long>());
        }
        throw std::invalid_argument(std::string("field '") + key + "' must be a string");
    }
    return std::nullopt;
}

std::optional<std::string> json_string(const json& obj, const char* key)
{
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_string()) {
        throw std::invalid_argument(std::string("field '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

template <typename T>
std::vector<T> strict(Parsed<T> parsed, std::string_view source)
{
    if (!parsed.errors.empty()) {
        const auto& e = parsed.errors.front();
        throw ParseError(std::string(source), e.line, e.message);
    }
    return std::move(parsed.records);
}

template <typename LineFn>
void for_each_line(std::istream& in, LineFn&& fn)
{
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (is_blank(line)) {
            continue;
        }
        fn(line_no, line);
    }
}

}  // namespace

std::string Document::index_text() const
{
    if (title && !title->empty()) {
        return text.empty() ? *title : *title + " " + text;
    }
    return text;
}

void Qrels::add(const std::string& query_id, const std::string& doc_id, int grade)
{
    if (grade < 0) {
        throw ValidationError("negative relevance grade for (" + query_id + "," + doc_id + ")");
    }
    auto& per_query = m_entries[query_id];
    auto [it, inserted] = per_query.emplace(doc_id, grade);
    if (!inserted) {
        if (it->second != grade) {
            throw ValidationError("conflicting duplicate judgment for (" + query_id + "," + doc_id + ")");
        }
        return;
    }
    ++m_size;
}

std::optional<int> Qrels::grade(std::string_view query_id, std::string_view doc_id) const
{
    const auto* j = judgments(query_id);
    if (j == nullptr) {
        return std::nullopt;
    }
    auto it = j->find(doc_id);
    if (it == j->end()) {
        return std::nullopt;
    }
    return it->second;
}

const Qrels::Judgments* Qrels::judgments(std::string_view query_id) const
{
    auto it = m_entries.find(query_id);
    return it == m_entries.end() ? nullptr : &it->second;
}

std::vector<std::string> Qrels::query_ids() const
{
    std::vector<std::string> out;
    out.reserve(m_entries.size());
    for (const auto& [qid, _] : m_entries) {
        out.push_back(qid);
    }
    return out;
}

void validate_entry(const RunEntry& entry)
{
    std::unordered_set<std::string_view> seen;
    int prev_rank = 0;
    for (std::size_t i = 0; i < entry.rows.size(); ++i) {
        const auto& row = entry.rows[i];
        if (prev_rank == 0 ? row.rank != 1 : row.rank <= prev_rank) {
            throw ValidationError("query " + entry.query_id + ": rank " + std::to_string(row.rank)
                                  + " breaks strictly increasing ranks from 1");
        }
        if (i > 0 && row.score > entry.rows[i - 1].score) {
            throw ValidationError("query " + entry.query_id + ": score increases at rank "
                                  + std::to_string(row.rank));
        }
        if (!seen.insert(row.doc_id).second) {
            throw ValidationError("query " + entry.query_id + ": duplicate doc_id " + row.doc_id);
        }
        prev_rank = row.rank;
    }
}

void RunList::add(RunEntry entry)
{
    validate_entry(entry);
    if (m_index.contains(entry.query_id)) {
        throw ValidationError("duplicate query in run: " + entry.query_id);
    }
    m_index.emplace(entry.query_id, m_entries.size());
    m_entries.push_back(std::move(entry));
}

const RunEntry* RunList::find(std::string_view query_id) const
{
    auto it = m_index.find(std::string(query_id));
    return it == m_index.end() ? nullptr : &m_entries[it->second];
}

bool operator==(const RunList& a, const RunList& b)
{
    if (a.m_tag != b.m_tag || a.m_entries.size() != b.m_entries.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.m_entries.size(); ++i) {
        const auto& ea = a.m_entries[i];
        const auto& eb = b.m_entries[i];
        if (ea.query_id != eb.query_id || ea.rows.size() != eb.rows.size()) {
            return false;
        }
        for (std::size_t r = 0; r < ea.rows.size(); ++r) {
            const auto& x = ea.rows[r];
            const auto& y = eb.rows[r];
            if (x.doc_id != y.doc_id || x.rank != y.rank || format_score(x.score) != format_score(y.score)) {
                return false;
            }
        }
    }
    return true;
}

CorpusFormat corpus_format_for(const std::filesystem::path& path)
{
    auto ext = path.extension().string();
    return (ext == ".tsv" || ext == ".tab") ? CorpusFormat::tsv : CorpusFormat::jsonl;
}

bool is_valid_utf8(std::string_view s) noexcept
{
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t extra = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            extra = 1;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + extra >= s.size()) {
            return false;
        }
        for (std::size_t k = 1; k <= extra; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) {
                return false;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        static constexpr std::uint32_t min_cp[] = {0, 0x80, 0x800, 0x10000};
        if (cp < min_cp[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            return false;
        }
        i += extra + 1;
    }
    return true;
}

Parsed<Document> parse_corpus(std::istream& in, CorpusFormat format, std::string_view source)
{
    Parsed<Document> out;
    std::unordered_set<std::string> ids;
    for_each_line(in, [&](std::size_t line_no, const std::string& line) {
        ++out.lines;
        if (!is_valid_utf8(line)) {
            out.errors.push_back({line_no, "invalid UTF-8"});
            return;
        }
        Document doc;
        try {
            if (format == CorpusFormat::jsonl) {
                auto obj = json::parse(line);
                if (!obj.is_object()) {
                    throw std::invalid_argument("expected a JSON object");
                }
                auto id = json_id(obj, {"_id", "id"});
                if (!id) {
                    throw std::invalid_argument("missing id field ('_id' or 'id')");
                }
                doc.doc_id = std::move(*id);
                doc.title = json_string(obj, "title");
                doc.text = json_string(obj, "text").value_or("");
            } else {
                auto cols = split_tabs(line);
                if (cols.size() == 2) {
                    doc.doc_id = cols[0];
                    doc.text = cols[1];
                } else if (cols.size() == 3) {
                    doc.doc_id = cols[0];
                    doc.title = std::string(cols[1]);
                    doc.text = cols[2];
                } else {
                    throw std::invalid_argument("expected 2 or 3 tab-separated columns");
                }
            }
            if (doc.doc_id.empty()) {
                throw std::invalid_argument("empty doc id");
            }
            if (doc.text.empty() && (!doc.title || doc.title->empty())) {
                throw std::invalid_argument("document " + doc.doc_id + " has neither text nor title");
            }
        } catch (const std::exception& e) {
            out.errors.push_back({line_no, e.what()});
            return;
        }
        if (!ids.insert(doc.doc_id).second) {
            throw ParseError(std::string(source), line_no, "duplicate doc_id " + doc.doc_id);
        }
        out.records.push_back(std::move(doc));
    });
    return out;
}

Parsed<Query> parse_queries(std::istream& in, CorpusFormat format, std::string_view source)
{
    Parsed<Query> out;
    std::unordered_set<std::string> ids;
    for_each_line(in, [&](std::size_t line_no, const std::string& line) {
        ++out.lines;
        Query q;
        try {
            if (!is_valid_utf8(line)) {
                throw std::invalid_argument("invalid UTF-8");
            }
            if (format == CorpusFormat::jsonl) {
                auto obj = json::parse(line);
                auto id = json_id(obj, {"_id", "id", "query_id"});
                if (!id) {
                    throw std::invalid_argument("missing id field");
                }
                q.query_id = std::move(*id);
                q.text = json_string(obj, "text").value_or("");
            } else {
                auto tab = line.find('\t');
                if (tab == std::string::npos) {
                    throw std::invalid_argument("expected qid<TAB>text");
                }
                q.query_id = line.substr(0, tab);
                q.text = line.substr(tab + 1);
            }
            if (q.query_id.empty()) {
                throw std::invalid_argument("empty query id");
            }
            if (is_blank(q.text)) {
                throw std::invalid_argument("query " + q.query_id + " has empty text");
            }
        } catch (const std::exception& e) {
            out.errors.push_back({line_no, e.what()});
            return;
        }
        if (!ids.insert(q.query_id).second) {
            throw ParseError(std::string(source), line_no, "duplicate query_id " + q.query_id);
        }
        out.records.push_back(std::move(q));
    });
    return out;
}

std::vector<Document> load_corpus(const std::filesystem::path& path, CorpusFormat format)
{
    auto in = open_input(path);
    return strict(parse_corpus(in, format, path.string()), path.string());
}

std::vector<Document> load_corpus(const std::filesystem::path& path)
{
    return load_corpus(path, corpus_format_for(path));
}

std::vector<Query> load_queries(const std::filesystem::path& path)
{
    auto in = open_input(path);
    auto ext = path.extension().string();
    auto format = (ext == ".jsonl" || ext == ".json") ? CorpusFormat::jsonl : CorpusFormat::tsv;
    return strict(parse_queries(in, format, path.string()), path.string());
}

void write_queries(const std::vector<Query>& queries, const std::filesystem::path& path)
{
    auto out = open_output(path);
    for (const auto& q : queries) {
        out << q.query_id << '\t' << q.text << '\n';
    }
}

Qrels parse_qrels(std::istream& in, std::string_view source)
{
    Qrels qrels;
    for_each_line(in, [&](std::size_t line_no, const std::string& line) {
        auto cols = split_ws(line);
        if (cols.size() != 4) {
            throw ParseError(std::string(source), line_no, "expected 'qid iter doc_id rel'");
        }
        int grade = 0;
        auto rel = cols[3];
        auto [ptr, ec] = std::from_chars(rel.data(), rel.data() + rel.size(), grade);
        if (ec != std::errc{} || ptr != rel.data() + rel.size()) {
            throw ParseError(std::string(source), line_no, "non-integer relevance grade '" + std::string(rel) + "'");
        }
        try {
            qrels.add(std::string(cols[0]), std::string(cols[2]), grade);
        } catch (const ValidationError& e) {
            throw ParseError(std::string(source), line_no, e.what());
        }
    });
    return qrels;
}

Qrels load_qrels(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return parse_qrels(in, path.string());
}

std::string format_score(double score)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), score, std::chars_format::fixed, 6);
    if (ec != std::errc{}) {
        throw Error("cannot format score");
    }
    std::string out(buf, ptr);
    if (out == "-0.000000") {
        out = "0.000000";
    }
    return out;
}

void write_run(const RunList& run, std::ostream& out)
{
    const std::string tag = run.tag().empty() ? "qexp" : run.tag();
    for (const auto& entry : run.entries()) {
        for (const auto& row : entry.rows) {
            out << entry.query_id << " Q0 " << row.doc_id << ' ' << row.rank << ' ' << format_score(row.score)
                << ' ' << tag << '\n';
        }
    }
}

void write_run(const RunList& run, const std::filesystem::path& path)
{
    auto out = open_output(path);
    write_run(run, out);
}

RunList parse_run(std::istream& in, std::string_view source)
{
    std::vector<RunEntry> entries;
    std::unordered_map<std::string, std::size_t> index;
    std::optional<std::string> tag;
    std::vector<std::size_t> first_line;

    for_each_line(in, [&](std::size_t line_no, const std::string& line) {
        auto cols = split_ws(line);
        if (cols.size() != 6) {
            throw ParseError(std::string(source), line_no, "expected 'qid Q0 docid rank score tag'");
        }
        RunRow row;
        row.doc_id = cols[2];
        auto rank_sv = cols[3];
        auto [rp, rec] = std::from_chars(rank_sv.data(), rank_sv.data() + rank_sv.size(), row.rank);
        if (rec != std::errc{} || rp != rank_sv.data() + rank_sv.size()) {
            throw ParseError(std::string(source), line_no, "non-integer rank");
        }
        auto score_sv = cols[4];
        auto [sp, sec] = std::from_chars(score_sv.data(), score_sv.data() + score_sv.size(), row.score);
        if (sec != std::errc{} || sp != score_sv.data() + score_sv.size()) {
            throw ParseError(std::string(source), line_no, "non-numeric score");
        }
        if (!tag) {
            tag = std::string(cols[5]);
        } else if (*tag != cols[5]) {
            throw ParseError(std::string(source), line_no, "run tag changes from '" + *tag + "'");
        }
        std::string qid(cols[0]);
        auto [it, inserted] = index.emplace(qid, entries.size());
        if (inserted) {
            entries.push_back(RunEntry{qid, {}});
            first_line.push_back(line_no);
        }
        auto& entry = entries[it->second];
        if (entry.rows.empty() ? row.rank != 1 : row.rank <= entry.rows.back().rank) {
            throw ParseError(std::string(source), line_no,
                             "rank " + std::to_string(row.rank) + " breaks strictly increasing ranks from 1");
        }
        entry.rows.push_back(std::move(row));
    });

    RunList run(tag.value_or(""));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        try {
            run.add(std::move(entries[i]));
        } catch (const ValidationError& e) {
            throw ParseError(std::string(source), first_line[i], e.what());
        }
    }
    return run;
}

RunList read_run(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return parse_run(in, path.string());
}

Parsed<ExemplarPair> parse_pool(std::istream& in, std::string_view /*source*/)
{
    Parsed<ExemplarPair> out;
    for_each_line(in, [&](std::size_t line_no, const std::string& line) {
        ++out.lines;
        try {
            auto obj = json::parse(line);
            if (!obj.is_object()) {
                throw std::invalid_argument("expected a JSON object");
            }
            ExemplarPair pair;
            auto query = json_string(obj, "query");
            auto passage = json_string(obj, "passage");
            if (!query || query->empty()) {
                throw std::invalid_argument("missing or empty 'query'");
            }
            if (!passage || passage->empty()) {
                throw std::invalid_argument("missing or empty 'passage'");
            }
            pair.query_text = std::move(*query);
            pair.passage_text = std::move(*passage);
            pair.source_query_id = json_id(obj, {"source_query_id"});
            if (auto it = obj.find("score"); it != obj.end() && !it->is_null()) {
                if (!it->is_number()) {
                    throw std::invalid_argument("'score' must be a number");
                }
                pair.reranker_score = it->get<double>();
            }
            out.records.push_back(std::move(pair));
        } catch (const std::exception& e) {
            out.errors.push_back({line_no, e.what()});
        }
    });
    return out;
}

std::vector<ExemplarPair> load_pool(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return strict(parse_pool(in, path.string()), path.string());
}

void write_pool(const std::vector<ExemplarPair>& pairs, std::ostream& out)
{
    for (const auto& p : pairs) {
        json obj = {{"query", p.query_text}, {"passage", p.passage_text}};
        if (p.source_query_id) {
            obj["source_query_id"] = *p.source_query_id;
        }
        if (p.reranker_score) {
            obj["score"] = *p.reranker_score;
        }
        out << obj.dump() << '\n';
    }
}

void write_pool(const std::vector<ExemplarPair>& pairs, const std::filesystem::path& path)
{
    auto out = open_output(path);
    write_pool(pairs, out);
}

}  // namespace qexp
