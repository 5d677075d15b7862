#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "cli_runner.hpp"
#include "qexp/cluster.hpp"
#include "qexp/harvest.hpp"
#include "qexp/metrics.hpp"
#include "qexp/pipeline.hpp"
#include "qexp/rocchio.hpp"
#include "qexp/stats.hpp"
#include "qexp/tokenize.hpp"
#include "test_support.hpp"

using namespace qexp;
using qexp::testing::fixture;

namespace {

/// Collects failed checks for one criterion.
class Check {
  public:
    void expect(bool ok, const std::string& what)
    {
        ++m_checks;
        if (!ok && m_failures.size() < 5) {
            m_failures.push_back(what);
        }
        m_failed += ok ? 0 : 1;
    }
    void near(double got, double want, double tol, const std::string& what)
    {
        std::ostringstream s;
        s.precision(12);
        s << what << ": got " << got << " want " << want << " tol " << tol;
        expect(std::fabs(got - want) <= tol, s.str());
    }
    void note(std::string text) { m_note = std::move(text); }
    bool ok() const { return m_failed == 0; }
    std::string summary() const
    {
        std::ostringstream s;
        s << m_checks << " checks";
        if (!m_note.empty()) {
            s << ", " << m_note;
        }
        if (m_failed > 0) {
            s << ", " << m_failed << " failed";
            for (const auto& f : m_failures) {
                s << "\n    " << f;
            }
        }
        return s.str();
    }

  private:
    std::size_t m_checks = 0;
    std::size_t m_failed = 0;
    std::vector<std::string> m_failures;
    std::string m_note;
};

struct Criterion {
    const char* id;
    const char* title;
    double time_limit_s;
    std::function<void(Check&)> body;
};

// ---- P1: metrics ----

double ref_ndcg10(const std::vector<RunRow>& rows, const Qrels::Judgments& j)
{
    double dcg = 0.0;
    for (std::size_t i = 0; i < rows.size() && i < 10; ++i) {
        auto it = j.find(rows[i].doc_id);
        if (it != j.end()) {
            dcg += it->second / std::log2(static_cast<double>(i) + 2.0);
        }
    }
    std::vector<int> grades;
    for (const auto& [_, g] : j) {
        grades.push_back(g);
    }
    std::sort(grades.rbegin(), grades.rend());
    double idcg = 0.0;
    for (std::size_t i = 0; i < grades.size() && i < 10; ++i) {
        idcg += grades[i] / std::log2(static_cast<double>(i) + 2.0);
    }
    return idcg > 0 ? dcg / idcg : 0.0;
}

double ref_p10(const std::vector<RunRow>& rows, const Qrels::Judgments& j)
{
    int hits = 0;
    for (std::size_t i = 0; i < rows.size() && i < 10; ++i) {
        auto it = j.find(rows[i].doc_id);
        hits += it != j.end() && it->second >= 1 ? 1 : 0;
    }
    return hits / 10.0;
}

double ref_recall100(const std::vector<RunRow>& rows, const Qrels::Judgments& j)
{
    int relevant = 0;
    for (const auto& [_, g] : j) {
        relevant += g >= 1 ? 1 : 0;
    }
    int hits = 0;
    for (std::size_t i = 0; i < rows.size() && i < 100; ++i) {
        auto it = j.find(rows[i].doc_id);
        hits += it != j.end() && it->second >= 1 ? 1 : 0;
    }
    return relevant > 0 ? static_cast<double>(hits) / relevant : 0.0;
}

void p1(Check& c)
{
    auto run = read_run(fixture("trec_run.txt"));
    auto qrels = load_qrels(fixture("trec_qrels.txt"));
    auto report = evaluate(run, qrels);
    static const std::vector<RunRow> kEmpty;
    for (std::size_t i = 0; i < report.query_ids.size(); ++i) {
        const auto& qid = report.query_ids[i];
        const auto& j = *qrels.judgments(qid);
        const auto* e = run.find(qid);
        const auto& rows = e != nullptr ? e->rows : kEmpty;
        c.near(report.values("ndcg@10")[i], ref_ndcg10(rows, j), 1e-9, qid + " ndcg@10 vs reference");
        c.near(report.values("p@10")[i], ref_p10(rows, j), 1e-9, qid + " p@10 vs reference");
        c.near(report.values("recall@100")[i], ref_recall100(rows, j), 1e-9, qid + " recall@100 vs reference");
    }
    std::ifstream in(fixture("trec_expected.jsonl"));
    std::string line;
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        auto obj = nlohmann::json::parse(line);
        auto qid = obj["query_id"].get<std::string>();
        auto it = std::find(report.query_ids.begin(), report.query_ids.end(), qid);
        c.expect(it != report.query_ids.end(), qid + " evaluated");
        if (it == report.query_ids.end()) {
            continue;
        }
        auto i = static_cast<std::size_t>(it - report.query_ids.begin());
        for (const char* m : {"ndcg@10", "p@10", "recall@100"}) {
            c.near(report.values(m)[i], obj[m].get<double>(), 5e-5, qid + " " + m + " vs trec_eval");
        }
        ++seen;
    }
    c.expect(seen == 50, "50 trec_eval reference queries");
}

// ---- P2: BM25 ----

double direct_bm25(double tf, double df, double n, double dl, double avgdl)
{
    double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    return idf * tf * 1.9 / (tf + 0.9 * (0.6 + 0.4 * dl / avgdl));
}

void p2(Check& c)
{
    std::vector<Document> two{{"d1", std::nullopt, "cat sat"}, {"d2", std::nullopt, "dog ran fast"}};
    auto small = InvertedIndex::build(two);
    std::vector<std::string> cat{"cat"};
    c.near(bm25_score(small, Bm25Params{}, cat, 0), 0.7204, 1e-4, "cat in d1");

    auto docs = load_corpus(fixture("corpus.jsonl"));
    auto index = InvertedIndex::build(docs);
    std::vector<std::vector<std::string>> doc_terms;
    std::map<std::string, int> df;
    double total = 0;
    for (const auto& d : docs) {
        doc_terms.push_back(tokenize(d.index_text()));
        total += static_cast<double>(doc_terms.back().size());
        for (const auto& t : std::set<std::string>(doc_terms.back().begin(), doc_terms.back().end())) {
            ++df[t];
        }
    }
    double n = static_cast<double>(docs.size());
    double avgdl = total / n;
    std::vector<std::string> vocab;
    for (const auto& [t, _] : df) {
        vocab.push_back(t);
    }
    std::mt19937_64 rng(2024);
    for (int qn = 0; qn < 10; ++qn) {
        std::vector<std::string> terms;
        auto len = 1 + rng() % 4;
        for (std::size_t i = 0; i < len; ++i) {
            terms.push_back(vocab[rng() % vocab.size()]);
        }
        std::vector<std::pair<double, std::string>> oracle;
        for (std::size_t d = 0; d < docs.size(); ++d) {
            double s = 0;
            for (const auto& t : terms) {
                auto tf = std::count(doc_terms[d].begin(), doc_terms[d].end(), t);
                if (tf > 0) {
                    s += direct_bm25(static_cast<double>(tf), df[t], n, static_cast<double>(doc_terms[d].size()), avgdl);
                }
            }
            if (s > 0) {
                oracle.emplace_back(-s, docs[d].doc_id);
            }
        }
        std::sort(oracle.begin(), oracle.end());
        oracle.resize(std::min<std::size_t>(oracle.size(), 20));
        auto got = retrieve_terms(index, Bm25Params{}, terms, 20);
        std::string label = "query " + std::to_string(qn);
        c.expect(got.size() == oracle.size(), label + " result count");
        for (std::size_t i = 0; i < std::min(got.size(), oracle.size()); ++i) {
            c.expect(got[i].doc_id == oracle[i].second, label + " rank " + std::to_string(i + 1) + " doc");
            c.near(got[i].score, -oracle[i].first, 1e-9, label + " rank " + std::to_string(i + 1) + " score");
        }
    }
}

// ---- P3: clustering ----

std::vector<Embedding> gaussian(std::size_t n, std::size_t d, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    std::vector<Embedding> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(d);
        for (auto& x : v) {
            x = g(rng);
        }
        out.emplace_back(std::move(v));
    }
    return out;
}

std::vector<ExemplarPair> pool_of(std::size_t n)
{
    std::vector<ExemplarPair> pool;
    for (std::size_t i = 0; i < n; ++i) {
        pool.push_back({"q" + std::to_string(i), "p" + std::to_string(i), std::nullopt, std::nullopt});
    }
    return pool;
}

void p3(Check& c)
{
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 4 + rng() % 197;
        std::size_t k = 1 + rng() % 8;
        auto emb = gaussian(n, 16, rng);
        auto pool = pool_of(n);
        KMeansOptions opts{k, rng()};
        auto sel = select_exemplars(pool, emb, opts);
        std::string label = "pool " + std::to_string(trial) + " n=" + std::to_string(n) + " k=" + std::to_string(k);
        std::set<std::size_t> distinct(sel.indices.begin(), sel.indices.end());
        c.expect(sel.indices.size() == std::min(k, n), label + " size");
        c.expect(distinct.size() == sel.indices.size(), label + " distinct");
        c.expect(std::all_of(sel.indices.begin(), sel.indices.end(), [n](std::size_t i) { return i < n; }),
                 label + " indices in range");
        auto again = select_exemplars(pool, emb, opts);
        c.expect(again.indices == sel.indices, label + " deterministic");

        if (n <= k) {
            continue;
        }
        std::vector<Embedding> rows;
        for (const auto& e : emb) {
            rows.push_back(e.normalized());
        }
        auto pts = Matrix::from_rows(rows);
        auto model = kmeans(pts, opts);
        for (std::size_t cl = 0; cl < k; ++cl) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (model.assignments[i] == cl) {
                    double d2 = squared_l2(pts.row(i), model.centroids.row(cl));
                    if (d2 < best) {
                        best = d2;
                        arg = i;
                    }
                }
            }
            c.expect(cl < sel.indices.size() && sel.indices[cl] == arg, label + " medoid of cluster " + std::to_string(cl));
        }
    }

    int separated = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 blob_rng(seed + 77);
        std::normal_distribution<double> g(0.0, 0.05);
        std::vector<Embedding> emb;
        for (int i = 0; i < 50; ++i) {
            std::vector<double> v(16);
            for (auto& x : v) {
                x = g(blob_rng);
            }
            v[i < 25 ? 0 : 1] += 1.0;
            emb.emplace_back(std::move(v));
        }
        auto sel = select_exemplars(pool_of(50), emb, KMeansOptions{2, seed});
        separated += sel.indices.size() == 2 && ((sel.indices[0] < 25) != (sel.indices[1] < 25)) ? 1 : 0;
    }
    c.expect(separated >= 99, "two blobs separated in " + std::to_string(separated) + "/100 seeds");
}

// ---- P4: end-to-end determinism ----

void p4(Check& c)
{
    qexp::testing::TempDir dir;
    auto queries = load_queries(fixture("queries.tsv"));
    for (const char* mode : {"none", "rocchio", "zeroshot", "cluster-icl", "concat", "refine"}) {
        std::vector<std::string> outs;
        for (const char* which : {"a", "b"}) {
            auto out = (dir / (std::string(mode) + "-" + which)).string();
            std::vector<std::string> args{"-q", "run-all",
                                          "--corpus", fixture("corpus.jsonl").string(),
                                          "--queries", fixture("queries.tsv").string(),
                                          "--seeds", fixture("seeds.tsv").string(),
                                          "--output-dir", out,
                                          "--mode", mode,
                                          "--llm1-url", "stub:canned=" + fixture("canned.jsonl").string(),
                                          "--llm2-url", "stub:echo",
                                          "--refiner-url", "stub:merge",
                                          "--embed-url", "stub:hash",
                                          "--rerank-url", "stub:hash",
                                          "--k-exemplars", "3",
                                          "--workers", std::string(which) == "a" ? "1" : "6",
                                          "--seed", "7"};
            auto r = qexp::testing::run_cli(args);
            c.expect(r.status == 0, std::string(mode) + "/" + which + " exit " + std::to_string(r.status) + ": " + r.output);
            outs.push_back(out);
        }
        namespace fs = std::filesystem;
        auto run_a = qexp::testing::slurp(fs::path(outs[0]) / "run.trec");
        auto run_b = qexp::testing::slurp(fs::path(outs[1]) / "run.trec");
        c.expect(!run_a.empty() && run_a == run_b, std::string(mode) + " run files byte-identical");
        bool llm = uses_llm(parse_mode(mode));
        if (llm) {
            c.expect(qexp::testing::slurp(fs::path(outs[0]) / "expansions.jsonl")
                         == qexp::testing::slurp(fs::path(outs[1]) / "expansions.jsonl"),
                     std::string(mode) + " expansions byte-identical");
        }
        try {
            auto run = read_run(fs::path(outs[0]) / "run.trec");
            for (const auto& q : queries) {
                const auto* e = run.find(q.query_id);
                c.expect(e != nullptr && !e->rows.empty(), std::string(mode) + " run covers " + q.query_id);
            }
            c.expect(run.size() == queries.size(), std::string(mode) + " run has exactly the test queries");
        } catch (const std::exception& e) {
            c.expect(false, std::string(mode) + " run parses: " + e.what());
        }
        if (llm) {
            auto augmented = load_queries(fs::path(outs[0]) / "run.augmented.tsv");
            c.expect(augmented.size() == queries.size(), std::string(mode) + " augmented query count");
            for (std::size_t i = 0; i < std::min(augmented.size(), queries.size()); ++i) {
                std::size_t copies = 0;
                const auto& hay = augmented[i].text;
                for (auto pos = hay.find(queries[i].text); pos != std::string::npos;
                     pos = hay.find(queries[i].text, pos + queries[i].text.size())) {
                    ++copies;
                }
                c.expect(copies >= 5, std::string(mode) + " " + queries[i].query_id + " has the query "
                                          + std::to_string(copies) + " times");
            }
        }
    }
}

// ---- P5: Rocchio ----

void p5(Check& c)
{
    auto index = InvertedIndex::build(load_corpus(fixture("corpus.jsonl")));
    auto queries = load_queries(fixture("queries.tsv"));
    double n = static_cast<double>(index.num_docs());
    for (const auto& q : queries) {
        for (RocchioParams p : {RocchioParams{1.0, 0.75, 3, 5}, RocchioParams{0.5, 1.5, 10, 10}}) {
            auto got = rocchio_expand(index, Bm25Params{}, p, q);
            auto qterms = tokenize(q.text);
            std::map<std::string, double> qv;
            for (const auto& t : qterms) {
                qv[t] += 1.0;
            }
            double qmax = 0;
            for (const auto& [_, w] : qv) {
                qmax = std::max(qmax, w);
            }
            auto top = retrieve(index, Bm25Params{}, q, p.fb_docs).rows;
            std::map<std::string, double> f;
            for (const auto& row : top) {
                std::map<std::string, int> tf;
                for (const auto& t : tokenize(index.document(*index.ordinal(row.doc_id)).index_text())) {
                    ++tf[t];
                }
                for (const auto& [t, cnt] : tf) {
                    double df = index.df(index.term_id(t));
                    f[t] += cnt * std::log(1 + (n - df + 0.5) / (df + 0.5)) / static_cast<double>(top.size());
                }
            }
            double fmax = 0;
            for (const auto& [_, w] : f) {
                fmax = std::max(fmax, w);
            }
            std::map<std::string, double> want;
            for (const auto& [t, w] : qv) {
                want[t] = p.alpha * w / qmax + (fmax > 0 && f.count(t) ? p.beta * f[t] / fmax : 0.0);
            }
            std::vector<std::pair<double, std::string>> extra;
            for (const auto& [t, w] : f) {
                if (!qv.count(t)) {
                    extra.emplace_back(-w, t);
                }
            }
            std::sort(extra.begin(), extra.end());
            for (std::size_t i = 0; i < extra.size() && i < p.fb_terms; ++i) {
                want[extra[i].second] = p.beta * -extra[i].first / fmax;
            }
            std::map<std::string, double> got_map;
            for (const auto& wt : got) {
                got_map[wt.term] = wt.weight;
            }
            c.expect(got_map.size() == want.size(), q.query_id + " expanded term count");
            for (const auto& [t, w] : want) {
                auto it = got_map.find(t);
                c.expect(it != got_map.end(), q.query_id + " has term " + t);
                if (it != got_map.end()) {
                    c.near(it->second, w, 1e-6, q.query_id + " weight of " + t);
                }
            }
        }
        auto plain = retrieve(index, Bm25Params{}, q, 20);
        auto beta0 = rocchio_retrieve(index, Bm25Params{}, RocchioParams{1.0, 0.0, 10, 10}, q, 20);
        c.expect(plain.rows.size() == beta0.rows.size(), q.query_id + " beta=0 result count");
        for (std::size_t i = 0; i < std::min(plain.rows.size(), beta0.rows.size()); ++i) {
            c.expect(plain.rows[i].doc_id == beta0.rows[i].doc_id, q.query_id + " beta=0 ranking");
            c.near(beta0.rows[i].score, plain.rows[i].score, 1e-9, q.query_id + " beta=0 score");
        }
    }
}

// ---- P6: significance ----

void p6(Check& c)
{
    std::vector<double> a{1, 2, 3, 4, 5};
    std::vector<double> zero(5, 0.0);
    auto r = paired_t_test(a, zero);
    boost::math::students_t dist(4.0);
    double boost_p = 2.0 * boost::math::cdf(boost::math::complement(dist, r.t));
    c.near(r.t, 4.2426, 1e-4, "t");
    c.near(r.p, 0.0132, 1e-4, "p");
    c.near(r.p, boost_p, 1e-10, "p vs boost");
    c.expect(r.significant, "significant at 0.05");
    auto same = paired_t_test(a, a);
    c.expect(same.p == 1.0 && same.t == 0.0, "identical inputs give p=1");
    auto swapped = paired_t_test(zero, a);
    c.near(swapped.t, -r.t, 1e-12, "swap negates t");
    c.near(swapped.p, r.p, 1e-12, "swap keeps p");
}

// ---- P7: harvesting ----

void p7(Check& c)
{
    auto docs = load_corpus(fixture("corpus.jsonl"));
    auto index = InvertedIndex::build(docs);
    auto seeds = load_queries(fixture("seeds.tsv"));
    std::set<std::string> texts;
    for (const auto& d : docs) {
        texts.insert(d.text);
    }
    HashReranker reranker;
    for (std::size_t keep : {1u, 3u}) {
        HarvestConfig cfg{50, keep, 4};
        auto res = harvest_pool(index, Bm25Params{}, reranker, seeds, cfg);
        std::string label = "keep=" + std::to_string(keep);
        std::size_t expected = 0;
        std::size_t no_hits = 0;
        for (const auto& s : seeds) {
            auto hits = retrieve(index, Bm25Params{}, s, cfg.top_n).rows.size();
            expected += std::min(keep, hits);
            no_hits += hits == 0 ? 1 : 0;
        }
        c.expect(res.pool.size() == expected, label + " pool size");
        c.expect(res.report.skipped_no_hits == no_hits && no_hits == 1, label + " seeds without hits reported");
        c.expect(res.report.harvested + res.report.skipped_no_hits + res.report.skipped_empty + res.report.failed
                     == seeds.size(),
                 label + " every seed accounted for");
        std::size_t last = 0;
        std::map<std::string, std::size_t> per_seed;
        for (const auto& p : res.pool) {
            c.expect(texts.count(p.passage_text) == 1, label + " passage is a corpus document");
            c.expect(p.source_query_id.has_value(), label + " pair names its seed");
            if (!p.source_query_id) {
                continue;
            }
            std::size_t pos = 0;
            while (pos < seeds.size() && seeds[pos].query_id != *p.source_query_id) {
                ++pos;
            }
            c.expect(pos < seeds.size() && seeds[pos].text == p.query_text, label + " pair query is the seed text");
            c.expect(pos >= last, label + " pairs follow seed order");
            last = pos;
            ++per_seed[*p.source_query_id];
        }
        for (const auto& [_, count] : per_seed) {
            c.expect(count <= keep, label + " at most keep pairs per seed");
        }
        HarvestConfig serial = cfg;
        serial.workers = 1;
        c.expect(harvest_pool(index, Bm25Params{}, reranker, seeds, serial).pool == res.pool,
                 label + " worker count does not change the pool");
    }
}

// ---- P8: expansion helps when vocabularies differ ----

std::string word(const char* prefix, std::size_t n)
{
    static const char kLetters[] = "bcdfghjklmnpqrtvwxz";
    std::string w = prefix;
    do {
        w.push_back(kLetters[n % 19]);
        n /= 19;
    } while (n > 0);
    return w;
}

void p8(Check& c)
{
    constexpr std::size_t kTopics = 10;
    constexpr std::size_t kDocsPerTopic = 20;
    std::mt19937_64 rng(99);
    std::vector<Document> docs;
    Qrels qrels;
    std::vector<Query> queries;
    std::map<std::string, std::string> answers;
    for (std::size_t t = 0; t < kTopics; ++t) {
        std::vector<std::string> qwords;
        std::vector<std::string> dwords;
        for (std::size_t i = 0; i < 3; ++i) {
            qwords.push_back(word("qv", t * 10 + i));
            dwords.push_back(word("dv", t * 10 + i));
        }
        for (std::size_t d = 0; d < kDocsPerTopic; ++d) {
            bool relevant = d < kDocsPerTopic / 2;
            const auto& vocab = relevant ? dwords : qwords;
            std::string text;
            for (int w = 0; w < 12; ++w) {
                text += (w % 3 == 0 ? vocab[rng() % vocab.size()] : word("fl", rng() % 50)) + " ";
            }
            auto id = "t" + std::to_string(t) + "d" + std::to_string(d);
            docs.push_back({id, std::nullopt, text});
            if (relevant) {
                qrels.add("q" + std::to_string(t), id, 1);
            }
        }
        Query q{"q" + std::to_string(t), qwords[0] + " " + qwords[1] + " " + qwords[2]};
        answers[q.text] = dwords[0] + " " + dwords[1] + " " + dwords[2];
        queries.push_back(q);
    }
    auto index = InvertedIndex::build(docs);

    std::vector<Query> seeds;
    for (std::size_t t = 0; t < kTopics; ++t) {
        seeds.push_back({"s" + std::to_string(t), word("qv", t * 10 + 1) + " " + word("fl", t)});
    }
    HashReranker reranker;
    auto pool = harvest_pool(index, Bm25Params{}, reranker, seeds, HarvestConfig{20, 2, 2}).pool;
    HashEmbedder embedder(32);
    std::vector<std::string> pool_texts;
    for (const auto& p : pool) {
        pool_texts.push_back(p.query_text + " " + p.passage_text);
    }
    auto selection = select_exemplars(pool, embedder.embed(pool_texts), KMeansOptions{4, 5});
    c.expect(selection.exemplars.size() == 4, "four exemplars selected");

    CannedChat llm(answers, "canned");
    RetrievalInputs inputs{&index, nullptr};
    PipelineConfig none;
    none.mode = Mode::none;
    PipelineConfig icl = none;
    icl.mode = Mode::cluster_icl;
    auto base = run_pipeline(none, {}, inputs, queries, {});
    auto expanded = run_pipeline(icl, {&llm}, inputs, queries, selection.exemplars);
    c.expect(expanded.degraded == 0, "no degraded expansions");
    double r_none = evaluate(base.run, qrels).mean.at("recall@100");
    double r_icl = evaluate(expanded.run, qrels).mean.at("recall@100");
    std::ostringstream s;
    s << "recall@100 cluster-icl " << r_icl << " > none " << r_none;
    c.expect(r_icl > r_none, s.str());
    c.note(s.str());
}

}  // namespace

int main()
{
    std::vector<Criterion> criteria{
        {"P1", "metrics match a direct reference and trec_eval", 5.0, p1},
        {"P2", "BM25 hand value and exhaustive top-20 oracle", 1.0, p2},
        {"P3", "cluster medoid selection", 30.0, p3},
        {"P4", "run-all is deterministic in every mode", 30.0, p4},
        {"P5", "Rocchio weights and beta=0 equivalence", 10.0, p5},
        {"P6", "paired t-test", 1.0, p6},
        {"P7", "harvest invariants", 10.0, p7},
        {"P8", "expansion recovers vocabulary-mismatched documents", 10.0, p8},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Check check;
        auto start = std::chrono::steady_clock::now();
        try {
            cr.body(check);
        } catch (const std::exception& e) {
            check.expect(false, std::string("threw: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ostringstream limit;
        limit.precision(3);
        limit << "took " << secs << " s, limit " << cr.time_limit_s << " s";
        check.expect(secs <= cr.time_limit_s, limit.str());
        bool ok = check.ok();
        failed += ok ? 0 : 1;
        std::printf("%s %s  %s (%.3f s, %s)\n", cr.id, ok ? "PASS" : "FAIL", cr.title, secs, check.summary().c_str());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
